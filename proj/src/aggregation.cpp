#include "crowdsoft/aggregation.hpp"

#include <algorithm>
#include <cmath>

namespace crowdsoft {
namespace {

SoftLabelMatrix like(const SoftLabelMatrix& shape, std::string name) {
  SoftLabelMatrix out;
  out.method_name = std::move(name);
  out.labels = shape.labels;
  out.item_ids = shape.item_ids;
  out.rows.reserve(shape.items());
  return out;
}

std::vector<std::vector<double>> item_members(const Ensemble& e, std::size_t item) {
  std::vector<std::vector<double>> out;
  out.reserve(e.size());
  for (const auto& m : e.members) out.emplace_back(m.rows[item].probs().begin(), m.rows[item].probs().end());
  return out;
}

// Renormalizes away rounding drift before building a Distribution.
Distribution renormalized(std::vector<double> p) {
  double total = 0.0;
  for (double x : p) total += x;
  for (double& x : p) x /= total;
  return Distribution(std::move(p));
}

// log softmax(z) in place.
void log_softmax(std::vector<double>& z) {
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double x : z) total += std::exp(x - top);
  const double lse = top + std::log(total);
  for (double& x : z) x -= lse;
}

}  // namespace

void Ensemble::validate() const {
  if (members.empty()) throw Error(ErrorCode::NeedsEnsemble, "ensemble has no members");
  const auto& first = members.front();
  if (first.rows.empty()) throw Error(ErrorCode::EnsembleMismatch, "member '" + first.method_name + "' has no items");
  const std::size_t k = first.rows.front().size();
  for (const auto& m : members) {
    const std::string who = "member '" + m.method_name + "' vs '" + first.method_name + "': ";
    if (m.items() != first.items()) {
      throw Error(ErrorCode::EnsembleMismatch,
                  who + std::to_string(m.items()) + " vs " + std::to_string(first.items()) + " items");
    }
    if (!m.labels.empty() && !first.labels.empty() && m.labels != first.labels) {
      throw Error(ErrorCode::EnsembleMismatch, who + "label sets differ");
    }
    if (m.item_ids.size() == first.item_ids.size()) {
      for (std::size_t i = 0; i < m.item_ids.size(); ++i) {
        if (m.item_ids[i] != first.item_ids[i]) {
          throw Error(ErrorCode::EnsembleMismatch, who + "row " + std::to_string(i) + " is item '" + m.item_ids[i] +
                                                       "' vs '" + first.item_ids[i] + "'");
        }
      }
    } else if (!m.item_ids.empty() && !first.item_ids.empty()) {
      throw Error(ErrorCode::EnsembleMismatch, who + "item id lists differ in length");
    }
    for (const auto& row : m.rows) {
      if (row.size() != k) {
        throw Error(ErrorCode::EnsembleMismatch,
                    who + std::to_string(row.size()) + " vs " + std::to_string(k) + " labels");
      }
    }
  }
}

SoftLabelMatrix aggregate_average(const Ensemble& ensemble) {
  ensemble.validate();
  const std::size_t k = ensemble.num_labels();
  const double inv_m = 1.0 / static_cast<double>(ensemble.size());
  auto out = like(ensemble.members.front(), "average");
  for (std::size_t i = 0; i < ensemble.items(); ++i) {
    std::vector<double> mean(k, 0.0);
    for (const auto& m : ensemble.members) {
      for (std::size_t y = 0; y < k; ++y) mean[y] += m.rows[i][y];
    }
    for (double& x : mean) x *= inv_m;
    out.rows.push_back(renormalized(std::move(mean)));
  }
  return out;
}

double js_objective(std::span<const std::vector<double>> members, std::span<const double> q) {
  double sum = 0.0;
  for (const auto& p : members) sum += geometry::js_divergence(p, q);
  return sum;
}

CentroidResult js_centroid_item(std::span<const std::vector<double>> members, const CentroidConfig& config) {
  if (members.empty()) throw Error(ErrorCode::NeedsEnsemble, "centroid of no distributions");
  if (config.max_iters < 0 || !(config.tol >= 0.0)) throw Error(ErrorCode::InvalidConfig, "bad centroid config");
  const std::size_t k = members.front().size();
  if (k < 2) throw Error(ErrorCode::InvalidVocabulary, "need at least 2 classes");

  std::vector<std::vector<double>> smoothed;
  std::vector<geometry::NaturalParam> thetas;
  for (const auto& p : members) {
    if (p.size() != k) throw Error(ErrorCode::EnsembleMismatch, "members have different label counts");
    smoothed.push_back(geometry::smooth(p, config.epsilon));
    thetas.push_back(geometry::to_natural(smoothed.back()));
  }
  const double inv_m = 1.0 / static_cast<double>(members.size());

  geometry::NaturalParam theta{std::vector<double>(k - 1, 0.0)};
  for (const auto& t : thetas) {
    for (std::size_t c = 0; c + 1 < k; ++c) theta.theta[c] += t.theta[c] * inv_m;
  }

  CentroidResult result;
  result.objective_trace.push_back(js_objective(smoothed, geometry::to_probabilities(theta)));

  geometry::NaturalParam mid{std::vector<double>(k - 1)};
  for (int iter = 0; iter < config.max_iters; ++iter) {
    geometry::DualParam mean_eta{std::vector<double>(k - 1, 0.0)};
    for (const auto& t : thetas) {
      for (std::size_t c = 0; c + 1 < k; ++c) mid.theta[c] = 0.5 * (t.theta[c] + theta.theta[c]);
      const auto eta = geometry::grad_negentropy(mid);
      for (std::size_t c = 0; c + 1 < k; ++c) mean_eta.eta[c] += eta.eta[c] * inv_m;
    }
    auto next = geometry::grad_negentropy_inverse(mean_eta);

    double change = 0.0;
    for (std::size_t c = 0; c + 1 < k; ++c) {
      if (!std::isfinite(next.theta[c])) throw Error(ErrorCode::NumericalFailure, "non-finite centroid iterate");
      change = std::max(change, std::abs(next.theta[c] - theta.theta[c]));
    }
    theta = std::move(next);
    result.iterations = iter + 1;
    result.objective_trace.push_back(js_objective(smoothed, geometry::to_probabilities(theta)));
    if (change < config.tol) {
      result.converged = true;
      break;
    }
  }
  result.centroid = geometry::to_probabilities(theta);
  return result;
}

SoftLabelMatrix js_centroid(const Ensemble& ensemble, const CentroidConfig& config) {
  ensemble.validate();
  auto out = like(ensemble.members.front(), "centroid");
  for (std::size_t i = 0; i < ensemble.items(); ++i) {
    const auto members = item_members(ensemble, i);
    out.rows.push_back(renormalized(js_centroid_item(members, config).centroid));
  }
  return out;
}

void TemperatureConfig::validate() const {
  if (!(t_min > 0.0) || !(t_max >= t_min) || !std::isfinite(t_max)) {
    throw Error(ErrorCode::InvalidConfig, "temperature bounds need 0 < t_min <= t_max");
  }
  if (!(lr > 0.0)) throw Error(ErrorCode::InvalidConfig, "lr must be positive");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidConfig, "lambda must be non-negative");
  if (max_steps < 0) throw Error(ErrorCode::InvalidConfig, "max_steps must be non-negative");
  if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidConfig, "tol must be non-negative");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be positive");
}

TemperatureLoss::TemperatureLoss(const Ensemble& ensemble, double lambda, double epsilon) : lambda_(lambda) {
  ensemble.validate();
  log_probs_.resize(ensemble.size());
  for (std::size_t m = 0; m < ensemble.size(); ++m) {
    auto& per_item = log_probs_[m];
    per_item.reserve(ensemble.items());
    for (const auto& row : ensemble.members[m].rows) {
      auto p = geometry::smooth(row.probs(), epsilon);
      for (double& x : p) x = std::log(x);
      per_item.push_back(std::move(p));
    }
  }
}

double TemperatureLoss::operator()(std::span<const double> tau, std::span<double> grad) const {
  const std::size_t m_count = log_probs_.size();
  if (tau.size() != m_count) throw Error(ErrorCode::LengthMismatch, "one log-temperature per member required");
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != m_count) throw Error(ErrorCode::LengthMismatch, "gradient size mismatch");

  const std::size_t items = log_probs_.front().size();
  const std::size_t k = log_probs_.front().front().size();
  const double z = 0.5 * static_cast<double>(m_count) * static_cast<double>(m_count - 1);
  const double inv_items = 1.0 / static_cast<double>(items);

  std::vector<double> temps(m_count);
  for (std::size_t m = 0; m < m_count; ++m) temps[m] = std::exp(tau[m]);
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

  // Scaled logits z_m, log p~_m and p~_m for one item.
  std::vector<std::vector<double>> scaled(m_count, std::vector<double>(k));
  std::vector<std::vector<double>> log_p(m_count, std::vector<double>(k));
  std::vector<std::vector<double>> p(m_count, std::vector<double>(k));
  std::vector<double> mean_z(m_count);

  double divergence = 0.0;
  for (std::size_t i = 0; i < items; ++i) {
    for (std::size_t m = 0; m < m_count; ++m) {
      const auto& l = log_probs_[m][i];
      for (std::size_t y = 0; y < k; ++y) scaled[m][y] = l[y] / temps[m];
      log_p[m] = scaled[m];
      log_softmax(log_p[m]);
      mean_z[m] = 0.0;
      for (std::size_t y = 0; y < k; ++y) {
        p[m][y] = std::exp(log_p[m][y]);
        mean_z[m] += p[m][y] * scaled[m][y];
      }
    }
    for (std::size_t a = 0; a < m_count; ++a) {
      for (std::size_t b = a + 1; b < m_count; ++b) {
        double d = 0.0;
        double ga = 0.0;
        double gb = 0.0;
        for (std::size_t y = 0; y < k; ++y) {
          const double s = 0.5 * (p[a][y] + p[b][y]);
          if (s <= 0.0) continue;
          const double log_s = std::log(s);
          // dJS/dp_a[y] = 0.5 log(p_a[y] / s[y]); dp_a[y]/dtau_a = p_a[y] (mean_z - z[y]).
          if (p[a][y] > 0.0) {
            const double h = 0.5 * (log_p[a][y] - log_s);
            d += p[a][y] * h;
            ga += h * p[a][y] * (mean_z[a] - scaled[a][y]);
          }
          if (p[b][y] > 0.0) {
            const double h = 0.5 * (log_p[b][y] - log_s);
            d += p[b][y] * h;
            gb += h * p[b][y] * (mean_z[b] - scaled[b][y]);
          }
        }
        divergence += d;
        if (want_grad) {
          grad[a] += ga * inv_items / z;
          grad[b] += gb * inv_items / z;
        }
      }
    }
  }

  const double penalty_weight = lambda_ * static_cast<double>(m_count - 1) / z;
  double penalty = 0.0;
  for (std::size_t m = 0; m < m_count; ++m) {
    penalty += penalty_weight * temps[m] * temps[m];
    if (want_grad) grad[m] += 2.0 * penalty_weight * temps[m] * temps[m];
  }
  return divergence * inv_items / z + penalty;
}

TemperatureSet fit_temperatures(const Ensemble& ensemble, const TemperatureConfig& config) {
  config.validate();
  ensemble.validate();
  if (ensemble.size() < 2) throw Error(ErrorCode::NeedsEnsemble, "temperature fitting needs at least 2 members");

  const TemperatureLoss loss(ensemble, config.lambda, config.epsilon);
  const std::size_t m_count = ensemble.size();
  const double lo = std::log(config.t_min);
  const double hi = std::log(config.t_max);
  auto project = [&](double x) { return std::clamp(x, lo, hi); };

  std::vector<double> tau(m_count, project(0.0));
  std::vector<double> grad(m_count);
  std::vector<double> trial(m_count);
  std::vector<double> trial_grad(m_count);

  TemperatureSet out;
  out.lambda = config.lambda;
  double current = loss(tau, grad);
  if (!std::isfinite(current)) throw Error(ErrorCode::NumericalFailure, "temperature loss is not finite");
  out.loss_trace.push_back(current);

  double step = config.lr;
  for (int s = 0; s < config.max_steps; ++s) {
    bool accepted = false;
    bool stalled = false;
    double value = current;
    while (!accepted) {
      bool moved = false;
      for (std::size_t m = 0; m < m_count; ++m) {
        trial[m] = project(tau[m] - step * grad[m]);
        moved = moved || trial[m] != tau[m];
      }
      if (!moved) {
        stalled = true;
        break;
      }
      value = loss(trial, trial_grad);
      if (!std::isfinite(value)) throw Error(ErrorCode::NumericalFailure, "temperature loss is not finite");
      if (value <= current) {
        accepted = true;
      } else {
        step *= 0.5;
        if (step < 1e-16) {
          stalled = true;
          break;
        }
      }
    }
    if (stalled) break;

    const double improvement = current - value;
    tau.swap(trial);
    grad.swap(trial_grad);
    current = value;
    out.loss_trace.push_back(current);
    out.steps = s + 1;
    step *= 1.5;
    if (improvement < config.tol) break;
  }

  out.temps.resize(m_count);
  for (std::size_t m = 0; m < m_count; ++m) out.temps[m] = std::clamp(std::exp(tau[m]), config.t_min, config.t_max);
  return out;
}

SoftLabelMatrix temperature_scale(const SoftLabelMatrix& member, double temperature, double epsilon) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidConfig, "temperature must be positive");
  auto out = like(member, member.method_name);
  if (temperature == 1.0) {
    out.rows = member.rows;
    return out;
  }
  for (const auto& row : member.rows) {
    auto z = geometry::smooth(row.probs(), epsilon);
    for (double& x : z) x = std::log(x) / temperature;
    log_softmax(z);
    for (double& x : z) x = std::exp(x);
    out.rows.push_back(renormalized(std::move(z)));
  }
  return out;
}

Ensemble temperature_scale(const Ensemble& ensemble, const TemperatureSet& temps, double epsilon) {
  ensemble.validate();
  if (temps.temps.size() != ensemble.size()) {
    throw Error(ErrorCode::EnsembleMismatch, std::to_string(temps.temps.size()) + " temperatures for " +
                                                 std::to_string(ensemble.size()) + " members");
  }
  Ensemble scaled;
  for (std::size_t m = 0; m < ensemble.size(); ++m) {
    scaled.members.push_back(temperature_scale(ensemble.members[m], temps.temps[m], epsilon));
  }
  return scaled;
}

SoftLabelMatrix aggregate_temperature(const Ensemble& ensemble, const TemperatureSet& temps, double epsilon) {
  auto out = aggregate_average(temperature_scale(ensemble, temps, epsilon));
  out.method_name = "temperature";
  return out;
}

SoftLabelMatrix aggregate_hybrid(const Ensemble& ensemble, const TemperatureSet& temps, const CentroidConfig& config) {
  auto out = js_centroid(temperature_scale(ensemble, temps, config.epsilon), config);
  out.method_name = "hybrid";
  return out;
}

}  // namespace crowdsoft

#include "crowdsoft/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "crowdsoft/detail/random.hpp"
#include "crowdsoft/info_geometry.hpp"

namespace crowdsoft {
namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

F1Result score_label(std::span<const std::size_t> pred, std::span<const std::size_t> gold, std::size_t label) {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == label;
    const bool g = gold[i] == label;
    tp += static_cast<double>(p && g);
    fp += static_cast<double>(p && !g);
    fn += static_cast<double>(!p && g);
  }
  F1Result r;
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  r.f1 = ratio(2.0 * r.precision * r.recall, r.precision + r.recall);
  return r;
}

// Running mean: exact when every value is identical.
class RunningMean {
 public:
  void add(double x) {
    ++n_;
    mean_ += (x - mean_) / static_cast<double>(n_);
  }
  double value() const { return mean_; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
};

double nll(std::span<const double> logits, std::size_t gold, double temperature) {
  double top = -std::numeric_limits<double>::infinity();
  for (double l : logits) top = std::max(top, l / temperature);
  double total = 0.0;
  for (double l : logits) total += std::exp(l / temperature - top);
  return top + std::log(total) - logits[gold] / temperature;
}

}  // namespace

F1Result f1_scores(std::span<const std::size_t> pred, std::span<const std::size_t> gold, F1Averaging averaging,
                   std::size_t positive_label) {
  if (pred.size() != gold.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(pred.size()) + " predictions vs " + std::to_string(gold.size()) + " gold labels");
  }
  if (averaging == F1Averaging::Binary) return score_label(pred, gold, positive_label);

  std::set<std::size_t> labels(pred.begin(), pred.end());
  labels.insert(gold.begin(), gold.end());
  F1Result mean;
  for (std::size_t label : labels) {
    const auto r = score_label(pred, gold, label);
    mean.precision += r.precision;
    mean.recall += r.recall;
    mean.f1 += r.f1;
  }
  if (!labels.empty()) {
    const auto n = static_cast<double>(labels.size());
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
  }
  return mean;
}

double accuracy_vs_gold(const SoftLabelMatrix& soft, const GoldLabels& gold) {
  std::size_t evaluated = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < soft.items(); ++i) {
    const auto label = gold.find(soft.item_ids.at(i));
    if (!label) continue;
    ++evaluated;
    correct += static_cast<std::size_t>(soft.rows[i].argmax() == *label);
  }
  if (evaluated == 0) throw Error(ErrorCode::EmptyEvaluation, "no soft-labeled item has a gold label");
  return static_cast<double>(correct) / static_cast<double>(evaluated);
}

PredictionSet PredictionSet::from_logits(std::vector<std::string> item_ids, std::vector<std::vector<double>> logits,
                                         const GoldLabels& gold) {
  if (item_ids.size() != logits.size()) throw Error(ErrorCode::LengthMismatch, "item ids vs logit rows");
  PredictionSet out;
  for (std::size_t i = 0; i < item_ids.size(); ++i) {
    const auto label = gold.find(item_ids[i]);
    if (!label) continue;
    if (*label >= logits[i].size()) throw Error(ErrorCode::LengthMismatch, "gold label beyond logit width");
    for (double l : logits[i]) {
      if (!std::isfinite(l)) throw Error(ErrorCode::NumericalFailure, "non-finite logit for '" + item_ids[i] + "'");
    }
    out.item_ids.push_back(std::move(item_ids[i]));
    out.logits.push_back(std::move(logits[i]));
    out.gold.push_back(*label);
  }
  if (out.item_ids.empty()) throw Error(ErrorCode::EmptyEvaluation, "no predicted item has a gold label");
  return out;
}

PredictionSet PredictionSet::from_soft_labels(const SoftLabelMatrix& soft, const GoldLabels& gold) {
  std::vector<std::vector<double>> logits;
  logits.reserve(soft.items());
  for (const auto& row : soft.rows) {
    auto l = geometry::smooth(row.probs());
    for (double& x : l) x = std::log(x);
    logits.push_back(std::move(l));
  }
  return from_logits(soft.item_ids, std::move(logits), gold);
}

double mean_nll(const PredictionSet& predictions, std::span<const std::size_t> items, double temperature) {
  RunningMean mean;
  for (std::size_t i : items) mean.add(nll(predictions.logits[i], predictions.gold[i], temperature));
  return mean.value();
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

CllResult calibrated_log_likelihood(const PredictionSet& predictions, const CllConfig& config) {
  const std::size_t n = predictions.size();
  if (n < 2) throw Error(ErrorCode::EmptyEvaluation, "calibrated log-likelihood needs at least 2 items");
  if (config.splits < 1) throw Error(ErrorCode::InvalidConfig, "splits must be at least 1");
  if (!(config.t_lo > 0.0) || !(config.t_hi > config.t_lo)) {
    throw Error(ErrorCode::InvalidConfig, "temperature search needs 0 < t_lo < t_hi");
  }

  detail::Rng rng(config.seed);
  const std::size_t n_validation = (n + 1) / 2;
  CllResult result;
  RunningMean overall;
  for (int s = 0; s < config.splits; ++s) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));

    CllSplit split;
    split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_validation));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_validation), order.end());
    const double log_t = golden_section_minimize(
        [&](double x) { return mean_nll(predictions, split.validation, std::exp(x)); }, std::log(config.t_lo),
        std::log(config.t_hi), config.search_tol);
    split.temperature = std::exp(log_t);
    split.test_nll = mean_nll(predictions, split.test, split.temperature);
    if (!std::isfinite(split.test_nll)) throw Error(ErrorCode::NumericalFailure, "non-finite calibrated NLL");
    overall.add(split.test_nll);
    result.splits.push_back(std::move(split));
  }
  result.value = overall.value();
  return result;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "pearson inputs differ in length");
  if (x.size() < 2) throw Error(ErrorCode::DegenerateInput, "pearson needs at least 2 points");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorCode::DegenerateInput, "pearson input is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

JsdMatrix pairwise_jsd_matrix(const Ensemble& ensemble, std::span<const SoftLabelMatrix> extra) {
  Ensemble all = ensemble;
  all.members.insert(all.members.end(), extra.begin(), extra.end());
  all.validate();

  const std::size_t m = all.size();
  const auto items = static_cast<double>(all.items());
  JsdMatrix out;
  out.values.assign(m, std::vector<double>(m, 0.0));
  for (const auto& member : all.members) out.names.push_back(member.method_name);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      double sum = 0.0;
      for (std::size_t i = 0; i < all.items(); ++i) {
        sum += geometry::js_divergence(all.members[a].rows[i], all.members[b].rows[i]);
      }
      out.values[a][b] = out.values[b][a] = sum / items;
    }
  }
  return out;
}

ProximityReport centroid_proximity(const Ensemble& ensemble, const SoftLabelMatrix& reference) {
  ensemble.validate();
  if (ensemble.size() < 3) throw Error(ErrorCode::NeedsEnsemble, "proximity analysis needs at least 3 members");
  const std::size_t m = ensemble.size();
  const auto matrix = pairwise_jsd_matrix(ensemble, std::span<const SoftLabelMatrix>(&reference, 1));
  ProximityReport report;
  report.small_ensemble = m < 4;
  for (std::size_t a = 0; a < m; ++a) {
    report.names.push_back(ensemble.members[a].method_name);
    report.jsd_to_reference.push_back(matrix.values[a][m]);
    double others = 0.0;
    for (std::size_t b = 0; b < m; ++b) {
      if (b != a) others += matrix.values[a][b];
    }
    report.mean_jsd_to_others.push_back(others / static_cast<double>(m - 1));
  }
  report.pearson_r = pearson_correlation(report.jsd_to_reference, report.mean_jsd_to_others);
  return report;
}

}  // namespace crowdsoft

#include "crowdsoft/truth_inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crowdsoft/detail/random.hpp"
#include "crowdsoft/soft_labeling.hpp"

namespace crowdsoft {
namespace {

struct Vote {
  std::size_t annotator;
  std::size_t label;
};

std::vector<std::vector<Vote>> votes_by_item(const AnnotationSet& a) {
  std::vector<std::vector<Vote>> by_item(a.items().size());
  for (const auto& r : a.records()) by_item[r.item].push_back({r.annotator, r.label});
  return by_item;
}

// Normalizes log weights in place into probabilities; returns logsumexp.
double normalize_log(std::vector<double>& w) {
  const double top = *std::max_element(w.begin(), w.end());
  if (!std::isfinite(top)) throw Error(ErrorCode::NumericalFailure, "posterior has no finite mass");
  double total = 0.0;
  for (double& x : w) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : w) x /= total;
  return top + std::log(total);
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

// Terms of the log prior that are not constant; 0 * log(0) counts as 0.
double weighted_log(double weight, double x) { return weight == 0.0 ? 0.0 : weight * safe_log(x); }

SoftLabelMatrix to_soft_labels(const std::vector<std::vector<double>>& post, const AnnotationSet& a,
                               const std::string& name) {
  SoftLabelMatrix out;
  out.method_name = name;
  attach_metadata(out, a);
  out.rows.reserve(post.size());
  for (const auto& p : post) out.rows.emplace_back(p);
  return out;
}

void check_common(const AnnotationSet& a, int max_iters, double tol) {
  if (a.num_labels() < 2) throw Error(ErrorCode::InvalidVocabulary, "need at least 2 labels");
  if (max_iters < 1) throw Error(ErrorCode::InvalidConfig, "max_iters must be at least 1");
  if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidConfig, "tol must be non-negative");
}

}  // namespace

DawidSkeneModel dawid_skene_fit(const AnnotationSet& annotations, const DawidSkeneConfig& config) {
  check_common(annotations, config.max_iters, config.tol);
  if (!(config.smoothing >= 0.0)) throw Error(ErrorCode::InvalidConfig, "smoothing must be non-negative");

  const std::size_t n = annotations.items().size();
  const std::size_t k = annotations.num_labels();
  const std::size_t n_ann = annotations.annotators().size();
  const double s = config.smoothing;
  const auto by_item = votes_by_item(annotations);

  std::vector<std::vector<double>> post(n);
  {
    const auto init = standard_normalize(vote_counts(annotations));
    for (std::size_t i = 0; i < n; ++i) post[i].assign(init.rows[i].probs().begin(), init.rows[i].probs().end());
  }

  std::vector<double> prior(k);
  std::vector<std::vector<std::vector<double>>> confusion(n_ann, std::vector<std::vector<double>>(k, std::vector<double>(k)));

  DawidSkeneModel model;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    // M-step.
    std::fill(prior.begin(), prior.end(), s);
    for (auto& per_ann : confusion) {
      for (auto& row : per_ann) std::fill(row.begin(), row.end(), s);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) prior[c] += post[i][c];
      for (const auto& v : by_item[i]) {
        for (std::size_t c = 0; c < k; ++c) confusion[v.annotator][c][v.label] += post[i][c];
      }
    }
    double prior_total = 0.0;
    for (double x : prior) prior_total += x;
    for (double& x : prior) x /= prior_total;
    for (auto& per_ann : confusion) {
      for (auto& row : per_ann) {
        double total = 0.0;
        for (double x : row) total += x;
        // An annotator with no mass on a true class gets a uniform row.
        for (double& x : row) x = total > 0.0 ? x / total : 1.0 / static_cast<double>(k);
      }
    }

    // E-step.
    double objective = 0.0;
    double delta = 0.0;
    std::vector<double> w(k);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        w[c] = safe_log(prior[c]);
        for (const auto& v : by_item[i]) w[c] += safe_log(confusion[v.annotator][c][v.label]);
      }
      objective += normalize_log(w);
      for (std::size_t c = 0; c < k; ++c) delta = std::max(delta, std::abs(w[c] - post[i][c]));
      post[i] = w;
    }
    for (double x : prior) objective += weighted_log(s, x);
    for (const auto& per_ann : confusion) {
      for (const auto& row : per_ann) {
        for (double x : row) objective += weighted_log(s, x);
      }
    }

    model.log_likelihood_trace.push_back(objective);
    model.iterations = iter;
    if (delta < config.tol) {
      model.converged = true;
      break;
    }
  }

  model.labels = annotations.vocabulary().labels();
  model.annotators = annotations.annotators();
  model.class_prior = Distribution(prior);
  model.confusion = std::move(confusion);
  model.posteriors = to_soft_labels(post, annotations, "ds");
  return model;
}

namespace {

struct MaceRun {
  std::vector<double> trust;
  std::vector<std::vector<double>> spam;
  std::vector<std::vector<double>> post;
  std::vector<double> trace;
};

// One EM run from the given initial parameters.
void run_mace(MaceRun& run, const std::vector<std::vector<Vote>>& by_item, std::size_t k, const MaceConfig& cfg) {
  const std::size_t n = by_item.size();
  const std::size_t n_ann = run.trust.size();
  const double log_uniform = -std::log(static_cast<double>(k));
  run.post.assign(n, std::vector<double>(k));

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // E-step at the current parameters.
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto& w = run.post[i];
      for (std::size_t c = 0; c < k; ++c) {
        w[c] = log_uniform;
        for (const auto& v : by_item[i]) {
          const double th = run.trust[v.annotator];
          const double emit = (1.0 - th) * run.spam[v.annotator][v.label] + (c == v.label ? th : 0.0);
          w[c] += safe_log(emit);
        }
      }
      objective += normalize_log(w);
    }
    for (std::size_t j = 0; j < n_ann; ++j) {
      objective += weighted_log(cfg.smoothing_alpha, run.trust[j]) + weighted_log(cfg.smoothing_beta, 1.0 - run.trust[j]);
      for (double x : run.spam[j]) objective += weighted_log(cfg.spam_smoothing, x);
    }
    const bool done = !run.trace.empty() && objective - run.trace.back() < cfg.tol;
    run.trace.push_back(objective);
    if (done || iter + 1 == cfg.max_iters) break;

    // M-step from expected faithful / spam counts.
    std::vector<double> faithful(n_ann, 0.0);
    std::vector<double> total(n_ann, 0.0);
    std::vector<std::vector<double>> spam_counts(n_ann, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& v : by_item[i]) {
        const double th = run.trust[v.annotator];
        const double honest = th + (1.0 - th) * run.spam[v.annotator][v.label];
        const double p_faithful = honest > 0.0 ? run.post[i][v.label] * th / honest : 0.0;
        faithful[v.annotator] += p_faithful;
        total[v.annotator] += 1.0;
        spam_counts[v.annotator][v.label] += 1.0 - p_faithful;
      }
    }
    for (std::size_t j = 0; j < n_ann; ++j) {
      const double denom = total[j] + cfg.smoothing_alpha + cfg.smoothing_beta;
      run.trust[j] = denom > 0.0 ? (faithful[j] + cfg.smoothing_alpha) / denom : 0.5;
      double spam_total = 0.0;
      for (double& x : spam_counts[j]) {
        x += cfg.spam_smoothing;
        spam_total += x;
      }
      for (std::size_t y = 0; y < k; ++y) {
        run.spam[j][y] = spam_total > 0.0 ? spam_counts[j][y] / spam_total : 1.0 / static_cast<double>(k);
      }
    }
  }
}

}  // namespace

MaceModel mace_fit(const AnnotationSet& annotations, const MaceConfig& config) {
  check_common(annotations, config.max_iters, config.tol);
  if (config.restarts < 1) throw Error(ErrorCode::InvalidConfig, "restarts must be at least 1");
  if (!(config.smoothing_alpha >= 0.0) || !(config.smoothing_beta >= 0.0) || !(config.spam_smoothing >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "smoothing pseudo-counts must be non-negative");
  }

  const std::size_t k = annotations.num_labels();
  const std::size_t n_ann = annotations.annotators().size();
  const auto by_item = votes_by_item(annotations);
  detail::Rng rng(config.seed);

  MaceModel model;
  MaceRun best;
  for (int r = 0; r < config.restarts; ++r) {
    MaceRun run;
    run.trust.resize(n_ann);
    for (double& t : run.trust) t = rng.uniform(0.4, 0.9);
    run.spam.assign(n_ann, std::vector<double>(k, 1.0 / static_cast<double>(k)));
    run_mace(run, by_item, k, config);
    model.restart_objectives.push_back(run.trace.back());
    if (r == 0 || run.trace.back() > best.trace.back()) {
      best = std::move(run);
      model.best_restart = r;
    }
  }

  model.labels = annotations.vocabulary().labels();
  model.annotators = annotations.annotators();
  model.trust = std::move(best.trust);
  for (auto& s : best.spam) model.spam_strategy.emplace_back(std::move(s));
  model.posteriors = to_soft_labels(best.post, annotations, "mace");
  model.objective_trace = std::move(best.trace);
  return model;
}

}  // namespace crowdsoft

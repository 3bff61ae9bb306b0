#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crowdsoft/annotation_model.hpp"

// Latent-truth annotator models fitted by EM. The per-item posterior over
// the true class is returned as the soft label. Missing (item, annotator)
// pairs are unobserved and contribute nothing to the likelihood.
namespace crowdsoft {

struct DawidSkeneConfig {
  int max_iters = 100;
  // Stop once no posterior entry moves by more than this.
  double tol = 1e-6;
  // Additive pseudo-count in the prior and confusion updates.
  double smoothing = 0.01;
};

struct DawidSkeneModel {
  std::vector<std::string> labels;
  std::vector<std::string> annotators;
  Distribution class_prior;
  // confusion[j][k][y]: probability annotator j emits y when the truth is k.
  std::vector<std::vector<std::vector<double>>> confusion;
  SoftLabelMatrix posteriors;
  // Smoothed log-likelihood (log-likelihood plus the log density of the
  // Dirichlet prior implied by `smoothing`) after each M-step. EM never
  // decreases it.
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
};

// Initial posteriors are the standard-normalized votes.
DawidSkeneModel dawid_skene_fit(const AnnotationSet& annotations, const DawidSkeneConfig& config = {});

struct MaceConfig {
  int max_iters = 50;
  // Stop a restart once the objective improves by less than this.
  double tol = 1e-6;
  int restarts = 10;
  // Pseudo-counts on the faithful / spamming outcomes of each annotator.
  double smoothing_alpha = 0.5;
  double smoothing_beta = 0.5;
  // Pseudo-count on each label of a spamming strategy.
  double spam_smoothing = 0.1;
  std::uint64_t seed = 0;
};

struct MaceModel {
  std::vector<std::string> labels;
  std::vector<std::string> annotators;
  // Probability each annotator reports the true label rather than spamming.
  std::vector<double> trust;
  std::vector<Distribution> spam_strategy;
  SoftLabelMatrix posteriors;
  // Smoothed objective per iteration of the selected restart.
  std::vector<double> objective_trace;
  // Final objective of every restart; the best one is kept.
  std::vector<double> restart_objectives;
  int best_restart = 0;
};

// Truth is uniform over K; each annotation is the truth with probability
// trust_j, otherwise a draw from spam_strategy_j. Restarts draw initial
// trust uniformly from [0.4, 0.9]; spam strategies start uniform.
MaceModel mace_fit(const AnnotationSet& annotations, const MaceConfig& config = {});

}  // namespace crowdsoft

#pragma once

#include <span>
#include <string>
#include <vector>

#include "crowdsoft/annotation_model.hpp"
#include "crowdsoft/info_geometry.hpp"

// Per-item aggregation of M soft-label matrices into one.
namespace crowdsoft {

// M soft-label matrices over the same items (same order) and labels.
struct Ensemble {
  std::vector<SoftLabelMatrix> members;

  std::size_t size() const noexcept { return members.size(); }
  std::size_t items() const { return members.front().items(); }
  std::size_t num_labels() const { return members.front().rows.front().size(); }

  // Throws NeedsEnsemble when empty and EnsembleMismatch, with a short
  // description of the first difference, when members disagree.
  void validate() const;
};

// f_a: the per-item arithmetic mean of the members.
SoftLabelMatrix aggregate_average(const Ensemble& ensemble);

struct CentroidConfig {
  int max_iters = 1000;
  // Stop once no natural-parameter component moves by more than this.
  double tol = 1e-10;
  // Members are smoothed by this much before the natural-parameter map.
  double epsilon = geometry::kDefaultSmoothing;
};

struct CentroidResult {
  std::vector<double> centroid;
  // Sum_m JS(p_m || q) at the starting point and after every update.
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
};

// Sum_m JS(p_m || q).
double js_objective(std::span<const std::vector<double>> members, std::span<const double> q);

// Jensen-Shannon centroid of one item's member distributions by the
// concave-convex procedure, started from their arithmetic mean:
//   theta <- (grad F)^{-1}( mean_m grad F((theta_m + theta) / 2) )
// where F is the negative entropy in natural parameters. Members are
// smoothed first. Throws NumericalFailure on non-finite iterates.
CentroidResult js_centroid_item(std::span<const std::vector<double>> members, const CentroidConfig& config = {});

// f_c: the per-item Jensen-Shannon centroid.
SoftLabelMatrix js_centroid(const Ensemble& ensemble, const CentroidConfig& config = {});

struct TemperatureConfig {
  double lambda = 0.01;
  // Initial step on log T; grown after accepted steps, halved on increases.
  double lr = 0.1;
  int max_steps = 1000;
  // Stop once an accepted step lowers the loss by less than this.
  double tol = 1e-8;
  double t_min = 0.05;
  double t_max = 100.0;
  // Smoothing applied before taking log-probabilities.
  double epsilon = geometry::kDefaultSmoothing;

  void validate() const;
};

struct TemperatureSet {
  std::vector<double> temps;
  double lambda = 0.0;
  // Loss at the start and after every accepted step; non-increasing.
  std::vector<double> loss_trace;
  int steps = 0;

  double final_loss() const { return loss_trace.back(); }
};

// Item-averaged pairwise temperature loss
//   L = (1/Z) Sum_{j<k} [ JS(p~_j || p~_k) + lambda (T_j^2 + T_k^2) ],
//   p~_m = softmax(log(smooth(p_m)) / T_m),  Z = M(M-1)/2,
// so every T_m carries penalty lambda (M-1)/Z T_m^2. Evaluated as a function
// of tau_m = log T_m.
class TemperatureLoss {
 public:
  TemperatureLoss(const Ensemble& ensemble, double lambda, double epsilon = geometry::kDefaultSmoothing);

  std::size_t members() const noexcept { return log_probs_.size(); }

  // Loss at log-temperatures `tau`. When `grad` is non-empty it receives
  // dL/dtau (same length as tau).
  double operator()(std::span<const double> tau, std::span<double> grad = {}) const;

 private:
  // log_probs_[m][i] is the smoothed log-probability vector of member m, item i.
  std::vector<std::vector<std::vector<double>>> log_probs_;
  double lambda_;
};

// Minimizes TemperatureLoss by projected gradient descent on log T within
// [log t_min, log t_max], starting from T = 1 (clamped into range).
// Throws NeedsEnsemble when M < 2.
TemperatureSet fit_temperatures(const Ensemble& ensemble, const TemperatureConfig& config = {});

// softmax(log(smooth(p)) / temperature), row by row. T = 1 returns the
// member unchanged.
SoftLabelMatrix temperature_scale(const SoftLabelMatrix& member, double temperature,
                                  double epsilon = geometry::kDefaultSmoothing);
Ensemble temperature_scale(const Ensemble& ensemble, const TemperatureSet& temps,
                           double epsilon = geometry::kDefaultSmoothing);

// f_t: the average of the temperature-scaled members.
SoftLabelMatrix aggregate_temperature(const Ensemble& ensemble, const TemperatureSet& temps,
                                      double epsilon = geometry::kDefaultSmoothing);

// f_h: the Jensen-Shannon centroid of the temperature-scaled members.
SoftLabelMatrix aggregate_hybrid(const Ensemble& ensemble, const TemperatureSet& temps,
                                 const CentroidConfig& config = {});

}  // namespace crowdsoft

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "crowdsoft/aggregation.hpp"
#include "crowdsoft/annotation_model.hpp"

namespace crowdsoft {

enum class F1Averaging { Binary, Macro };

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision/recall/F1 with 0/0 taken as 0. Binary scores `positive_label`;
// macro is the unweighted mean over every label seen in pred or gold.
// Throws LengthMismatch.
F1Result f1_scores(std::span<const std::size_t> pred, std::span<const std::size_t> gold, F1Averaging averaging,
                   std::size_t positive_label = 1);

// Fraction of gold-labeled items whose soft-label argmax (lowest index on
// ties) equals the gold label. Throws EmptyEvaluation if no item has gold.
double accuracy_vs_gold(const SoftLabelMatrix& soft, const GoldLabels& gold);

// Classifier logits with a gold label for every item.
struct PredictionSet {
  std::vector<std::string> item_ids;
  std::vector<std::vector<double>> logits;
  std::vector<std::size_t> gold;

  // Keeps only items that have gold; throws EmptyEvaluation if none do.
  static PredictionSet from_logits(std::vector<std::string> item_ids, std::vector<std::vector<double>> logits,
                                   const GoldLabels& gold);
  // Uses log(smooth(p)) of every row as logits.
  static PredictionSet from_soft_labels(const SoftLabelMatrix& soft, const GoldLabels& gold);

  std::size_t size() const noexcept { return item_ids.size(); }
};

// Mean over `items` of -log softmax(l_i / T)[gold_i].
double mean_nll(const PredictionSet& predictions, std::span<const std::size_t> items, double temperature);

// Minimizer of a unimodal f over [lo, hi], to within `tol` in x.
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol);

struct CllConfig {
  int splits = 5;
  std::uint64_t seed = 0;
  double t_lo = 0.01;
  double t_hi = 100.0;
  // Golden-section tolerance on log T.
  double search_tol = 1e-4;
};

struct CllSplit {
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  double temperature = 1.0;
  double test_nll = 0.0;
};

struct CllResult {
  // Mean test-half NLL at the fitted temperature; lower is better.
  double value = 0.0;
  std::vector<CllSplit> splits;
};

// Calibrated log-likelihood: per seeded split, half the items (the extra
// one on odd counts) fit the temperature by minimizing NLL and the other
// half is scored at that temperature. Throws EmptyEvaluation below 2 items.
CllResult calibrated_log_likelihood(const PredictionSet& predictions, const CllConfig& config = {});

// Throws LengthMismatch, or DegenerateInput for a constant input.
double pearson_correlation(std::span<const double> x, std::span<const double> y);

struct JsdMatrix {
  std::vector<std::string> names;
  // values[a][b]: mean over items of JS(row_a || row_b).
  std::vector<std::vector<double>> values;
};

// Ensemble members first, then `extra`, in order.
JsdMatrix pairwise_jsd_matrix(const Ensemble& ensemble, std::span<const SoftLabelMatrix> extra = {});

struct ProximityReport {
  std::vector<std::string> names;
  // Mean over items of JS(q || p_m).
  std::vector<double> jsd_to_reference;
  // Mean over items and other members k of JS(p_m || p_k).
  std::vector<double> mean_jsd_to_others;
  double pearson_r = 0.0;
  // Fewer than 4 members makes the correlation fragile.
  bool small_ensemble = false;
};

// Throws NeedsEnsemble for M < 3 and DegenerateInput if either vector is
// constant.
ProximityReport centroid_proximity(const Ensemble& ensemble, const SoftLabelMatrix& reference);

}  // namespace crowdsoft

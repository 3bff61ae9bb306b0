#include "crowdsoft/soft_labeling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crowdsoft {

SoftLabelMatrix standard_normalize(const VoteMatrix& votes) {
  SoftLabelMatrix out;
  out.method_name = "standard";
  out.rows.reserve(votes.items());
  for (std::size_t i = 0; i < votes.items(); ++i) {
    const auto total = static_cast<double>(votes.row_sum(i));
    if (total == 0.0) throw Error(ErrorCode::EmptyItem, "item row " + std::to_string(i) + " has no votes");
    std::vector<double> probs;
    probs.reserve(votes.labels());
    for (auto c : votes.row(i)) probs.push_back(static_cast<double>(c) / total);
    out.rows.emplace_back(std::move(probs));
  }
  return out;
}

SoftLabelMatrix softmax_normalize(const VoteMatrix& votes) {
  SoftLabelMatrix out;
  out.method_name = "softmax";
  out.rows.reserve(votes.items());
  for (std::size_t i = 0; i < votes.items(); ++i) {
    auto row = votes.row(i);
    const double top = static_cast<double>(*std::max_element(row.begin(), row.end()));
    std::vector<double> probs;
    probs.reserve(row.size());
    double total = 0.0;
    for (auto c : row) {
      probs.push_back(std::exp(static_cast<double>(c) - top));
      total += probs.back();
    }
    // Keep zero-vote labels strictly positive even when exp underflows.
    for (double& p : probs) p = std::max(p / total, std::numeric_limits<double>::min());
    out.rows.emplace_back(std::move(probs));
  }
  return out;
}

void attach_metadata(SoftLabelMatrix& soft, const AnnotationSet& annotations) {
  soft.labels = annotations.vocabulary().labels();
  soft.item_ids = annotations.items();
}

SoftLabelMatrix standard_normalize(const AnnotationSet& annotations) {
  auto out = standard_normalize(vote_counts(annotations));
  attach_metadata(out, annotations);
  return out;
}

SoftLabelMatrix softmax_normalize(const AnnotationSet& annotations) {
  auto out = softmax_normalize(vote_counts(annotations));
  attach_metadata(out, annotations);
  return out;
}

}  // namespace crowdsoft

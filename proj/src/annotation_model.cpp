#include "crowdsoft/annotation_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crowdsoft {

LabelVocabulary::LabelVocabulary(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) {
    throw Error(ErrorCode::InvalidVocabulary,
                "need at least 2 labels, got " + std::to_string(labels_.size()));
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw Error(ErrorCode::InvalidVocabulary, "empty label string");
    if (!index_.emplace(labels_[i], i).second) {
      throw Error(ErrorCode::InvalidVocabulary, "duplicate label '" + labels_[i] + "'");
    }
  }
}

LabelVocabulary LabelVocabulary::lexicographic(const std::set<std::string>& observed) {
  return LabelVocabulary(std::vector<std::string>(observed.begin(), observed.end()));
}

std::optional<std::size_t> LabelVocabulary::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

AnnotationSetBuilder::AnnotationSetBuilder(LabelVocabulary fixed_vocabulary)
    : fixed_(std::move(fixed_vocabulary)) {}

void AnnotationSetBuilder::add(const std::string& item_id, const std::string& annotator_id,
                               const std::string& label) {
  if (item_id.empty() || annotator_id.empty() || label.empty()) {
    throw Error(ErrorCode::MalformedInput, "empty field in annotation record");
  }
  if (fixed_ && !fixed_->index_of(label)) {
    throw Error(ErrorCode::UnknownLabel, "label '" + label + "' is not in the vocabulary");
  }
  auto [item_it, item_new] = item_index_.try_emplace(item_id, items_.size());
  if (item_new) items_.push_back(item_id);
  auto [ann_it, ann_new] = annotator_index_.try_emplace(annotator_id, annotators_.size());
  if (ann_new) annotators_.push_back(annotator_id);

  if (!seen_.emplace(item_it->second, ann_it->second).second) {
    throw Error(ErrorCode::DuplicateAnnotation,
                "annotator '" + annotator_id + "' labeled item '" + item_id + "' twice");
  }
  observed_labels_.insert(label);
  raw_.push_back({item_it->second, ann_it->second, label});
}

AnnotationSet AnnotationSetBuilder::build() const {
  if (raw_.empty()) throw Error(ErrorCode::EmptyInput, "no annotation records");

  AnnotationSet set;
  set.vocabulary_ = fixed_ ? *fixed_ : LabelVocabulary::lexicographic(observed_labels_);
  set.items_ = items_;
  set.annotators_ = annotators_;
  set.records_.reserve(raw_.size());
  for (const auto& r : raw_) {
    set.records_.push_back({r.item, r.annotator, *set.vocabulary_.index_of(r.label)});
  }
  return set;
}

VoteMatrix::VoteMatrix(const std::vector<std::vector<std::uint32_t>>& rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "vote matrix has no rows");
  items_ = rows.size();
  labels_ = rows.front().size();
  counts_.reserve(items_ * labels_);
  for (const auto& r : rows) {
    if (r.size() != labels_) throw Error(ErrorCode::MalformedInput, "ragged vote matrix");
    counts_.insert(counts_.end(), r.begin(), r.end());
  }
}

VoteMatrix::VoteMatrix(std::size_t items, std::size_t labels, std::vector<std::uint32_t> counts)
    : items_(items), labels_(labels), counts_(std::move(counts)) {
  if (counts_.size() != items_ * labels_) throw Error(ErrorCode::MalformedInput, "vote matrix size mismatch");
}

std::uint64_t VoteMatrix::row_sum(std::size_t item) const {
  auto r = row(item);
  return std::accumulate(r.begin(), r.end(), std::uint64_t{0});
}

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (!is_valid(probs_)) throw Error(ErrorCode::NumericalFailure, "vector is not on the probability simplex");
}

bool Distribution::is_valid(std::span<const double> probs, double tolerance) {
  if (probs.empty()) return false;
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

std::size_t Distribution::argmax() const {
  return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

VoteMatrix vote_counts(const AnnotationSet& annotations) {
  const std::size_t k = annotations.num_labels();
  std::vector<std::uint32_t> counts(annotations.items().size() * k, 0);
  for (const auto& r : annotations.records()) ++counts[r.item * k + r.label];
  return VoteMatrix(annotations.items().size(), k, std::move(counts));
}

std::vector<std::size_t> majority_vote(const VoteMatrix& votes) {
  std::vector<std::size_t> out(votes.items());
  for (std::size_t i = 0; i < votes.items(); ++i) {
    auto r = votes.row(i);
    if (votes.row_sum(i) == 0) throw Error(ErrorCode::EmptyItem, "item row " + std::to_string(i) + " has no votes");
    // max_element returns the first maximum, which is the lowest index.
    out[i] = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

}  // namespace crowdsoft

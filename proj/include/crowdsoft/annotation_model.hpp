#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crowdsoft/error.hpp"

namespace crowdsoft {

// Fixed ordered set of class labels. Index i names label i everywhere.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  // Throws InvalidVocabulary on duplicates or fewer than two labels.
  explicit LabelVocabulary(std::vector<std::string> labels);

  // Sorted copy of the distinct labels in `observed`.
  static LabelVocabulary lexicographic(const std::set<std::string>& observed);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& operator[](std::size_t i) const { return labels_.at(i); }
  std::optional<std::size_t> index_of(const std::string& label) const;

  bool operator==(const LabelVocabulary& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct AnnotationRecord {
  std::size_t item;       // index into AnnotationSet::items()
  std::size_t annotator;  // index into AnnotationSet::annotators()
  std::size_t label;      // index into the vocabulary

  bool operator==(const AnnotationRecord&) const = default;
};

// Validated, immutable table of (item, annotator, label) records.
// Items and annotators keep first-appearance order.
class AnnotationSet {
 public:
  const LabelVocabulary& vocabulary() const noexcept { return vocabulary_; }
  std::size_t num_labels() const noexcept { return vocabulary_.size(); }
  const std::vector<std::string>& items() const noexcept { return items_; }
  const std::vector<std::string>& annotators() const noexcept { return annotators_; }
  const std::vector<AnnotationRecord>& records() const noexcept { return records_; }

  bool operator==(const AnnotationSet& other) const {
    return vocabulary_ == other.vocabulary_ && items_ == other.items_ &&
           annotators_ == other.annotators_ && records_ == other.records_;
  }

 private:
  friend class AnnotationSetBuilder;

  LabelVocabulary vocabulary_;
  std::vector<std::string> items_;
  std::vector<std::string> annotators_;
  std::vector<AnnotationRecord> records_;
};

// Accumulates raw string records. When no vocabulary is given, the
// vocabulary is the lexicographically sorted set of observed labels.
class AnnotationSetBuilder {
 public:
  AnnotationSetBuilder() = default;
  explicit AnnotationSetBuilder(LabelVocabulary fixed_vocabulary);

  // Throws DuplicateAnnotation or UnknownLabel.
  void add(const std::string& item_id, const std::string& annotator_id, const std::string& label);

  // Throws EmptyInput when nothing was added, InvalidVocabulary when the
  // inferred vocabulary has fewer than two labels.
  AnnotationSet build() const;

 private:
  struct Raw {
    std::size_t item;
    std::size_t annotator;
    std::string label;
  };

  std::optional<LabelVocabulary> fixed_;
  std::vector<std::string> items_;
  std::vector<std::string> annotators_;
  std::unordered_map<std::string, std::size_t> item_index_;
  std::unordered_map<std::string, std::size_t> annotator_index_;
  std::set<std::pair<std::size_t, std::size_t>> seen_;
  std::set<std::string> observed_labels_;
  std::vector<Raw> raw_;
};

// items x K matrix of vote counts. Rows built from an AnnotationSet always
// hold at least one vote; hand-built rows may be empty, and consumers that
// need a vote throw EmptyItem.
class VoteMatrix {
 public:
  VoteMatrix() = default;
  // Throws MalformedInput on ragged rows, EmptyInput when there are none.
  explicit VoteMatrix(const std::vector<std::vector<std::uint32_t>>& rows);
  VoteMatrix(std::size_t items, std::size_t labels, std::vector<std::uint32_t> counts);

  std::size_t items() const noexcept { return items_; }
  std::size_t labels() const noexcept { return labels_; }
  std::uint32_t operator()(std::size_t item, std::size_t label) const { return counts_[item * labels_ + label]; }
  std::span<const std::uint32_t> row(std::size_t item) const {
    return {counts_.data() + item * labels_, labels_};
  }
  std::uint64_t row_sum(std::size_t item) const;

 private:
  std::size_t items_ = 0;
  std::size_t labels_ = 0;
  std::vector<std::uint32_t> counts_;
};

// Partial map item_id -> gold label index.
struct GoldLabels {
  std::map<std::string, std::size_t> by_item;

  std::optional<std::size_t> find(const std::string& item_id) const {
    auto it = by_item.find(item_id);
    if (it == by_item.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const noexcept { return by_item.size(); }
};

inline constexpr double kSimplexTolerance = 1e-8;

// A point on the probability simplex.
class Distribution {
 public:
  Distribution() = default;
  // Throws NumericalFailure if entries are negative, non-finite, or do not
  // sum to one within kSimplexTolerance.
  explicit Distribution(std::vector<double> probs);

  static bool is_valid(std::span<const double> probs, double tolerance = kSimplexTolerance);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  // Lowest index among the maximal entries.
  std::size_t argmax() const;

  bool operator==(const Distribution&) const = default;

 private:
  std::vector<double> probs_;
};

// One soft label per item, produced by a single labeling method.
struct SoftLabelMatrix {
  std::string method_name;
  std::vector<std::string> labels;
  std::vector<std::string> item_ids;
  std::vector<Distribution> rows;

  std::size_t items() const noexcept { return rows.size(); }
  std::size_t num_labels() const noexcept { return labels.size(); }
};

VoteMatrix vote_counts(const AnnotationSet& annotations);

// Per item, the label with the most votes; ties go to the lowest index.
std::vector<std::size_t> majority_vote(const VoteMatrix& votes);

}  // namespace crowdsoft

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "crowdsoft/annotation_model.hpp"

// Synthetic crowds with planted truth, for testing truth inference and the
// end-to-end pipeline.
namespace crowdsoft {

// Emits the truth with probability `accuracy`, otherwise a uniformly chosen
// wrong label.
struct FaithfulRole {
  double accuracy = 1.0;
};

// Emits from a fixed strategy regardless of the truth.
struct SpammerRole {
  std::vector<double> strategy;
};

using AnnotatorRole = std::variant<FaithfulRole, SpammerRole>;

struct CrowdSpec {
  std::size_t n_items = 0;
  std::size_t num_labels = 0;
  std::vector<AnnotatorRole> annotators;
  // Uniform when empty.
  std::vector<double> class_prior;
  // Probability that a given annotator labels a given item.
  double coverage = 1.0;
  std::uint64_t seed = 0;
  // Label names; defaults to A, B, ... (or L00, L01, ... beyond 26 labels).
  std::vector<std::string> labels;

  // Throws InvalidConfig naming the offending field.
  void validate() const;
  LabelVocabulary vocabulary() const;
};

struct SyntheticCrowd {
  AnnotationSet annotations;
  GoldLabels truth;
};

// Items are `item00`, ... and annotators `ann00`, ..., zero-padded to the
// width of the largest index (at least two digits); records are
// emitted item by item. Items left unlabeled by the coverage draw are
// redrawn until at least one annotator covers them.
SyntheticCrowd generate_crowd(const CrowdSpec& spec);

}  // namespace crowdsoft

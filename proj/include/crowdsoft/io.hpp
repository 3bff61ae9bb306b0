#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crowdsoft/annotation_model.hpp"

namespace crowdsoft {

enum class AnnotationFormat { LongCsv, Json };

// Parses "long_csv" / "csv" / "json"; throws InvalidConfig otherwise.
AnnotationFormat parse_annotation_format(const std::string& name);

// Long CSV: header `item_id,annotator_id,label`, one record per line.
// JSON: either an array of {item_id, annotator_id, label} objects or an
// object {"labels": [...]?, "annotations": [...]}; a "labels" entry fixes
// the vocabulary unless `vocabulary` is given.
// Errors carry `path:line` context where a line is known.
AnnotationSet load_annotations(const std::filesystem::path& path, AnnotationFormat format,
                               const std::optional<LabelVocabulary>& vocabulary = std::nullopt);
AnnotationSet parse_annotations_csv(std::istream& in, const std::string& source_name,
                                    const std::optional<LabelVocabulary>& vocabulary = std::nullopt);
void write_annotations_csv(std::ostream& out, const AnnotationSet& annotations);

// One label per line; blank lines are skipped.
LabelVocabulary load_vocabulary(const std::filesystem::path& path);
void write_vocabulary(std::ostream& out, const LabelVocabulary& vocabulary);

// Gold CSV: header `item_id,label`.
GoldLabels load_gold(const std::filesystem::path& path, const LabelVocabulary& vocabulary);
void write_gold_csv(std::ostream& out, const GoldLabels& gold, const std::vector<std::string>& item_order,
                    const LabelVocabulary& vocabulary);

// Soft-label CSV: header `item_id,p_<label1>,...,p_<labelK>`, values with
// 12 significant digits. The method name is taken from the file stem.
void write_soft_labels_csv(std::ostream& out, const SoftLabelMatrix& soft);
SoftLabelMatrix read_soft_labels_csv(std::istream& in, const std::string& source_name,
                                     const std::string& method_name);
SoftLabelMatrix load_soft_labels(const std::filesystem::path& path);
void save_soft_labels(const std::filesystem::path& path, const SoftLabelMatrix& soft);

// Classifier outputs: header `item_id,l_<label1>,...`, finite reals
// written with 17 significant digits.
struct LogitTable {
  std::vector<std::string> labels;
  std::vector<std::string> item_ids;
  std::vector<std::vector<double>> logits;
};
LogitTable load_logits(const std::filesystem::path& path);
void write_logits_csv(std::ostream& out, const LogitTable& table);

// Splits one CSV line; supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

// `%.12g`, the precision of soft-label files.
std::string format_probability(double value);

}  // namespace crowdsoft

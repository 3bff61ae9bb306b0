#include "crowdsoft/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace crowdsoft {
namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  return in;
}

std::string context(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

// Reads a line without its terminator; drops a trailing CR and a leading BOM.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  if (!std::getline(in, line)) return false;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  return true;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t") == std::string::npos;
}

std::string quote_csv(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

double parse_real(const std::string& cell, const std::string& where) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::MalformedInput, where + "'" + cell + "' is not a number");
  }
  if (used != cell.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::MalformedInput, where + "'" + cell + "' is not a finite number");
  }
  return value;
}

// Rethrows a library error with file/line context, keeping its code.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& where) {
  std::string msg = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  throw Error(e.code(), where + msg);
}

// Reads a header row of the form `item_id,<prefix><label>,...`.
std::vector<std::string> read_prefixed_header(const std::vector<std::string>& header, const std::string& prefix,
                                              const std::string& where) {
  if (header.size() < 3 || header[0] != "item_id") {
    throw Error(ErrorCode::MalformedInput,
                where + "expected header `item_id," + prefix + "<label>,...` with at least two labels");
  }
  std::vector<std::string> labels;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].rfind(prefix, 0) != 0 || header[c].size() == prefix.size()) {
      throw Error(ErrorCode::MalformedInput, where + "column '" + header[c] + "' lacks prefix '" + prefix + "'");
    }
    labels.push_back(header[c].substr(prefix.size()));
  }
  return labels;
}

std::string format_with(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, value);
  return buf;
}

AnnotationSet parse_annotations_json(const json& doc, const std::string& source,
                                     const std::optional<LabelVocabulary>& vocabulary) {
  const json* records = &doc;
  std::optional<LabelVocabulary> vocab = vocabulary;
  if (doc.is_object()) {
    if (!doc.contains("annotations")) {
      throw Error(ErrorCode::MalformedInput, source + ": missing \"annotations\" array");
    }
    records = &doc.at("annotations");
    if (!vocab && doc.contains("labels")) {
      vocab = LabelVocabulary(doc.at("labels").get<std::vector<std::string>>());
    }
  }
  if (!records->is_array()) throw Error(ErrorCode::MalformedInput, source + ": annotations must be an array");
  if (records->empty()) throw Error(ErrorCode::EmptyInput, source + ": no annotation records");

  AnnotationSetBuilder builder = vocab ? AnnotationSetBuilder(*vocab) : AnnotationSetBuilder();
  std::size_t index = 0;
  for (const auto& rec : *records) {
    const std::string where = source + "[" + std::to_string(index++) + "]: ";
    try {
      builder.add(rec.at("item_id").get<std::string>(), rec.at("annotator_id").get<std::string>(),
                  rec.at("label").get<std::string>());
    } catch (const Error& e) {
      rethrow_with_context(e, where);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedInput, where + e.what());
    }
  }
  return builder.build();
}

}  // namespace

AnnotationFormat parse_annotation_format(const std::string& name) {
  if (name == "long_csv" || name == "csv") return AnnotationFormat::LongCsv;
  if (name == "json") return AnnotationFormat::Json;
  throw Error(ErrorCode::InvalidConfig, "unknown annotation format '" + name + "' (expected long_csv or json)");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw Error(ErrorCode::MalformedInput, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string format_probability(double value) { return format_with("%.12g", value); }

AnnotationSet parse_annotations_csv(std::istream& in, const std::string& source_name,
                                    const std::optional<LabelVocabulary>& vocabulary) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw Error(ErrorCode::EmptyInput, source_name + ": file is empty");
  if (split_csv_line(line) != std::vector<std::string>{"item_id", "annotator_id", "label"}) {
    throw Error(ErrorCode::MalformedInput, context(source_name, line_no) + "expected header `item_id,annotator_id,label`");
  }

  AnnotationSetBuilder builder = vocabulary ? AnnotationSetBuilder(*vocabulary) : AnnotationSetBuilder();
  std::size_t count = 0;
  while (next_line(in, line, line_no)) {
    if (is_blank(line)) continue;
    const std::string where = context(source_name, line_no);
    try {
      auto fields = split_csv_line(line);
      if (fields.size() != 3) {
        throw Error(ErrorCode::MalformedInput, "expected 3 fields, got " + std::to_string(fields.size()));
      }
      builder.add(fields[0], fields[1], fields[2]);
    } catch (const Error& e) {
      rethrow_with_context(e, where);
    }
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::EmptyInput, source_name + ": no annotation records");
  try {
    return builder.build();
  } catch (const Error& e) {
    rethrow_with_context(e, source_name + ": ");
  }
}

AnnotationSet load_annotations(const std::filesystem::path& path, AnnotationFormat format,
                               const std::optional<LabelVocabulary>& vocabulary) {
  auto in = open_input(path);
  const std::string source = path.string();
  if (format == AnnotationFormat::LongCsv) return parse_annotations_csv(in, source, vocabulary);

  std::stringstream buffer;
  buffer << in.rdbuf();
  if (is_blank(buffer.str())) throw Error(ErrorCode::EmptyInput, source + ": file is empty");
  json doc;
  try {
    doc = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedInput, source + ": " + e.what());
  }
  try {
    return parse_annotations_json(doc, source, vocabulary);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, source + ": " + e.what());
  }
}

void write_annotations_csv(std::ostream& out, const AnnotationSet& annotations) {
  out << "item_id,annotator_id,label\n";
  for (const auto& r : annotations.records()) {
    out << quote_csv(annotations.items()[r.item]) << ',' << quote_csv(annotations.annotators()[r.annotator]) << ','
        << quote_csv(annotations.vocabulary()[r.label]) << '\n';
  }
}

LabelVocabulary load_vocabulary(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> labels;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line, line_no)) {
    if (!is_blank(line)) labels.push_back(line);
  }
  try {
    return LabelVocabulary(std::move(labels));
  } catch (const Error& e) {
    rethrow_with_context(e, path.string() + ": ");
  }
}

void write_vocabulary(std::ostream& out, const LabelVocabulary& vocabulary) {
  for (const auto& label : vocabulary.labels()) out << label << '\n';
}

GoldLabels load_gold(const std::filesystem::path& path, const LabelVocabulary& vocabulary) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw Error(ErrorCode::EmptyInput, source + ": file is empty");
  if (split_csv_line(line) != std::vector<std::string>{"item_id", "label"}) {
    throw Error(ErrorCode::MalformedInput, context(source, line_no) + "expected header `item_id,label`");
  }
  GoldLabels gold;
  while (next_line(in, line, line_no)) {
    if (is_blank(line)) continue;
    const std::string where = context(source, line_no);
    auto fields = split_csv_line(line);
    if (fields.size() != 2) throw Error(ErrorCode::MalformedInput, where + "expected 2 fields");
    auto index = vocabulary.index_of(fields[1]);
    if (!index) throw Error(ErrorCode::UnknownLabel, where + "label '" + fields[1] + "' is not in the vocabulary");
    if (!gold.by_item.emplace(fields[0], *index).second) {
      throw Error(ErrorCode::MalformedInput, where + "duplicate gold entry for '" + fields[0] + "'");
    }
  }
  return gold;
}

void write_gold_csv(std::ostream& out, const GoldLabels& gold, const std::vector<std::string>& item_order,
                    const LabelVocabulary& vocabulary) {
  out << "item_id,label\n";
  for (const auto& item : item_order) {
    if (auto label = gold.find(item)) out << quote_csv(item) << ',' << quote_csv(vocabulary[*label]) << '\n';
  }
}

void write_soft_labels_csv(std::ostream& out, const SoftLabelMatrix& soft) {
  out << "item_id";
  for (const auto& label : soft.labels) out << ',' << quote_csv("p_" + label);
  out << '\n';
  for (std::size_t i = 0; i < soft.items(); ++i) {
    out << quote_csv(soft.item_ids[i]);
    for (double p : soft.rows[i].probs()) out << ',' << format_probability(p);
    out << '\n';
  }
}

SoftLabelMatrix read_soft_labels_csv(std::istream& in, const std::string& source_name,
                                     const std::string& method_name) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw Error(ErrorCode::EmptyInput, source_name + ": file is empty");

  SoftLabelMatrix soft;
  soft.method_name = method_name;
  soft.labels = read_prefixed_header(split_csv_line(line), "p_", context(source_name, line_no));
  try {
    LabelVocabulary check(soft.labels);
  } catch (const Error& e) {
    rethrow_with_context(e, context(source_name, line_no));
  }

  while (next_line(in, line, line_no)) {
    if (is_blank(line)) continue;
    const std::string where = context(source_name, line_no);
    auto fields = split_csv_line(line);
    if (fields.size() != soft.labels.size() + 1) {
      throw Error(ErrorCode::MalformedInput, where + "expected " + std::to_string(soft.labels.size() + 1) + " fields");
    }
    std::vector<double> probs;
    probs.reserve(soft.labels.size());
    for (std::size_t c = 1; c < fields.size(); ++c) probs.push_back(parse_real(fields[c], where));
    if (!Distribution::is_valid(probs)) {
      throw Error(ErrorCode::MalformedInput, where + "row is not a probability distribution");
    }
    soft.item_ids.push_back(fields[0]);
    soft.rows.emplace_back(std::move(probs));
  }
  if (soft.rows.empty()) throw Error(ErrorCode::EmptyInput, source_name + ": no rows");
  return soft;
}

SoftLabelMatrix load_soft_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_soft_labels_csv(in, path.string(), path.stem().string());
}

void save_soft_labels(const std::filesystem::path& path, const SoftLabelMatrix& soft) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
  write_soft_labels_csv(out, soft);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for '" + path.string() + "'");
}

LogitTable load_logits(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw Error(ErrorCode::EmptyInput, source + ": file is empty");

  LogitTable table;
  table.labels = read_prefixed_header(split_csv_line(line), "l_", context(source, line_no));
  while (next_line(in, line, line_no)) {
    if (is_blank(line)) continue;
    const std::string where = context(source, line_no);
    auto fields = split_csv_line(line);
    if (fields.size() != table.labels.size() + 1) {
      throw Error(ErrorCode::MalformedInput, where + "expected " + std::to_string(table.labels.size() + 1) + " fields");
    }
    std::vector<double> row;
    for (std::size_t c = 1; c < fields.size(); ++c) row.push_back(parse_real(fields[c], where));
    table.item_ids.push_back(fields[0]);
    table.logits.push_back(std::move(row));
  }
  if (table.item_ids.empty()) throw Error(ErrorCode::EmptyInput, source + ": no rows");
  return table;
}

void write_logits_csv(std::ostream& out, const LogitTable& table) {
  out << "item_id";
  for (const auto& label : table.labels) out << ',' << quote_csv("l_" + label);
  out << '\n';
  for (std::size_t i = 0; i < table.item_ids.size(); ++i) {
    out << quote_csv(table.item_ids[i]);
    for (double v : table.logits[i]) out << ',' << format_with("%.17g", v);
    out << '\n';
  }
}

}  // namespace crowdsoft

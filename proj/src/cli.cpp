#include "crowdsoft/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "crowdsoft/aggregation.hpp"
#include "crowdsoft/io.hpp"
#include "crowdsoft/metrics.hpp"
#include "crowdsoft/serialization.hpp"
#include "crowdsoft/soft_labeling.hpp"
#include "crowdsoft/synthesis.hpp"
#include "crowdsoft/truth_inference.hpp"

namespace crowdsoft::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kLabelMethods = {"standard", "softmax", "ds", "mace"};
const std::vector<std::string> kMetrics = {"f1", "accuracy", "cll", "jsd_matrix", "proximity"};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

// Parses a comma list restricted to `allowed`; "all" selects everything.
// Result keeps the order of `allowed`.
std::vector<std::string> select(const std::string& text, const std::vector<std::string>& allowed,
                                const std::string& what) {
  const auto requested = split_list(text);
  if (requested.empty()) throw Error(ErrorCode::InvalidConfig, "no " + what + " selected");
  for (const auto& r : requested) {
    if (r != "all" && std::find(allowed.begin(), allowed.end(), r) == allowed.end()) {
      throw Error(ErrorCode::InvalidConfig, "unknown " + what + " '" + r + "'");
    }
  }
  std::vector<std::string> out;
  for (const auto& a : allowed) {
    if (std::find(requested.begin(), requested.end(), "all") != requested.end() ||
        std::find(requested.begin(), requested.end(), a) != requested.end()) {
      out.push_back(a);
    }
  }
  return out;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

// Rejects top-level config sections other than `allowed`.
void check_sections(const json& doc, const std::vector<std::string>& allowed) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::InvalidConfig, key + ": unknown config section");
    }
  }
}

fs::path with_suffix(const fs::path& path, const std::string& suffix) {
  fs::path out = path;
  out.replace_extension();
  out += suffix;
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoFailure, "cannot create directory '" + dir.string() + "'");
}

struct LabelArgs {
  std::string input;
  std::string format = "long_csv";
  std::string vocab;
  std::string methods = "all";
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int cmd_label(const LabelArgs& args, std::ostream& out) {
  std::optional<LabelVocabulary> vocab;
  if (!args.vocab.empty()) vocab = load_vocabulary(args.vocab);
  const auto annotations = load_annotations(args.input, parse_annotation_format(args.format), vocab);
  const auto methods = select(args.methods, kLabelMethods, "labeling method");

  DawidSkeneConfig ds_config;
  MaceConfig mace_config;
  if (!args.config.empty()) {
    const auto doc = read_json_file(args.config);
    check_sections(doc, {"ds", "mace"});
    if (doc.contains("ds")) ds_config = dawid_skene_config_from_json(doc.at("ds"));
    if (doc.contains("mace")) mace_config = mace_config_from_json(doc.at("mace"));
  }
  if (args.seed_given) mace_config.seed = args.seed;

  const fs::path dir(args.out_dir);
  ensure_dir(dir);
  for (const auto& method : methods) {
    SoftLabelMatrix soft;
    if (method == "standard") {
      soft = standard_normalize(annotations);
    } else if (method == "softmax") {
      soft = softmax_normalize(annotations);
    } else if (method == "ds") {
      auto model = dawid_skene_fit(annotations, ds_config);
      write_json(dir / "ds_model.json", to_json(model));
      soft = std::move(model.posteriors);
    } else {
      auto model = mace_fit(annotations, mace_config);
      write_json(dir / "mace_model.json", to_json(model));
      soft = std::move(model.posteriors);
    }
    save_soft_labels(dir / (method + ".csv"), soft);
    out << method << ": " << soft.items() << " items -> " << (dir / (method + ".csv")).string() << "\n";
  }
  return kExitOk;
}

struct AggregateArgs {
  std::vector<std::string> inputs;
  std::string method;
  std::optional<double> lambda;
  std::string out;
  std::string config;
  std::string temps_out;
};

Ensemble load_ensemble(const std::vector<std::string>& paths) {
  Ensemble ensemble;
  for (const auto& p : paths) ensemble.members.push_back(load_soft_labels(p));
  ensemble.validate();
  return ensemble;
}

int cmd_aggregate(const AggregateArgs& args, std::ostream& out) {
  CentroidConfig centroid;
  TemperatureConfig temperature;
  if (!args.config.empty()) {
    const auto doc = read_json_file(args.config);
    check_sections(doc, {"centroid", "temperature"});
    if (doc.contains("centroid")) centroid = centroid_config_from_json(doc.at("centroid"));
    if (doc.contains("temperature")) temperature = temperature_config_from_json(doc.at("temperature"));
  }
  if (args.lambda) temperature.lambda = *args.lambda;
  temperature.validate();

  const auto ensemble = load_ensemble(args.inputs);
  SoftLabelMatrix result;
  if (args.method == "average") {
    result = aggregate_average(ensemble);
  } else if (args.method == "centroid") {
    result = js_centroid(ensemble, centroid);
  } else {
    const auto temps = fit_temperatures(ensemble, temperature);
    const fs::path temps_path = args.temps_out.empty() ? with_suffix(args.out, ".temps.json") : fs::path(args.temps_out);
    write_json(temps_path, to_json(temps));
    result = args.method == "temperature" ? aggregate_temperature(ensemble, temps, temperature.epsilon)
                                          : aggregate_hybrid(ensemble, temps, centroid);
    out << "temperatures:";
    for (double t : temps.temps) out << ' ' << format_probability(t);
    out << " (loss " << format_probability(temps.final_loss()) << ")\n";
  }
  if (fs::path(args.out).has_parent_path()) fs::create_directories(fs::path(args.out).parent_path());
  save_soft_labels(args.out, result);
  out << args.method << ": " << result.items() << " items -> " << args.out << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::vector<std::string> soft;
  std::string logits;
  std::string gold;
  std::string metrics = "accuracy";
  std::string reference;
  std::uint64_t seed = 0;
  int splits = 5;
  std::string out;
  std::string jsd_csv;
};

std::string jsd_csv_text(const JsdMatrix& matrix) {
  std::string text = "method";
  for (const auto& n : matrix.names) text += "," + n;
  text += "\n";
  for (std::size_t a = 0; a < matrix.names.size(); ++a) {
    text += matrix.names[a];
    for (double v : matrix.values[a]) text += "," + format_probability(v);
    text += "\n";
  }
  return text;
}

std::vector<std::size_t> argmax_rows(const std::vector<std::vector<double>>& rows) {
  std::vector<std::size_t> out;
  for (const auto& r : rows) out.push_back(static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin()));
  return out;
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
  const auto metrics = select(args.metrics, kMetrics, "metric");
  auto wants = [&](const std::string& m) { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); };
  if (args.soft.empty() == args.logits.empty()) {
    throw Error(ErrorCode::InvalidConfig, "give either --soft files or one --logits file");
  }
  const bool needs_gold = wants("f1") || wants("accuracy") || wants("cll");
  if (needs_gold && args.gold.empty()) throw Error(ErrorCode::InvalidConfig, "metrics f1/accuracy/cll need --gold");
  if (!args.logits.empty() && (wants("jsd_matrix") || wants("proximity"))) {
    throw Error(ErrorCode::InvalidConfig, "jsd_matrix and proximity need --soft label files");
  }

  CllConfig cll_config;
  cll_config.seed = args.seed;
  cll_config.splits = args.splits;

  struct Source {
    std::string name;
    PredictionSet predictions;
    std::vector<std::size_t> pred_labels;
    const SoftLabelMatrix* soft = nullptr;
  };

  json report = json::object();
  report["metrics"] = metrics;

  Ensemble ensemble;
  std::optional<LogitTable> logits;
  std::vector<std::string> labels;
  if (!args.soft.empty()) {
    for (const auto& p : args.soft) ensemble.members.push_back(load_soft_labels(p));
    ensemble.validate();
    labels = ensemble.members.front().labels;
  } else {
    logits = load_logits(args.logits);
    labels = logits->labels;
  }

  if (needs_gold) {
    const auto gold = load_gold(args.gold, LabelVocabulary(labels));
    std::vector<Source> sources;
    if (logits) {
      auto preds = PredictionSet::from_logits(logits->item_ids, logits->logits, gold);
      auto pred_labels = argmax_rows(preds.logits);
      sources.push_back({fs::path(args.logits).stem().string(), std::move(preds), std::move(pred_labels)});
    } else {
      for (const auto& member : ensemble.members) {
        auto preds = PredictionSet::from_soft_labels(member, gold);
        std::vector<std::size_t> pred_labels;
        for (std::size_t i = 0; i < member.items(); ++i) {
          if (gold.find(member.item_ids[i])) pred_labels.push_back(member.rows[i].argmax());
        }
        sources.push_back({member.method_name, std::move(preds), std::move(pred_labels), &member});
      }
    }
    report["gold_items"] = sources.front().predictions.size();

    json per_method = json::array();
    for (const auto& s : sources) {
      json entry = {{"method", s.name}};
      if (wants("accuracy")) {
        if (s.soft) {
          entry["accuracy"] = accuracy_vs_gold(*s.soft, gold);
        } else {
          std::size_t correct = 0;
          for (std::size_t i = 0; i < s.pred_labels.size(); ++i) correct += s.pred_labels[i] == s.predictions.gold[i];
          entry["accuracy"] = static_cast<double>(correct) / static_cast<double>(s.pred_labels.size());
        }
      }
      if (wants("f1")) {
        const auto averaging = labels.size() == 2 ? F1Averaging::Binary : F1Averaging::Macro;
        auto f1 = to_json(f1_scores(s.pred_labels, s.predictions.gold, averaging));
        f1["averaging"] = averaging == F1Averaging::Binary ? "binary" : "macro";
        entry["f1"] = f1;
      }
      if (wants("cll")) entry["cll"] = to_json(calibrated_log_likelihood(s.predictions, cll_config));
      per_method.push_back(entry);
    }
    report["per_method"] = per_method;
  }

  if (wants("jsd_matrix")) {
    const auto matrix = pairwise_jsd_matrix(ensemble);
    report["jsd_matrix"] = to_json(matrix);
    const fs::path csv = args.jsd_csv.empty() ? with_suffix(args.out, ".jsd.csv") : fs::path(args.jsd_csv);
    write_text(csv, jsd_csv_text(matrix));
    out << "jsd matrix -> " << csv.string() << "\n";
  }
  if (wants("proximity")) {
    const SoftLabelMatrix reference =
        args.reference.empty() ? js_centroid(ensemble) : load_soft_labels(args.reference);
    const auto proximity = centroid_proximity(ensemble, reference);
    if (proximity.small_ensemble) out << "warning: proximity correlation over fewer than 4 members\n";
    auto entry = to_json(proximity);
    entry["reference"] = args.reference.empty() ? std::string("centroid") : reference.method_name;
    report["proximity"] = entry;
  }

  write_json(args.out, report);
  if (report.contains("per_method")) {
    for (const auto& entry : report["per_method"]) {
      out << entry["method"].get<std::string>();
      if (entry.contains("accuracy")) out << " accuracy=" << format_probability(entry["accuracy"].get<double>());
      if (entry.contains("f1")) out << " f1=" << format_probability(entry["f1"]["f1"].get<double>());
      if (entry.contains("cll")) out << " cll=" << format_probability(entry["cll"]["value"].get<double>());
      out << "\n";
    }
  }
  out << "report -> " << args.out << "\n";
  return kExitOk;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir, std::ostream& out) {
  const auto spec = crowd_spec_from_json(read_json_file(spec_path));
  const auto crowd = generate_crowd(spec);
  const fs::path dir(out_dir);
  ensure_dir(dir);

  std::ostringstream annotations;
  write_annotations_csv(annotations, crowd.annotations);
  write_text(dir / "annotations.csv", annotations.str());
  std::ostringstream gold;
  write_gold_csv(gold, crowd.truth, crowd.annotations.items(), crowd.annotations.vocabulary());
  write_text(dir / "gold.csv", gold.str());
  std::ostringstream labels;
  write_vocabulary(labels, crowd.annotations.vocabulary());
  write_text(dir / "labels.txt", labels.str());

  out << crowd.annotations.records().size() << " records over " << crowd.annotations.items().size() << " items -> "
      << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Soft labels from crowd annotations: labeling, multi-view aggregation and evaluation", "crowdsoft"};
  app.require_subcommand(1);

  LabelArgs label;
  auto* label_cmd = app.add_subcommand("label", "Compute per-method soft labels from raw annotations");
  label_cmd->add_option("--input,-i", label.input, "Annotation file")->required();
  label_cmd->add_option("--format", label.format, "long_csv or json")->capture_default_str();
  label_cmd->add_option("--vocab", label.vocab, "Vocabulary file, one label per line");
  label_cmd->add_option("--methods", label.methods, "Comma list of standard,softmax,ds,mace or all")
      ->capture_default_str();
  label_cmd->add_option("--config", label.config, "JSON config with optional \"ds\" and \"mace\" sections");
  label_cmd->add_option("--out-dir,-o", label.out_dir, "Output directory")->required();
  auto* seed_opt = label_cmd->add_option("--seed", label.seed, "Seed for MACE restarts")->capture_default_str();

  AggregateArgs aggregate;
  auto* aggregate_cmd = app.add_subcommand("aggregate", "Combine several soft-label files into one");
  aggregate_cmd->add_option("--inputs", aggregate.inputs, "Soft-label files")->required()->expected(2, -1);
  aggregate_cmd->add_option("--method", aggregate.method, "average, centroid, temperature or hybrid")
      ->required()
      ->check(CLI::IsMember({"average", "centroid", "temperature", "hybrid"}));
  aggregate_cmd->add_option("--lambda", aggregate.lambda, "Temperature regularization weight");
  aggregate_cmd->add_option("--out,-o", aggregate.out, "Output soft-label file")->required();
  aggregate_cmd->add_option("--config", aggregate.config,
                            "JSON config with optional \"centroid\" and \"temperature\" sections");
  aggregate_cmd->add_option("--temps-out", aggregate.temps_out, "Fitted temperatures (default <out>.temps.json)");

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score soft labels or logits and analyse divergences");
  evaluate_cmd->add_option("--soft", evaluate.soft, "Soft-label files")->expected(1, -1);
  evaluate_cmd->add_option("--logits", evaluate.logits, "Logit file");
  evaluate_cmd->add_option("--gold", evaluate.gold, "Gold CSV");
  evaluate_cmd->add_option("--metrics", evaluate.metrics, "Comma list of f1,accuracy,cll,jsd_matrix,proximity or all")
      ->capture_default_str();
  evaluate_cmd->add_option("--reference", evaluate.reference, "Reference soft labels for proximity (default centroid)");
  evaluate_cmd->add_option("--seed", evaluate.seed, "Seed for calibration splits")->capture_default_str();
  evaluate_cmd->add_option("--splits", evaluate.splits, "Calibration splits")->capture_default_str();
  evaluate_cmd->add_option("--out,-o", evaluate.out, "JSON report")->required();
  evaluate_cmd->add_option("--jsd-csv", evaluate.jsd_csv, "JSD matrix CSV (default <out>.jsd.csv)");

  std::string spec_path;
  std::string synth_dir;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic crowd with planted truth");
  synth_cmd->add_option("--spec", spec_path, "Crowd spec JSON")->required();
  synth_cmd->add_option("--out-dir,-o", synth_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (label_cmd->parsed()) {
      label.seed_given = seed_opt->count() > 0;
      return cmd_label(label, out);
    }
    if (aggregate_cmd->parsed()) return cmd_aggregate(aggregate, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(evaluate, out);
    return cmd_synth(spec_path, synth_dir, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::NumericalFailure ? kExitNumericalFailure : kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace crowdsoft::cli

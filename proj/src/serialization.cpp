#include "crowdsoft/serialization.hpp"

#include <set>

namespace crowdsoft {
namespace {

using nlohmann::json;

json rows_json(const SoftLabelMatrix& soft) {
  json rows = json::array();
  for (std::size_t i = 0; i < soft.items(); ++i) {
    rows.push_back({{"item_id", soft.item_ids[i]},
                    {"probs", std::vector<double>(soft.rows[i].probs().begin(), soft.rows[i].probs().end())}});
  }
  return rows;
}

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::InvalidConfig, field + ": " + why);
}

// Reads typed optional fields out of one JSON object, tracking which keys
// were consumed so leftovers can be reported.
class FieldReader {
 public:
  FieldReader(const json& doc, std::string scope) : doc_(doc), scope_(std::move(scope)) {
    if (!doc_.is_object()) bad_field(scope_, "expected a JSON object");
  }

  std::string path(const std::string& key) const { return scope_.empty() ? key : scope_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return doc_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return doc_.at(key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const auto& v = doc_.at(key);
    if (!v.is_number()) bad_field(path(key), "expected a number");
    out = v.get<double>();
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (!has(key)) return;
    const auto& v = doc_.at(key);
    if (!v.is_number_integer()) bad_field(path(key), "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.get<long long>() < 0) bad_field(path(key), "must be non-negative");
    }
    out = v.get<Int>();
  }

  void reals(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const auto& v = doc_.at(key);
    if (!v.is_array()) bad_field(path(key), "expected an array of numbers");
    out.clear();
    for (const auto& x : v) {
      if (!x.is_number()) bad_field(path(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) bad_field(path(key), "unknown field");
    }
  }

 private:
  const json& doc_;
  std::string scope_;
  std::set<std::string> seen_;
};

}  // namespace

json to_json(const DawidSkeneModel& model) {
  json confusion = json::array();
  for (std::size_t j = 0; j < model.annotators.size(); ++j) {
    confusion.push_back({{"annotator", model.annotators[j]}, {"matrix", model.confusion[j]}});
  }
  return {{"method", "dawid_skene"},
          {"labels", model.labels},
          {"class_prior", std::vector<double>(model.class_prior.probs().begin(), model.class_prior.probs().end())},
          {"confusion", confusion},
          {"log_likelihood_trace", model.log_likelihood_trace},
          {"iterations", model.iterations},
          {"converged", model.converged},
          {"posteriors", rows_json(model.posteriors)}};
}

json to_json(const MaceModel& model) {
  json annotators = json::array();
  for (std::size_t j = 0; j < model.annotators.size(); ++j) {
    const auto& s = model.spam_strategy[j];
    annotators.push_back({{"annotator", model.annotators[j]},
                          {"trust", model.trust[j]},
                          {"spam_strategy", std::vector<double>(s.probs().begin(), s.probs().end())}});
  }
  return {{"method", "mace"},
          {"labels", model.labels},
          {"annotators", annotators},
          {"objective_trace", model.objective_trace},
          {"restart_objectives", model.restart_objectives},
          {"best_restart", model.best_restart},
          {"posteriors", rows_json(model.posteriors)}};
}

json to_json(const TemperatureSet& temps) {
  return {{"temps", temps.temps}, {"lambda", temps.lambda}, {"final_loss", temps.final_loss()}};
}

TemperatureSet temperature_set_from_json(const json& doc) {
  FieldReader r(doc, "");
  TemperatureSet t;
  if (!r.has("temps")) bad_field("temps", "missing");
  r.reals("temps", t.temps);
  for (double x : t.temps) {
    if (!(x > 0.0)) bad_field("temps", "temperatures must be positive");
  }
  r.number("lambda", t.lambda);
  double final_loss = 0.0;
  r.number("final_loss", final_loss);
  t.loss_trace.push_back(final_loss);
  r.finish();
  return t;
}

json to_json(const F1Result& f1) {
  return {{"precision", f1.precision}, {"recall", f1.recall}, {"f1", f1.f1}};
}

json to_json(const CllResult& cll) {
  json splits = json::array();
  for (const auto& s : cll.splits) splits.push_back({{"temperature", s.temperature}, {"test_nll", s.test_nll}});
  return {{"value", cll.value}, {"splits", splits}};
}

json to_json(const JsdMatrix& matrix) { return {{"names", matrix.names}, {"values", matrix.values}}; }

json to_json(const ProximityReport& report) {
  return {{"names", report.names},
          {"jsd_to_reference", report.jsd_to_reference},
          {"mean_jsd_to_others", report.mean_jsd_to_others},
          {"pearson_r", report.pearson_r},
          {"small_ensemble", report.small_ensemble}};
}

DawidSkeneConfig dawid_skene_config_from_json(const json& doc, DawidSkeneConfig base) {
  FieldReader r(doc, "ds");
  r.integer("max_iters", base.max_iters);
  r.number("tol", base.tol);
  r.number("smoothing", base.smoothing);
  r.finish();
  return base;
}

MaceConfig mace_config_from_json(const json& doc, MaceConfig base) {
  FieldReader r(doc, "mace");
  r.integer("max_iters", base.max_iters);
  r.number("tol", base.tol);
  r.integer("restarts", base.restarts);
  r.number("smoothing_alpha", base.smoothing_alpha);
  r.number("smoothing_beta", base.smoothing_beta);
  r.number("spam_smoothing", base.spam_smoothing);
  r.integer("seed", base.seed);
  r.finish();
  return base;
}

CentroidConfig centroid_config_from_json(const json& doc, CentroidConfig base) {
  FieldReader r(doc, "centroid");
  r.integer("max_iters", base.max_iters);
  r.number("tol", base.tol);
  r.number("epsilon", base.epsilon);
  r.finish();
  return base;
}

TemperatureConfig temperature_config_from_json(const json& doc, TemperatureConfig base) {
  FieldReader r(doc, "temperature");
  r.number("lambda", base.lambda);
  r.number("lr", base.lr);
  r.integer("max_steps", base.max_steps);
  r.number("tol", base.tol);
  r.number("t_min", base.t_min);
  r.number("t_max", base.t_max);
  r.number("epsilon", base.epsilon);
  r.finish();
  return base;
}

CrowdSpec crowd_spec_from_json(const json& doc) {
  FieldReader r(doc, "");
  CrowdSpec spec;
  if (!r.has("n_items")) bad_field("n_items", "missing");
  if (!r.has("K")) bad_field("K", "missing");
  r.integer("n_items", spec.n_items);
  r.integer("K", spec.num_labels);
  r.reals("class_prior", spec.class_prior);
  r.number("coverage", spec.coverage);
  r.integer("seed", spec.seed);
  if (r.has("labels")) {
    const auto& labels = r.at("labels");
    if (!labels.is_array()) bad_field("labels", "expected an array of strings");
    for (const auto& l : labels) {
      if (!l.is_string()) bad_field("labels", "expected an array of strings");
      spec.labels.push_back(l.get<std::string>());
    }
  }

  if (!r.has("annotators")) bad_field("annotators", "missing");
  const auto& roles = r.at("annotators");
  if (!roles.is_array()) bad_field("annotators", "expected an array");
  for (std::size_t j = 0; j < roles.size(); ++j) {
    FieldReader role(roles[j], "annotators[" + std::to_string(j) + "]");
    std::size_t count = 1;
    role.integer("count", count);
    AnnotatorRole parsed;
    if (role.has("faithful") == role.has("spammer")) {
      bad_field(role.path("faithful"), "exactly one of \"faithful\" or \"spammer\" is required");
    }
    if (role.has("faithful")) {
      FaithfulRole f;
      role.number("faithful", f.accuracy);
      parsed = f;
    } else {
      SpammerRole s;
      role.reals("spammer", s.strategy);
      parsed = s;
    }
    role.finish();
    spec.annotators.insert(spec.annotators.end(), count, parsed);
  }
  if (r.has("n_annotators")) {
    std::size_t n = 0;
    r.integer("n_annotators", n);
    if (n != spec.annotators.size()) {
      bad_field("n_annotators", std::to_string(n) + " does not match " + std::to_string(spec.annotators.size()) +
                                    " listed annotators");
    }
  }
  r.finish();
  spec.validate();
  return spec;
}

}  // namespace crowdsoft

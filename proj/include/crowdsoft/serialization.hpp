#pragma once

#include <json.hpp>

#include "crowdsoft/aggregation.hpp"
#include "crowdsoft/metrics.hpp"
#include "crowdsoft/synthesis.hpp"
#include "crowdsoft/truth_inference.hpp"

// JSON views of fitted models, configs and reports.
namespace crowdsoft {

nlohmann::json to_json(const DawidSkeneModel& model);
nlohmann::json to_json(const MaceModel& model);
// {temps, lambda, final_loss}
nlohmann::json to_json(const TemperatureSet& temps);
TemperatureSet temperature_set_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const F1Result& f1);
nlohmann::json to_json(const CllResult& cll);
nlohmann::json to_json(const JsdMatrix& matrix);
nlohmann::json to_json(const ProximityReport& report);

// Each reader overlays the keys present in `doc` onto `base` and throws
// InvalidConfig naming the first bad field. Unknown keys are rejected.
DawidSkeneConfig dawid_skene_config_from_json(const nlohmann::json& doc, DawidSkeneConfig base = {});
MaceConfig mace_config_from_json(const nlohmann::json& doc, MaceConfig base = {});
CentroidConfig centroid_config_from_json(const nlohmann::json& doc, CentroidConfig base = {});
TemperatureConfig temperature_config_from_json(const nlohmann::json& doc, TemperatureConfig base = {});

// {"n_items", "K", "annotators": [{"faithful": d} | {"spammer": [..]}, each
// with an optional "count"], "class_prior"?, "coverage"?, "seed"?, "labels"?}
CrowdSpec crowd_spec_from_json(const nlohmann::json& doc);

}  // namespace crowdsoft

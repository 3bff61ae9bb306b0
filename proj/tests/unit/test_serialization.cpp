#include <doctest.h>

#include "crowdsoft/serialization.hpp"
#include "fixtures.hpp"

using namespace crowdsoft;
using fixtures::error_code;
using nlohmann::json;

TEST_CASE("config readers overlay known keys") {
  const auto ds = dawid_skene_config_from_json(json{{"max_iters", 7}, {"tol", 1e-3}});
  CHECK(ds.max_iters == 7);
  CHECK(ds.tol == 1e-3);
  CHECK(ds.smoothing == 0.01);

  const auto mace = mace_config_from_json(json{{"restarts", 3}, {"seed", 12}});
  CHECK(mace.restarts == 3);
  CHECK(mace.seed == 12);
  CHECK(mace.max_iters == 50);

  const auto t = temperature_config_from_json(json{{"t_min", 1.0}, {"t_max", 1.0}});
  CHECK(t.t_min == 1.0);
  CHECK(t.lambda == 0.01);

  CHECK(centroid_config_from_json(json{{"tol", 1e-6}}).tol == 1e-6);
}

TEST_CASE("config readers reject unknown keys and wrong types") {
  CHECK(error_code([] { dawid_skene_config_from_json(json{{"iters", 7}}); }) == ErrorCode::InvalidConfig);
  CHECK(error_code([] { mace_config_from_json(json{{"restarts", 2.5}}); }) == ErrorCode::InvalidConfig);
  CHECK(error_code([] { mace_config_from_json(json{{"seed", -1}}); }) == ErrorCode::InvalidConfig);
  CHECK(error_code([] { temperature_config_from_json(json{{"lambda", "big"}}); }) == ErrorCode::InvalidConfig);
  CHECK(error_code([] { centroid_config_from_json(json::array()); }) == ErrorCode::InvalidConfig);
  try {
    temperature_config_from_json(json{{"lr", "x"}});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("temperature.lr") != std::string::npos);
  }
}

TEST_CASE("temperature sets round-trip") {
  const TemperatureSet t{.temps = {0.5, 2.0}, .lambda = 0.02, .loss_trace = {1.0, 0.25}};
  const auto back = temperature_set_from_json(to_json(t));
  CHECK(back.temps == t.temps);
  CHECK(back.lambda == t.lambda);
  CHECK(back.final_loss() == 0.25);
  CHECK(error_code([] { temperature_set_from_json(json{{"temps", {1.0, -1.0}}}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("crowd spec parsing") {
  const auto doc = json::parse(R"({
    "n_items": 20, "K": 3, "seed": 4, "coverage": 0.5,
    "annotators": [{"faithful": 0.8, "count": 3}, {"spammer": [1, 0, 0]}],
    "n_annotators": 4
  })");
  const auto spec = crowd_spec_from_json(doc);
  CHECK(spec.n_items == 20);
  CHECK(spec.num_labels == 3);
  CHECK(spec.annotators.size() == 4);
  CHECK(std::holds_alternative<SpammerRole>(spec.annotators.back()));
  CHECK(spec.coverage == 0.5);

  auto bad = doc;
  bad["n_annotators"] = 5;
  CHECK(error_code([&] { crowd_spec_from_json(bad); }) == ErrorCode::InvalidConfig);
  bad = doc;
  bad["annotators"][0]["faithful"] = 0.1;
  CHECK(error_code([&] { crowd_spec_from_json(bad); }) == ErrorCode::InvalidConfig);
  bad = doc;
  bad.erase("K");
  CHECK(error_code([&] { crowd_spec_from_json(bad); }) == ErrorCode::InvalidConfig);
  bad = doc;
  bad["annotators"][1]["faithful"] = 0.9;
  CHECK(error_code([&] { crowd_spec_from_json(bad); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("reports serialize their fields") {
  const auto f1 = to_json(F1Result{.precision = 0.5, .recall = 1.0, .f1 = 2.0 / 3.0});
  CHECK(f1["recall"] == 1.0);
  const JsdMatrix m{.names = {"a", "b"}, .values = {{0.0, 0.1}, {0.1, 0.0}}};
  CHECK(to_json(m)["values"][0][1] == 0.1);
}

#include <doctest.h>

#include <random>
#include <sstream>

#include "crowdsoft/io.hpp"
#include "crowdsoft/synthesis.hpp"
#include "fixtures.hpp"

using namespace crowdsoft;
using fixtures::error_code;

namespace {

std::string dump(const SyntheticCrowd& crowd) {
  std::ostringstream out;
  write_annotations_csv(out, crowd.annotations);
  write_gold_csv(out, crowd.truth, crowd.annotations.items(), crowd.annotations.vocabulary());
  return out.str();
}

}  // namespace

TEST_CASE("noiseless faithful annotators agree with the truth") {
  CrowdSpec spec;
  spec.n_items = 30;
  spec.num_labels = 4;
  spec.annotators.assign(3, FaithfulRole{1.0});
  spec.seed = 2;
  const auto crowd = generate_crowd(spec);
  CHECK(crowd.annotations.records().size() == 90);
  for (const auto& r : crowd.annotations.records()) {
    CHECK(r.label == *crowd.truth.find(crowd.annotations.items()[r.item]));
  }
}

TEST_CASE("a constant spammer only emits its label") {
  CrowdSpec spec;
  spec.n_items = 40;
  spec.num_labels = 3;
  spec.annotators = {FaithfulRole{0.9}, SpammerRole{{1.0, 0.0, 0.0}}};
  const auto crowd = generate_crowd(spec);
  for (const auto& r : crowd.annotations.records()) {
    if (crowd.annotations.annotators()[r.annotator] == "ann01") CHECK(r.label == 0);
  }
}

TEST_CASE("faithful annotators agree with the truth at rate d") {
  // Errors go to the wrong labels only, so the confusion diagonal is d.
  CrowdSpec spec;
  spec.n_items = 200;
  spec.num_labels = 3;
  spec.annotators.assign(10, FaithfulRole{0.8});
  spec.seed = 7;
  const auto crowd = generate_crowd(spec);
  std::vector<double> agree(10, 0.0);
  for (const auto& r : crowd.annotations.records()) {
    agree[r.annotator] += r.label == *crowd.truth.find(crowd.annotations.items()[r.item]);
  }
  for (double a : agree) {
    CHECK(std::abs(a / 200.0 - 0.8) <= 0.05);
  }
  CHECK(crowd.annotations.records().size() == 2000);
  CHECK(crowd.annotations.items().front() == "item000");
  CHECK(crowd.annotations.items().back() == "item199");
  CHECK(crowd.annotations.annotators().back() == "ann09");
}

TEST_CASE("class prior shapes the truth") {
  CrowdSpec spec;
  spec.n_items = 2000;
  spec.num_labels = 2;
  spec.class_prior = {0.9, 0.1};
  spec.annotators = {FaithfulRole{1.0}};
  const auto crowd = generate_crowd(spec);
  std::size_t zeros = 0;
  for (const auto& [item, label] : crowd.truth.by_item) zeros += label == 0;
  CHECK(static_cast<double>(zeros) / 2000.0 == doctest::Approx(0.9).epsilon(0.03));
}

TEST_CASE("spec validation names the field") {
  const auto message = [](const CrowdSpec& spec) -> std::string {
    try {
      spec.validate();
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidConfig);
      return e.what();
    }
    return "";
  };
  CrowdSpec spec;
  spec.n_items = 5;
  spec.num_labels = 3;
  spec.annotators = {FaithfulRole{0.2}};
  CHECK(message(spec).find("annotators[0]") != std::string::npos);
  spec.annotators = {SpammerRole{{0.5, 0.5}}};
  CHECK(message(spec).find("annotators[0]") != std::string::npos);
  spec.annotators = {FaithfulRole{0.9}};
  spec.coverage = 0.0;
  CHECK(message(spec).find("coverage") != std::string::npos);
  spec.coverage = 1.0;
  spec.n_items = 0;
  CHECK(message(spec).find("n_items") != std::string::npos);
  spec.n_items = 5;
  spec.class_prior = {0.5, 0.5};
  CHECK(message(spec).find("class_prior") != std::string::npos);
  spec.class_prior.clear();
  spec.annotators.clear();
  CHECK(!message(spec).empty());
}

TEST_CASE("property: determinism, coverage and record bounds") {
  std::mt19937_64 rng(81);
  for (int trial = 0; trial < 30; ++trial) {
    CrowdSpec spec;
    spec.n_items = 1 + rng() % 50;
    spec.num_labels = 2 + rng() % 4;
    spec.annotators.assign(1 + rng() % 7, FaithfulRole{0.95});
    spec.coverage = 0.05 + 0.95 * static_cast<double>(rng() % 100) / 100.0;
    spec.seed = rng();
    const auto a = generate_crowd(spec);
    const auto b = generate_crowd(spec);
    CHECK(dump(a) == dump(b));
    CHECK(a.annotations.items().size() == spec.n_items);
    CHECK(a.annotations.records().size() <= spec.n_items * spec.annotators.size());
    CHECK(a.truth.size() == spec.n_items);
    spec.seed += 1;
    if (spec.n_items > 10 && spec.coverage < 1.0) CHECK(dump(generate_crowd(spec)) != dump(a));
  }
}

TEST_CASE("minimal crowd") {
  CrowdSpec spec;
  spec.n_items = 1;
  spec.num_labels = 2;
  spec.annotators = {FaithfulRole{1.0}};
  const auto crowd = generate_crowd(spec);
  REQUIRE(crowd.annotations.records().size() == 1);
  CHECK(crowd.annotations.records()[0].label == *crowd.truth.find(crowd.annotations.items()[0]));
}

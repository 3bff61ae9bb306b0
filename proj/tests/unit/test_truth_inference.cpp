#include <doctest.h>

#include <algorithm>
#include <random>

#include "crowdsoft/synthesis.hpp"
#include "crowdsoft/truth_inference.hpp"
#include "fixtures.hpp"

using namespace crowdsoft;
using fixtures::error_code;

namespace {

AnnotationSet build(const std::vector<std::array<std::string, 3>>& records,
                    std::optional<LabelVocabulary> vocab = std::nullopt) {
  AnnotationSetBuilder b = vocab ? AnnotationSetBuilder(*vocab) : AnnotationSetBuilder();
  for (const auto& [item, ann, label] : records) b.add(item, ann, label);
  return b.build();
}

double accuracy(const SoftLabelMatrix& soft, const GoldLabels& truth) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < soft.items(); ++i) hit += soft.rows[i].argmax() == *truth.find(soft.item_ids[i]);
  return static_cast<double>(hit) / static_cast<double>(soft.items());
}

CrowdSpec planted(std::uint64_t seed, std::size_t spammers = 0) {
  CrowdSpec spec;
  spec.n_items = 200;
  spec.num_labels = 3;
  spec.annotators.assign(10, FaithfulRole{0.8});
  spec.annotators.insert(spec.annotators.end(), spammers, SpammerRole{{1.0, 0.0, 0.0}});
  spec.seed = seed;
  return spec;
}

CrowdSpec random_spec(std::mt19937_64& rng) {
  CrowdSpec spec;
  spec.n_items = 10 + rng() % 60;
  spec.num_labels = 2 + rng() % 3;
  const std::size_t n = 2 + rng() % 6;
  for (std::size_t j = 0; j < n; ++j) {
    const double floor = 1.0 / static_cast<double>(spec.num_labels);
    if (rng() % 4 == 0) {
      std::vector<double> strategy(spec.num_labels, 0.0);
      strategy[rng() % spec.num_labels] = 1.0;
      spec.annotators.push_back(SpammerRole{strategy});
    } else {
      spec.annotators.push_back(FaithfulRole{floor + (1.0 - floor) * (0.2 + 0.8 * (rng() % 100) / 100.0)});
    }
  }
  spec.coverage = 0.4 + 0.6 * static_cast<double>(rng() % 100) / 100.0;
  spec.seed = rng();
  return spec;
}

void check_simplex(const SoftLabelMatrix& soft) {
  for (const auto& row : soft.rows) CHECK(Distribution::is_valid(row.probs(), kSimplexTolerance));
}

}  // namespace

TEST_CASE("Dawid-Skene: unanimous annotators concentrate the posterior") {
  const auto a = build({{"i1", "a1", "A"}, {"i1", "a2", "A"}, {"i2", "a1", "A"}, {"i2", "a2", "A"},
                        {"i3", "a1", "A"}, {"i3", "a2", "A"}},
                       LabelVocabulary({"A", "B"}));
  const auto model = dawid_skene_fit(a);
  for (const auto& row : model.posteriors.rows) {
    CHECK(row.argmax() == 0);
    CHECK(row[0] >= 0.99);
  }
  CHECK(model.posteriors.method_name == "ds");
}

TEST_CASE("Dawid-Skene: a single vote decides a single item") {
  const auto model = dawid_skene_fit(build({{"i1", "a1", "A"}}, LabelVocabulary({"A", "B"})));
  CHECK(model.posteriors.rows[0].argmax() == 0);
}

TEST_CASE("Dawid-Skene recovers planted truth") {
  const auto crowd = generate_crowd(planted(7));
  const auto model = dawid_skene_fit(crowd.annotations);
  CHECK(accuracy(model.posteriors, crowd.truth) >= 0.95);
  CHECK(model.converged);
  check_simplex(model.posteriors);
  for (const auto& m : model.confusion) {
    for (const auto& row : m) {
      CHECK(Distribution::is_valid(row, kSimplexTolerance));
    }
  }
}

TEST_CASE("MACE: a constant spammer gets the lowest trust") {
  // Two faithful annotators that agree on all 50 items, plus one always
  // answering label 0.
  std::vector<std::array<std::string, 3>> records;
  for (int i = 0; i < 50; ++i) {
    const std::string item = "i" + std::to_string(i);
    const std::string truth = i % 3 == 0 ? "A" : (i % 3 == 1 ? "B" : "C");
    records.push_back({item, "f1", truth});
    records.push_back({item, "f2", truth});
    records.push_back({item, "spam", "A"});
  }
  const auto model = mace_fit(build(records));
  const auto spam = std::find(model.annotators.begin(), model.annotators.end(), "spam") - model.annotators.begin();
  for (std::size_t j = 0; j < model.annotators.size(); ++j) {
    if (static_cast<std::ptrdiff_t>(j) != spam) CHECK(model.trust[spam] < model.trust[j]);
  }
  CHECK(model.spam_strategy[spam].argmax() == 0);
  CHECK(model.restart_objectives.size() == 10);
}

TEST_CASE("MACE: unanimous annotators") {
  const auto a = build({{"i1", "a1", "B"}, {"i1", "a2", "B"}, {"i2", "a1", "A"}, {"i2", "a2", "A"},
                        {"i3", "a1", "B"}, {"i3", "a2", "B"}});
  const auto model = mace_fit(a);
  CHECK(model.posteriors.rows[0].argmax() == 1);
  CHECK(model.posteriors.rows[1].argmax() == 0);
  CHECK(model.posteriors.rows[2].argmax() == 1);
  CHECK(model.posteriors.method_name == "mace");
}

TEST_CASE("MACE: symmetric evidence gives a near-even posterior") {
  const auto model = mace_fit(build({{"i1", "a1", "A"}, {"i1", "a2", "B"}}));
  CHECK(std::abs(model.posteriors.rows[0][0] - 0.5) <= 0.05);
  CHECK(std::abs(model.posteriors.rows[0][1] - 0.5) <= 0.05);
}

TEST_CASE("MACE flags planted spammers across seeds") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto crowd = generate_crowd(planted(seed, 2));
    const auto model = mace_fit(crowd.annotations);
    const double worst_faithful = *std::min_element(model.trust.begin(), model.trust.begin() + 10);
    CHECK(model.trust[10] < worst_faithful);
    CHECK(model.trust[11] < worst_faithful);
    CHECK(accuracy(model.posteriors, crowd.truth) >= 0.9);
  }
}

TEST_CASE("configuration is validated") {
  const auto a = build({{"i1", "a1", "A"}, {"i1", "a2", "B"}});
  CHECK(error_code([&] { dawid_skene_fit(a, {.max_iters = 0}); }) == ErrorCode::InvalidConfig);
  CHECK(error_code([&] { dawid_skene_fit(a, {.smoothing = -1.0}); }) == ErrorCode::InvalidConfig);
  CHECK(error_code([&] { mace_fit(a, {.restarts = 0}); }) == ErrorCode::InvalidConfig);
  CHECK(error_code([&] { mace_fit(a, {.smoothing_alpha = -1.0}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("property: EM objectives never decrease") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = generate_crowd(random_spec(rng)).annotations;
    const auto ds = dawid_skene_fit(a);
    for (std::size_t t = 1; t < ds.log_likelihood_trace.size(); ++t) {
      CHECK(ds.log_likelihood_trace[t] >= ds.log_likelihood_trace[t - 1] - 1e-9);
    }
    const auto mace = mace_fit(a, {.seed = static_cast<std::uint64_t>(trial)});
    for (std::size_t t = 1; t < mace.objective_trace.size(); ++t) {
      CHECK(mace.objective_trace[t] >= mace.objective_trace[t - 1] - 1e-9);
    }
    check_simplex(ds.posteriors);
    check_simplex(mace.posteriors);
    const auto best = std::max_element(mace.restart_objectives.begin(), mace.restart_objectives.end());
    CHECK(mace.best_restart == best - mace.restart_objectives.begin());
  }
}

TEST_CASE("property: identical inputs and seeds give identical models") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = generate_crowd(random_spec(rng)).annotations;
    const auto d1 = dawid_skene_fit(a);
    const auto d2 = dawid_skene_fit(a);
    CHECK(d1.log_likelihood_trace == d2.log_likelihood_trace);
    CHECK(d1.confusion == d2.confusion);
    CHECK(d1.posteriors.rows == d2.posteriors.rows);
    const auto m1 = mace_fit(a, {.seed = 99});
    const auto m2 = mace_fit(a, {.seed = 99});
    CHECK(m1.trust == m2.trust);
    CHECK(m1.restart_objectives == m2.restart_objectives);
    CHECK(m1.posteriors.rows == m2.posteriors.rows);
  }
}

TEST_CASE("property: relabeling classes permutes the fitted models") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 8; ++trial) {
    auto spec = random_spec(rng);
    spec.num_labels = 3;
    for (auto& role : spec.annotators) {
      if (auto* s = std::get_if<SpammerRole>(&role)) s->strategy = {0.0, 1.0, 0.0};
      if (auto* f = std::get_if<FaithfulRole>(&role)) f->accuracy = std::max(f->accuracy, 0.5);
    }
    const auto crowd = generate_crowd(spec);
    // Same records, vocabulary reordered: label index y becomes perm[y].
    const std::vector<std::size_t> perm{2, 0, 1};
    const LabelVocabulary relabeled({"B", "C", "A"});
    AnnotationSetBuilder b(relabeled);
    const auto& vocab = crowd.annotations.vocabulary();
    for (const auto& r : crowd.annotations.records()) {
      b.add(crowd.annotations.items()[r.item], crowd.annotations.annotators()[r.annotator], vocab[r.label]);
    }
    const auto permuted = b.build();
    REQUIRE(permuted.vocabulary()[perm[0]] == "A");

    const auto d1 = dawid_skene_fit(crowd.annotations);
    const auto d2 = dawid_skene_fit(permuted);
    const auto m1 = mace_fit(crowd.annotations, {.seed = 5});
    const auto m2 = mace_fit(permuted, {.seed = 5});
    for (std::size_t i = 0; i < d1.posteriors.items(); ++i) {
      for (std::size_t y = 0; y < 3; ++y) {
        CHECK(std::abs(d2.posteriors.rows[i][perm[y]] - d1.posteriors.rows[i][y]) <= 1e-9);
        CHECK(std::abs(m2.posteriors.rows[i][perm[y]] - m1.posteriors.rows[i][y]) <= 1e-9);
      }
    }
    for (std::size_t j = 0; j < d1.annotators.size(); ++j) {
      CHECK(std::abs(m2.trust[j] - m1.trust[j]) <= 1e-9);
      for (std::size_t y = 0; y < 3; ++y) {
        CHECK(std::abs(m2.spam_strategy[j][perm[y]] - m1.spam_strategy[j][y]) <= 1e-9);
        for (std::size_t k = 0; k < 3; ++k) {
          CHECK(std::abs(d2.confusion[j][perm[k]][perm[y]] - d1.confusion[j][k][y]) <= 1e-9);
        }
      }
    }
  }
}

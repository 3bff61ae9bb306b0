#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "crowdsoft/soft_labeling.hpp"
#include "fixtures.hpp"

using namespace crowdsoft;

namespace {

std::vector<double> row_of(const SoftLabelMatrix& m, std::size_t i) {
  return {m.rows[i].probs().begin(), m.rows[i].probs().end()};
}

VoteMatrix random_votes(std::mt19937_64& rng, std::size_t items, std::size_t k) {
  std::vector<std::vector<std::uint32_t>> rows(items, std::vector<std::uint32_t>(k));
  for (auto& r : rows) {
    do {
      for (auto& c : r) c = static_cast<std::uint32_t>(rng() % 7);
    } while (std::all_of(r.begin(), r.end(), [](auto c) { return c == 0; }));
  }
  return VoteMatrix(rows);
}

}  // namespace

TEST_CASE("standard_normalize divides by the row total") {
  const auto s = standard_normalize(VoteMatrix({{3, 1}, {5, 0}}));
  CHECK(row_of(s, 0) == std::vector<double>{0.75, 0.25});
  CHECK(row_of(s, 1) == std::vector<double>{1.0, 0.0});
  CHECK(s.method_name == "standard");

  const auto three = standard_normalize(VoteMatrix({{2, 2, 2}}));
  for (double p : row_of(three, 0)) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  CHECK(fixtures::error_code([] { standard_normalize(VoteMatrix({{1, 0}, {0, 0}})); }) == ErrorCode::EmptyItem);
}

TEST_CASE("softmax_normalize exponentiates raw counts") {
  const auto s = softmax_normalize(VoteMatrix({{3, 1}, {10, 0}, {1, 0}}));
  CHECK(s.rows[0][0] == doctest::Approx(0.880797077977882444).epsilon(1e-14));
  CHECK(s.rows[0][1] == doctest::Approx(1.0 - 0.880797077977882444).epsilon(1e-13));
  CHECK(s.rows[1][0] > s.rows[2][0]);
  CHECK(s.method_name == "softmax");
}

TEST_CASE("softmax of equal counts is uniform") {
  const auto s = softmax_normalize(VoteMatrix({{0, 0}, {4, 4}}));
  CHECK(row_of(s, 0) == std::vector<double>{0.5, 0.5});
  CHECK(row_of(s, 1) == std::vector<double>{0.5, 0.5});
}

TEST_CASE("softmax survives very large counts") {
  const auto s = softmax_normalize(VoteMatrix({{100000, 99990, 0}}));
  CHECK(std::isfinite(s.rows[0][0]));
  CHECK(s.rows[0][2] > 0.0);
  CHECK(Distribution::is_valid(s.rows[0].probs(), kSimplexTolerance));
}

TEST_CASE("metadata comes from the annotation set") {
  AnnotationSetBuilder b;
  b.add("x", "a1", "neg");
  b.add("y", "a1", "pos");
  b.add("y", "a2", "pos");
  const auto a = b.build();
  const auto s = standard_normalize(a);
  CHECK(s.item_ids == std::vector<std::string>{"x", "y"});
  CHECK(s.labels == std::vector<std::string>{"neg", "pos"});
  CHECK(row_of(s, 1) == std::vector<double>{0.0, 1.0});
}

TEST_CASE("property: rows are simplex-valid with the right support") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng() % 6;
    const auto votes = random_votes(rng, 20, k);
    const auto standard = standard_normalize(votes);
    const auto soft = softmax_normalize(votes);
    for (std::size_t i = 0; i < votes.items(); ++i) {
      double s1 = 0.0;
      double s2 = 0.0;
      for (std::size_t y = 0; y < k; ++y) {
        CHECK(standard.rows[i][y] >= 0.0);
        CHECK(soft.rows[i][y] > 0.0);
        CHECK((standard.rows[i][y] == 0.0) == (votes(i, y) == 0));
        s1 += standard.rows[i][y];
        s2 += soft.rows[i][y];
      }
      CHECK(std::abs(s1 - 1.0) <= 1e-8);
      CHECK(std::abs(s2 - 1.0) <= 1e-8);
    }
  }
}

TEST_CASE("property: permuting labels permutes columns") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 2 + rng() % 5;
    const auto votes = random_votes(rng, 10, k);
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<std::vector<std::uint32_t>> permuted(votes.items(), std::vector<std::uint32_t>(k));
    for (std::size_t i = 0; i < votes.items(); ++i) {
      for (std::size_t y = 0; y < k; ++y) permuted[i][perm[y]] = votes(i, y);
    }
    const VoteMatrix pv(permuted);
    const auto a = standard_normalize(votes);
    const auto b = standard_normalize(pv);
    const auto c = softmax_normalize(votes);
    const auto d = softmax_normalize(pv);
    for (std::size_t i = 0; i < votes.items(); ++i) {
      for (std::size_t y = 0; y < k; ++y) {
        CHECK(b.rows[i][perm[y]] == doctest::Approx(a.rows[i][y]).epsilon(1e-14));
        CHECK(d.rows[i][perm[y]] == doctest::Approx(c.rows[i][y]).epsilon(1e-14));
      }
    }
  }
}

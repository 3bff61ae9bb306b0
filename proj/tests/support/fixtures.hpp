#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "crowdsoft/aggregation.hpp"
#include "crowdsoft/annotation_model.hpp"

namespace fixtures {

using Rows = std::vector<std::vector<double>>;

inline std::vector<std::string> default_labels(std::size_t k) {
  std::vector<std::string> labels;
  for (std::size_t y = 0; y < k; ++y) labels.push_back(std::string(1, static_cast<char>('A' + y)));
  return labels;
}

inline crowdsoft::SoftLabelMatrix matrix(const std::string& name, const Rows& rows) {
  crowdsoft::SoftLabelMatrix m;
  m.method_name = name;
  m.labels = default_labels(rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.item_ids.push_back("i" + std::to_string(i));
    m.rows.emplace_back(rows[i]);
  }
  return m;
}

// One single-item member per distribution.
inline crowdsoft::Ensemble single_item(const Rows& members) {
  crowdsoft::Ensemble e;
  for (std::size_t m = 0; m < members.size(); ++m) e.members.push_back(matrix("m" + std::to_string(m), {members[m]}));
  return e;
}

// Random point on the simplex; `spread` > 1 pushes mass toward a vertex.
inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t k, double spread = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& x : p) {
    x = std::pow(u(rng), spread) + 1e-6;
    total += x;
  }
  for (auto& x : p) x /= total;
  return p;
}

inline crowdsoft::Ensemble random_ensemble(std::mt19937_64& rng, std::size_t m, std::size_t k, std::size_t items,
                                           double spread = 1.0) {
  crowdsoft::Ensemble e;
  for (std::size_t j = 0; j < m; ++j) {
    Rows rows;
    for (std::size_t i = 0; i < items; ++i) rows.push_back(random_distribution(rng, k, spread));
    e.members.push_back(matrix("m" + std::to_string(j), rows));
  }
  return e;
}

// Code of the crowdsoft::Error thrown by f, if any.
inline std::optional<crowdsoft::ErrorCode> error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const crowdsoft::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("crowdsoft_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures

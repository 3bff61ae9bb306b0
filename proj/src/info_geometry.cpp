#include "crowdsoft/info_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace crowdsoft::geometry {
namespace {

void require_same_size(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "distributions over " + std::to_string(p.size()) + " and " + std::to_string(q.size()) + " labels");
  }
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  require_same_size(p, q);
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) continue;
    if (q[j] <= 0.0) return std::numeric_limits<double>::infinity();
    sum += p[j] * std::log(p[j] / q[j]);
  }
  // Rounding can leave tiny negatives when p ~= q.
  return std::max(sum, 0.0);
}

double kl_divergence(const Distribution& p, const Distribution& q) {
  return kl_divergence(p.probs(), q.probs());
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  require_same_size(p, q);
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double s = 0.5 * (p[j] + q[j]);
    const double from_p = p[j] > 0.0 ? p[j] * std::log(p[j] / s) : 0.0;
    const double from_q = q[j] > 0.0 ? q[j] * std::log(q[j] / s) : 0.0;
    // a + b == b + a, so swapping p and q gives the same bits.
    sum += 0.5 * (from_p + from_q);
  }
  return std::clamp(sum, 0.0, std::log(2.0));
}

double js_divergence(const Distribution& p, const Distribution& q) {
  return js_divergence(p.probs(), q.probs());
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) h -= xlogx(x);
  return h;
}

void require_interior(const NaturalParam& t) {
  if (t.theta.empty()) throw Error(ErrorCode::BoundaryParam, "natural parameter has no components");
  double sum = 0.0;
  for (double x : t.theta) {
    if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorCode::BoundaryParam, "component outside (0, 1)");
    sum += x;
  }
  if (!(sum < 1.0)) throw Error(ErrorCode::BoundaryParam, "components sum to 1 or more");
}

double negentropy(const NaturalParam& t) {
  require_interior(t);
  double sum = 0.0;
  double f = 0.0;
  for (double x : t.theta) {
    sum += x;
    f += x * std::log(x);
  }
  const double last = 1.0 - sum;
  return f + last * std::log(last);
}

DualParam grad_negentropy(const NaturalParam& t) {
  require_interior(t);
  double sum = 0.0;
  for (double x : t.theta) sum += x;
  const double log_last = std::log1p(-sum);
  DualParam e;
  e.eta.reserve(t.theta.size());
  for (double x : t.theta) e.eta.push_back(std::log(x) - log_last);
  return e;
}

NaturalParam grad_negentropy_inverse(const DualParam& e) {
  // Softmax over (eta_1, ..., eta_{K-1}, 0) with the max subtracted.
  double top = 0.0;
  for (double v : e.eta) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NumericalFailure, "non-finite dual parameter");
    top = std::max(top, v);
  }
  double denom = std::exp(-top);
  NaturalParam t;
  t.theta.reserve(e.eta.size());
  for (double v : e.eta) {
    t.theta.push_back(std::exp(v - top));
    denom += t.theta.back();
  }
  for (double& x : t.theta) x /= denom;
  return t;
}

NaturalParam to_natural(std::span<const double> p) {
  if (p.size() < 2) throw Error(ErrorCode::InvalidVocabulary, "need at least 2 classes");
  return NaturalParam{std::vector<double>(p.begin(), p.end() - 1)};
}

std::vector<double> to_probabilities(const NaturalParam& t) {
  std::vector<double> p(t.theta);
  double sum = 0.0;
  for (double x : t.theta) sum += x;
  p.push_back(1.0 - sum);
  return p;
}

std::vector<double> smooth(std::span<const double> p, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "smoothing epsilon must be positive");
  const double denom = 1.0 + static_cast<double>(p.size()) * epsilon;
  std::vector<double> out;
  out.reserve(p.size());
  for (double x : p) out.push_back((x + epsilon) / denom);
  return out;
}

Distribution smooth(const Distribution& p, double epsilon) { return Distribution(smooth(p.probs(), epsilon)); }

}  // namespace crowdsoft::geometry

#pragma once

#include <span>
#include <vector>

#include "crowdsoft/annotation_model.hpp"

// Divergences between categorical distributions and the natural-parameter
// view of the simplex used by the Jensen-Shannon centroid. All values are
// in nats, with 0 log 0 = 0.
namespace crowdsoft::geometry {

inline constexpr double kDefaultSmoothing = 1e-9;

// First K-1 class probabilities of a categorical distribution. The last
// class carries the remaining mass.
struct NaturalParam {
  std::vector<double> theta;
};

// Log-odds of each of the first K-1 classes against the last class.
struct DualParam {
  std::vector<double> eta;
};

// Sum_j p_j log(p_j / q_j). Returns +infinity when q_j = 0 < p_j.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const Distribution& p, const Distribution& q);

// 0.5 KL(p || s) + 0.5 KL(q || s) with s the midpoint. In [0, log 2].
double js_divergence(std::span<const double> p, std::span<const double> q);
double js_divergence(const Distribution& p, const Distribution& q);

// Shannon entropy -Sum p log p.
double entropy(std::span<const double> p);

// Throws BoundaryParam unless every theta_k > 0 and Sum theta < 1.
void require_interior(const NaturalParam& t);

// Negative entropy F(theta) of the distribution named by theta.
double negentropy(const NaturalParam& t);

// eta_k = log(theta_k / (1 - Sum theta)).
DualParam grad_negentropy(const NaturalParam& t);

// theta_k = e^{eta_k} / (1 + Sum e^{eta}). Overflow-safe for large |eta|.
NaturalParam grad_negentropy_inverse(const DualParam& e);

NaturalParam to_natural(std::span<const double> p);
std::vector<double> to_probabilities(const NaturalParam& t);

// (p + eps) / (1 + K eps): strictly interior and order-preserving.
Distribution smooth(const Distribution& p, double epsilon = kDefaultSmoothing);
std::vector<double> smooth(std::span<const double> p, double epsilon = kDefaultSmoothing);

}  // namespace crowdsoft::geometry

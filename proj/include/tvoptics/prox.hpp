#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Core>

#include "tvoptics/errors.hpp"
#include "tvoptics/operators.hpp"

namespace tvoptics {

/// Group soft-thresholding, the prox of tau * ||.||_{1,2}.
///
/// `z` is a stacked [vertical; horizontal] difference vector of length 2N;
/// group i is {z_i, z_{N+i}}. Each group is scaled by max(1 - tau/||z_g||, 0),
/// and a group of norm zero stays zero.
template <typename Scalar>
Vector<Scalar> prox_group_l12(const Eigen::Ref<const Vector<Scalar>>& z, Scalar tau) {
  if (!(tau > Scalar(0))) throw DomainError("group soft-threshold requires tau > 0");
  if (z.size() % 2 != 0) throw DimensionError("grouped vector must have even length");
  const Eigen::Index n = z.size() / 2;
  Vector<Scalar> out(z.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar a = z(i);
    const Scalar b = z(n + i);
    const Scalar norm = std::sqrt(a * a + b * b);
    const Scalar scale = norm > Scalar(0) ? std::max(Scalar(1) - tau / norm, Scalar(0)) : Scalar(0);
    out(i) = scale * a;
    out(n + i) = scale * b;
  }
  return out;
}

/// Prox of gamma * h^* via the Moreau decomposition,
///   prox_{gamma h^*}(u) = u - gamma * prox_{h/gamma}(u / gamma),
/// where `base_prox` evaluates prox_{h/gamma}.
template <typename Scalar, typename BaseProx>
Vector<Scalar> prox_conjugate(const Eigen::Ref<const Vector<Scalar>>& u, Scalar gamma,
                              BaseProx&& base_prox) {
  if (!(gamma > Scalar(0))) throw DomainError("conjugate prox requires gamma > 0");
  const Vector<Scalar> scaled = u / gamma;
  const Vector<Scalar> inner = std::invoke(base_prox, scaled);
  detail::require_size(inner.size(), u.size(), "prox_conjugate base prox output");
  return u - gamma * inner;
}

/// Brute-force prox for tests: minimizes g(u) + ||z - u||^2 / (2 gamma) over
/// u in R^k, k <= 3.
///
/// A grid of about 10^4 points over the box [z - 3 gamma, z + 3 gamma] picks
/// the start, then 100 rounds of compass search refine it (each round polls
/// +-h along every axis until no poll improves, then halves h). The result is
/// accurate to ~1e-5 in the argument for convex g.
Eigen::VectorXd prox_numeric_oracle(const std::function<double(const Eigen::VectorXd&)>& g,
                                    double gamma, const Eigen::VectorXd& z);

}  // namespace tvoptics

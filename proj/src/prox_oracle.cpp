#include <cmath>
#include <limits>

#include "tvoptics/prox.hpp"

namespace tvoptics {

Eigen::VectorXd prox_numeric_oracle(const std::function<double(const Eigen::VectorXd&)>& g,
                                    double gamma, const Eigen::VectorXd& z) {
  const Eigen::Index k = z.size();
  if (k < 1 || k > 3) throw DimensionError("prox_numeric_oracle supports 1 <= k <= 3");
  if (!(gamma > 0.0)) throw DomainError("prox_numeric_oracle requires gamma > 0");

  const auto objective = [&](const Eigen::VectorXd& u) {
    return g(u) + (z - u).squaredNorm() / (2.0 * gamma);
  };

  // Grid with ~1e4 points in total.
  const int per_axis = static_cast<int>(std::floor(std::pow(1e4, 1.0 / static_cast<double>(k)) + 1e-9));
  const double half_width = 3.0 * gamma;
  const double spacing = 2.0 * half_width / (per_axis - 1);

  Eigen::VectorXd best = z;
  double best_value = objective(z);
  Eigen::VectorXi idx = Eigen::VectorXi::Zero(k);
  Eigen::VectorXd u(k);
  while (true) {
    for (Eigen::Index d = 0; d < k; ++d) u(d) = z(d) - half_width + spacing * idx(d);
    const double value = objective(u);
    if (value < best_value) {
      best_value = value;
      best = u;
    }
    Eigen::Index d = 0;
    while (d < k && ++idx(d) == per_axis) idx(d++) = 0;
    if (d == k) break;
  }

  double step = spacing;
  for (int round = 0; round < 100; ++round) {
    bool moved = true;
    int guard = 0;
    while (moved && guard++ < 1000) {
      moved = false;
      for (Eigen::Index d = 0; d < k; ++d) {
        for (double sign : {-1.0, 1.0}) {
          Eigen::VectorXd trial = best;
          trial(d) += sign * step;
          const double value = objective(trial);
          if (value < best_value) {
            best_value = value;
            best = trial;
            moved = true;
          }
        }
      }
    }
    step *= 0.5;
  }
  return best;
}

}  // namespace tvoptics

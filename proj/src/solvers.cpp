#include "tvoptics/solvers.hpp"

namespace tvoptics {

void SolverConfig::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(gamma1 > 0.0)) throw ConfigError("gamma1 must be > 0");
  if (!(gamma2 > 0.0)) throw ConfigError("gamma2 must be > 0");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  try {
    noise_model.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("noise model: ") + e.what());
  }
}

bool pds_step_admissible(double gamma1, double gamma2, double beta) {
  constexpr double kDifferenceNormSq = 8.0;
  return gamma1 * (beta / 2.0 + gamma2 * kDifferenceNormSq) <= 1.0;
}

}  // namespace tvoptics

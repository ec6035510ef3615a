#include "tvoptics/optics.hpp"

#include <cmath>
#include <string>

#include "tvoptics/errors.hpp"

namespace tvoptics::optics {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

std::pair<ComplexAmplitude, ComplexAmplitude> beam_splitter_combine(ComplexAmplitude a,
                                                                    ComplexAmplitude b) {
  return {(a + b) * kInvSqrt2, (a - b) * kInvSqrt2};
}

std::pair<ComplexAmplitude, ComplexAmplitude> signal_splitter(ComplexAmplitude a) {
  const ComplexAmplitude half = a * kInvSqrt2;
  return {half, half};
}

void AmplifierNoiseModel::validate() const {
  if (!(noise_figure >= 1.0)) throw DomainError("noise figure must be >= 1");
  if (!(frequency_hz > 0.0)) throw DomainError("frequency must be > 0");
  if (!(bandwidth_hz > 0.0)) throw DomainError("bandwidth must be > 0");
  if (!(planck > 0.0)) throw DomainError("Planck constant must be > 0");
  // sim_scale = 0 is allowed: it switches the noise off while keeping the
  // noisy code path, which is how the zero-noise degeneracy is exercised.
  if (!(sim_scale >= 0.0)) throw DomainError("sim_scale must be >= 0");
}

double ase_noise_power(const AmplifierNoiseModel& model, double gain) {
  model.validate();
  if (!(gain >= 1.0)) {
    throw DomainError("amplifier power gain must be >= 1, got " + std::to_string(gain));
  }
  return model.noise_figure * (gain - 1.0) * model.planck * model.frequency_hz *
         model.bandwidth_hz;
}

double sim_noise_std(const AmplifierNoiseModel& model, double gain) {
  return std::sqrt(model.sim_scale * ase_noise_power(model, gain));
}

Eigen::VectorXd sample_noise_vector(const AmplifierNoiseModel& model, double gain, Eigen::Index n,
                                    NoiseEngine& engine) {
  if (n < 1) throw DimensionError("noise vector length must be >= 1");
  const double sd = sim_noise_std(model, gain);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (sd == 0.0) return out;
  std::normal_distribution<double> dist(0.0, sd);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = dist(engine);
  return out;
}

std::optional<double> gain_for_scalar_multiply(double c) {
  if (!(c > 0.0)) throw DomainError("scalar multiplier must be > 0");
  if (c <= 1.0) return std::nullopt;
  return c * c;
}

}  // namespace tvoptics::optics

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>

#include <Eigen/Core>

namespace tvoptics::optics {

/// Complex field amplitude carried by one optical path.
using ComplexAmplitude = std::complex<double>;

/// Optical power of a field amplitude, |a|^2.
inline double power(ComplexAmplitude a) { return std::norm(a); }

/// Outputs of a two-input beam splitter used as adder/subtractor:
/// o1 = (a + b)/sqrt(2), o2 = (a - b)/sqrt(2) after the phase-compensating shifts.
std::pair<ComplexAmplitude, ComplexAmplitude> beam_splitter_combine(ComplexAmplitude a,
                                                                    ComplexAmplitude b);

/// Signal splitter: one input, two outputs each carrying half the input power.
/// Both outputs are returned as a/sqrt(2); the compensating phase shifts make
/// the residual phase factor unobservable downstream.
std::pair<ComplexAmplitude, ComplexAmplitude> signal_splitter(ComplexAmplitude a);

/// ASE noise model of an erbium-doped fiber amplifier.
///
/// The added noise power over the signal bandwidth is F (G - 1) h mu B. For
/// simulation the variance is multiplied by `sim_scale`, which normalizes the
/// ~1 mW operating power of fiber links to unit signal power.
struct AmplifierNoiseModel {
  double noise_figure = 2.0;      // F, dimensionless
  double frequency_hz = 1.94e14;  // mu, ~1550 nm
  double bandwidth_hz = 1e10;     // B
  double planck = 6.62607015e-34; // h, J s
  double sim_scale = 1000.0;

  /// Throws DomainError if any field violates its range.
  void validate() const;
};

/// Added noise power in watts for power gain G >= 1.
double ase_noise_power(const AmplifierNoiseModel& model, double gain);

/// Standard deviation of the simulated additive noise, sqrt(sim_scale * power).
double sim_noise_std(const AmplifierNoiseModel& model, double gain);

/// Seeded engine shared by every noise draw of one experiment.
using NoiseEngine = std::mt19937_64;

/// i.i.d. N(0, sim_noise_std^2) vector of length n. When the standard deviation
/// is zero the engine is not advanced and a zero vector is returned.
Eigen::VectorXd sample_noise_vector(const AmplifierNoiseModel& model, double gain, Eigen::Index n,
                                    NoiseEngine& engine);

/// Power gain required to realise multiplication of an amplitude by c.
/// Attenuation (c <= 1) needs no amplifier and returns nullopt; c > 1 needs
/// power gain c^2.
std::optional<double> gain_for_scalar_multiply(double c);

/// Gains and reference noise powers of the published EDFA table.
struct NoiseTableRow {
  double gain;
  double reference_power;
};
inline constexpr NoiseTableRow kReferenceNoiseTable[] = {
    {8, 1.79e-8}, {16, 3.84e-8}, {32, 7.94e-8}, {64, 1.61e-7}, {128, 3.25e-7}, {256, 6.53e-7},
};

}  // namespace tvoptics::optics

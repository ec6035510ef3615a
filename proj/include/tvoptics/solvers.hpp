#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "tvoptics/errors.hpp"
#include "tvoptics/metrics.hpp"
#include "tvoptics/operators.hpp"
#include "tvoptics/optics.hpp"
#include "tvoptics/prox.hpp"

namespace tvoptics {

/// Parameters shared by the four TV solvers. ADMM reads `gamma`; PDS reads
/// `gamma1` and `gamma2`.
struct SolverConfig {
  double lambda = 0.03;
  double gamma = 10.0;
  double gamma1 = 0.1;
  double gamma2 = 1.0;
  int iterations = 50;
  bool noise_enabled = false;
  optics::AmplifierNoiseModel noise_model{};
  std::uint64_t seed = 0;

  /// Throws ConfigError on non-positive steps or iterations < 1.
  void validate() const;
};

/// Per-iteration diagnostics. `objective[t]` is evaluated at x_{t+1}; PSNR and
/// SSIM are filled only when a reference image is supplied (PSNR is +inf on
/// an exact match).
struct SolverTrace {
  std::vector<double> objective;
  std::vector<double> psnr;
  std::vector<double> ssim;
  bool step_size_warning = false;
};

/// Ground truth for tracing PSNR/SSIM of the iterates.
struct TraceReference {
  Eigen::VectorXd truth;
  GridShape shape;
};

template <typename Scalar>
struct SolverResult {
  Vector<Scalar> x;
  SolverTrace trace;
};

/// Initial ADMM variables; empty vectors mean zero.
template <typename Scalar>
struct AdmmInit {
  Vector<Scalar> z0;
  Vector<Scalar> v0;
};

/// Initial PDS variables; an empty x0 means A^T y (= y for denoising), an
/// empty v0 means zero.
template <typename Scalar>
struct PdsInit {
  Vector<Scalar> x0;
  Vector<Scalar> v0;
};

/// Whether PDS steps satisfy gamma1 (beta/2 + gamma2 ||D||^2) <= 1 with the
/// bound ||D||^2 <= 8. Outside this range convergence is not guaranteed.
bool pds_step_admissible(double gamma1, double gamma2, double beta);

/// 1/2 ||A x - y||^2 + lambda * TV(x).
template <typename Scalar>
Scalar objective(const Eigen::Ref<const Vector<Scalar>>& x, const Eigen::Ref<const Vector<Scalar>>& y,
                 const Observation<Scalar>& a, const DifferenceOperator<Scalar>& d, Scalar lambda) {
  detail::require_size(y.size(), a.rows(), "objective: observation");
  return Scalar(0.5) * (a.apply(x) - y).squaredNorm() + lambda * tv_seminorm(d, x);
}

namespace detail {

// Amplifier noise drawn from one engine in call order. A tap whose standard
// deviation is zero returns nullopt and leaves the engine untouched, so the
// noisy iterations reduce to the noiseless arithmetic exactly.
template <typename Scalar>
class NoiseTaps {
 public:
  NoiseTaps(const optics::AmplifierNoiseModel& model, std::uint64_t seed)
      : model_(model), engine_(seed) {}

  std::optional<Vector<Scalar>> draw(double gain, Eigen::Index n) {
    if (optics::sim_noise_std(model_, gain) == 0.0) return std::nullopt;
    return optics::sample_noise_vector(model_, gain, n, engine_).template cast<Scalar>();
  }

 private:
  optics::AmplifierNoiseModel model_;
  optics::NoiseEngine engine_;
};

template <typename Scalar>
void add_to(Vector<Scalar>& target, const std::optional<Vector<Scalar>>& noise) {
  if (noise) target += *noise;
}

template <typename Scalar>
void record(SolverTrace& trace, const Vector<Scalar>& x, const Vector<Scalar>& y,
            const Observation<Scalar>& a, const DifferenceOperator<Scalar>& d, Scalar lambda,
            const TraceReference* ref) {
  trace.objective.push_back(static_cast<double>(objective<Scalar>(x, y, a, d, lambda)));
  if (ref == nullptr) return;
  const Eigen::VectorXd xd = x.template cast<double>();
  const Eigen::Map<const Eigen::ArrayXXd> truth(ref->truth.data(), ref->shape.rows, ref->shape.cols);
  const Eigen::Map<const Eigen::ArrayXXd> est(xd.data(), ref->shape.rows, ref->shape.cols);
  trace.psnr.push_back(metrics::psnr(truth, est).value());
  trace.ssim.push_back(metrics::patch_ssim(truth, est));
}

inline void check_reference(const TraceReference* ref, Eigen::Index n) {
  if (ref == nullptr) return;
  detail::require_size(ref->truth.size(), n, "trace reference");
  detail::require_size(ref->shape.size(), n, "trace reference shape");
}

template <typename Scalar>
SolverResult<Scalar> run_admm(const Vector<Scalar>& y, const Observation<Scalar>& a,
                              const DifferenceOperator<Scalar>& d,
                              const AdmmLinearSolver<Scalar>& solver, const SolverConfig& cfg,
                              const AdmmInit<Scalar>& init, const TraceReference* ref) {
  cfg.validate();
  const Eigen::Index n = d.pixels();
  require_size(y.size(), a.rows(), "admm: observation");
  require_size(a.cols(), n, "admm: observation columns");
  require_size(solver.size(), n, "admm: linear solver");
  check_reference(ref, n);
  if (static_cast<double>(solver.gamma()) != static_cast<double>(Scalar(cfg.gamma))) {
    throw ConfigError("admm: linear solver was factorized for a different gamma");
  }

  const Scalar gamma(cfg.gamma);
  const Scalar lambda(cfg.lambda);
  const Scalar inv_gamma = Scalar(1) / gamma;
  Vector<Scalar> z = init.z0.size() ? init.z0 : Vector<Scalar>::Zero(2 * n);
  Vector<Scalar> v = init.v0.size() ? init.v0 : Vector<Scalar>::Zero(2 * n);
  require_size(z.size(), 2 * n, "admm: z0");
  require_size(v.size(), 2 * n, "admm: v0");
  const Vector<Scalar> aty = a.apply_adjoint(y);

  std::optional<NoiseTaps<Scalar>> taps;
  std::optional<double> scale_gain;
  if (cfg.noise_enabled) {
    taps.emplace(cfg.noise_model, cfg.seed);
    scale_gain = optics::gain_for_scalar_multiply(cfg.gamma > 0 ? 1.0 / cfg.gamma : 0.0);
  }

  SolverResult<Scalar> result;
  Vector<Scalar> x(n);
  for (int t = 0; t < cfg.iterations; ++t) {
    // Fixed draw order: the G=256 amplifier ahead of the prox, then the 1/gamma
    // multiplication.
    std::optional<Vector<Scalar>> n256, n_scale;
    if (taps) {
      n256 = taps->draw(256.0, 2 * n);
      if (scale_gain) n_scale = taps->draw(*scale_gain, n);
    }

    Vector<Scalar> scaled = inv_gamma * d.apply_adjoint(z - v);
    add_to(scaled, n_scale);
    x = solver.solve(aty + scaled);

    // The amplified signal D x + v (+ noise) feeds both the prox and the dual
    // update.
    Vector<Scalar> w = d.apply(x) + v;
    add_to(w, n256);
    z = prox_group_l12<Scalar>(w, gamma * lambda);
    v = w - z;

    record(result.trace, x, y, a, d, lambda, ref);
  }
  result.x = std::move(x);
  return result;
}

template <typename Scalar>
SolverResult<Scalar> run_pds(const Vector<Scalar>& y, const Observation<Scalar>& a,
                             const DifferenceOperator<Scalar>& d, const SolverConfig& cfg,
                             const PdsInit<Scalar>& init, const TraceReference* ref) {
  cfg.validate();
  const Eigen::Index n = d.pixels();
  require_size(y.size(), a.rows(), "pds: observation");
  require_size(a.cols(), n, "pds: observation columns");
  check_reference(ref, n);

  const Scalar gamma1(cfg.gamma1);
  const Scalar gamma2(cfg.gamma2);
  const Scalar lambda(cfg.lambda);
  Vector<Scalar> x = init.x0.size() ? init.x0 : a.apply_adjoint(y);
  Vector<Scalar> v = init.v0.size() ? init.v0 : Vector<Scalar>::Zero(2 * n);
  require_size(x.size(), n, "pds: x0");
  require_size(v.size(), 2 * n, "pds: v0");

  std::optional<NoiseTaps<Scalar>> taps;
  std::optional<double> gain1, gain2;
  if (cfg.noise_enabled) {
    taps.emplace(cfg.noise_model, cfg.seed);
    gain1 = optics::gain_for_scalar_multiply(cfg.gamma1);
    gain2 = optics::gain_for_scalar_multiply(cfg.gamma2);
  }

  SolverResult<Scalar> result;
  result.trace.step_size_warning =
      !pds_step_admissible(cfg.gamma1, cfg.gamma2, static_cast<double>(a.lipschitz()));

  for (int t = 0; t < cfg.iterations; ++t) {
    // Fixed draw order: G = 32, 16, 2, 256, then the gamma1 and gamma2
    // multiplications.
    std::optional<Vector<Scalar>> n32, n16, n2, n256, n_g1, n_g2;
    if (taps) {
      n32 = taps->draw(32.0, n);
      n16 = taps->draw(16.0, 2 * n);
      n2 = taps->draw(2.0, n);
      n256 = taps->draw(256.0, 2 * n);
      if (gain1) n_g1 = taps->draw(*gain1, n);
      if (gain2) n_g2 = taps->draw(*gain2, 2 * n);
    }

    // x_{t+1} = (I - g1 A^T A)(x_t + n32) + g1 A^T y - g1 D^T v_t, written as a
    // gradient step from the perturbed iterate.
    Vector<Scalar> xt = x;
    add_to(xt, n32);
    Vector<Scalar> step = gamma1 * (a.apply_adjoint(a.apply(xt) - y) + d.apply_adjoint(v));
    add_to(step, n_g1);
    Vector<Scalar> x_next = xt - step;

    // z_{t+1} = v_t + n16 + g2 D(2 x_{t+1} + n2 - x_t) + n256
    Vector<Scalar> extrapolated = Scalar(2) * x_next;
    add_to(extrapolated, n2);
    extrapolated -= x;
    Vector<Scalar> dz = gamma2 * d.apply(extrapolated);
    add_to(dz, n_g2);
    Vector<Scalar> z = v;
    add_to(z, n16);
    z += dz;
    add_to(z, n256);

    // prox of gamma2 h^* collapses to z - prox_{lambda ||.||_{1,2}}(z).
    v = z - prox_group_l12<Scalar>(z, lambda);
    x = std::move(x_next);

    record(result.trace, x, y, a, d, lambda, ref);
  }
  result.x = std::move(x);
  return result;
}

}  // namespace detail

/// ADMM for min 1/2 ||A x - y||^2 + lambda ||D x||_{1,2} with a fixed
/// iteration count. `solver` must be factorized for cfg.gamma.
template <typename Scalar>
SolverResult<Scalar> admm_tv(const Vector<Scalar>& y, const Observation<Scalar>& a,
                             const DifferenceOperator<Scalar>& d,
                             const AdmmLinearSolver<Scalar>& solver, const SolverConfig& cfg,
                             const AdmmInit<Scalar>& init = {}, const TraceReference* ref = nullptr) {
  if (cfg.noise_enabled) throw ConfigError("admm_tv: noise_enabled must be false");
  return detail::run_admm(y, a, d, solver, cfg, init, ref);
}

template <typename Scalar>
SolverResult<Scalar> admm_tv(const Vector<Scalar>& y, const Observation<Scalar>& a,
                             const DifferenceOperator<Scalar>& d, const SolverConfig& cfg,
                             const AdmmInit<Scalar>& init = {}, const TraceReference* ref = nullptr) {
  cfg.validate();
  const auto solver = build_admm_solver(a, d, Scalar(cfg.gamma));
  return admm_tv(y, a, d, solver, cfg, init, ref);
}

/// ADMM with simulated amplifier noise: a G=256 amplifier ahead of the prox
/// and, when 1/gamma > 1, an amplifier of gain 1/gamma^2 on the scaled
/// D^T (z - v) term. Noise is seeded from cfg.seed.
template <typename Scalar>
SolverResult<Scalar> admm_tv_noisy(const Vector<Scalar>& y, const Observation<Scalar>& a,
                                   const DifferenceOperator<Scalar>& d,
                                   const AdmmLinearSolver<Scalar>& solver, const SolverConfig& cfg,
                                   const AdmmInit<Scalar>& init = {},
                                   const TraceReference* ref = nullptr) {
  if (!cfg.noise_enabled) throw ConfigError("admm_tv_noisy: noise_enabled must be true");
  return detail::run_admm(y, a, d, solver, cfg, init, ref);
}

template <typename Scalar>
SolverResult<Scalar> admm_tv_noisy(const Vector<Scalar>& y, const Observation<Scalar>& a,
                                   const DifferenceOperator<Scalar>& d, const SolverConfig& cfg,
                                   const AdmmInit<Scalar>& init = {},
                                   const TraceReference* ref = nullptr) {
  cfg.validate();
  const auto solver = build_admm_solver(a, d, Scalar(cfg.gamma));
  return admm_tv_noisy(y, a, d, solver, cfg, init, ref);
}

/// Primal-dual splitting for the same problem; no matrix inversion. Steps
/// outside the admissible range set trace.step_size_warning but still run.
template <typename Scalar>
SolverResult<Scalar> pds_tv(const Vector<Scalar>& y, const Observation<Scalar>& a,
                            const DifferenceOperator<Scalar>& d, const SolverConfig& cfg,
                            const PdsInit<Scalar>& init = {}, const TraceReference* ref = nullptr) {
  if (cfg.noise_enabled) throw ConfigError("pds_tv: noise_enabled must be false");
  return detail::run_pds(y, a, d, cfg, init, ref);
}

/// PDS with amplifier noise at gains 32, 16, 2 and 256 per iteration, plus
/// gain gamma^2 amplifiers when gamma1 or gamma2 exceed 1.
template <typename Scalar>
SolverResult<Scalar> pds_tv_noisy(const Vector<Scalar>& y, const Observation<Scalar>& a,
                                  const DifferenceOperator<Scalar>& d, const SolverConfig& cfg,
                                  const PdsInit<Scalar>& init = {},
                                  const TraceReference* ref = nullptr) {
  if (!cfg.noise_enabled) throw ConfigError("pds_tv_noisy: noise_enabled must be true");
  return detail::run_pds(y, a, d, cfg, init, ref);
}

}  // namespace tvoptics

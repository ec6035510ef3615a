#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tvoptics/errors.hpp"
#include "tvoptics/solvers.hpp"

using namespace tvoptics;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const GridShape kSmall(4, 4);

SolverConfig noiseless(double gamma, int iterations) {
  SolverConfig cfg;
  cfg.gamma = gamma;
  cfg.iterations = iterations;
  return cfg;
}

double final_psnr(const VectorXd& truth, const VectorXd& x, GridShape shape) {
  const Eigen::Map<const Eigen::ArrayXXd> t(truth.data(), shape.rows, shape.cols);
  const Eigen::Map<const Eigen::ArrayXXd> e(x.data(), shape.rows, shape.cols);
  return metrics::psnr(t, e).value();
}

// Piecewise-constant 16x16 test patch with a bright square and a ramp.
VectorXd test_patch() {
  Eigen::ArrayXXd img(16, 16);
  for (int c = 0; c < 16; ++c) {
    for (int r = 0; r < 16; ++r) {
      img(r, c) = 0.2 + 0.03 * c;
      if (r >= 4 && r < 11 && c >= 5 && c < 12) img(r, c) = 0.85;
    }
  }
  return img.reshaped();
}

}  // namespace

TEST_SUITE("solvers") {
  TEST_CASE("configuration validation") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.gamma1 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.gamma = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.gamma2 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.lambda = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.noise_model.bandwidth_hz = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    const DifferenceOperator<double> d(kSmall);
    const auto a = Observation<double>::identity(16);
    SolverConfig bad;
    bad.gamma1 = 0.0;
    CHECK_THROWS_AS(pds_tv<double>(VectorXd::Zero(16), a, d, bad), ConfigError);
  }

  TEST_CASE("noise flag must match the solver variant") {
    const DifferenceOperator<double> d(kSmall);
    const auto a = Observation<double>::identity(16);
    SolverConfig cfg;
    cfg.noise_enabled = true;
    CHECK_THROWS_AS(admm_tv<double>(VectorXd::Zero(16), a, d, cfg), ConfigError);
    CHECK_THROWS_AS(pds_tv<double>(VectorXd::Zero(16), a, d, cfg), ConfigError);
    cfg.noise_enabled = false;
    CHECK_THROWS_AS(admm_tv_noisy<double>(VectorXd::Zero(16), a, d, cfg), ConfigError);
    CHECK_THROWS_AS(pds_tv_noisy<double>(VectorXd::Zero(16), a, d, cfg), ConfigError);
  }

  TEST_CASE("dimension and factorization errors propagate") {
    const DifferenceOperator<double> d(kSmall);
    const auto a = Observation<double>::identity(16);
    CHECK_THROWS_AS(admm_tv<double>(VectorXd::Zero(15), a, d, SolverConfig{}), DimensionError);
    CHECK_THROWS_AS(pds_tv<double>(VectorXd::Zero(15), a, d, SolverConfig{}), DimensionError);
    const auto zero = Observation<double>::dense(MatrixXd::Zero(16, 16));
    CHECK_THROWS_AS(admm_tv<double>(VectorXd::Zero(16), zero, d, SolverConfig{}), FactorizationError);
    const auto solver = build_admm_solver(a, d, 1.0);
    CHECK_THROWS_AS(admm_tv<double>(VectorXd::Zero(16), a, d, solver, noiseless(10.0, 5)),
                    ConfigError);
  }

  TEST_CASE("objective value") {
    const DifferenceOperator<double> d(GridShape(2, 2));
    const auto a = Observation<double>::identity(4);
    const VectorXd c = VectorXd::Constant(4, 0.4);
    CHECK(objective<double>(c, c, a, d, 0.5) == 0.0);
    VectorXd y(4);
    y << 1, 1, 0, 0;
    CHECK(objective<double>(VectorXd::Zero(4), y, a, d, 0.5) == doctest::Approx(1.0));

    std::mt19937_64 rng(2);
    const MatrixXd dense = oracle::dense_difference(2, 2);
    for (int trial = 0; trial < 10; ++trial) {
      const VectorXd x = oracle::uniform_vector(4, rng);
      const VectorXd yy = oracle::uniform_vector(4, rng);
      CHECK(objective<double>(x, yy, a, d, 0.03) ==
            doctest::Approx(oracle::dense_objective(dense, x, yy, 0.03)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(objective<double>(c, VectorXd::Zero(3), a, d, 0.5), DimensionError);
  }

  TEST_CASE("ADMM and PDS reach the oracle minimum on random 4x4 instances") {
    std::mt19937_64 rng(2025);
    const DifferenceOperator<double> d(kSmall);
    const auto a = Observation<double>::identity(16);
    const MatrixXd dense = oracle::dense_difference(4, 4);
    SolverConfig pds_cfg;
    pds_cfg.gamma1 = 0.1;
    pds_cfg.gamma2 = 1.0;
    pds_cfg.iterations = 2000;
    for (int instance = 0; instance < 20; ++instance) {
      CAPTURE(instance);
      const VectorXd y = oracle::uniform_vector(16, rng);
      const auto best = oracle::dual_tv_minimum(dense, y, 0.03);
      REQUIRE(best.duality_gap <= 1e-9);
      const auto admm = admm_tv<double>(y, a, d, noiseless(1.0, 500));
      const auto pds = pds_tv<double>(y, a, d, pds_cfg);
      const double f_admm = oracle::dense_objective(dense, admm.x, y, 0.03);
      const double f_pds = oracle::dense_objective(dense, pds.x, y, 0.03);
      CHECK(std::abs(f_admm - best.objective) <= 1e-6);
      CHECK(std::abs(f_pds - best.objective) <= 1e-6);
      CHECK((pds.x - admm.x).norm() <= 1e-3 * admm.x.norm());
      CHECK(admm.trace.objective.size() == 500);
      CHECK(pds.trace.objective.size() == 2000);
      CHECK_FALSE(pds.trace.step_size_warning);
    }
  }

  TEST_CASE("constant observations are fixed points") {
    const DifferenceOperator<double> d(kSmall);
    const auto a = Observation<double>::identity(16);
    const VectorXd y = VectorXd::Constant(16, 0.61);
    const auto admm = admm_tv<double>(y, a, d, noiseless(10.0, 1));
    CHECK((admm.x - y).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(admm.trace.objective.front() <= 1e-15);
    const auto admm_long = admm_tv<double>(y, a, d, noiseless(10.0, 50));
    CHECK((admm_long.x - y).cwiseAbs().maxCoeff() <= 1e-15);

    PdsInit<double> init;
    init.x0 = y;
    const auto pds = pds_tv<double>(y, a, d, SolverConfig{}, init);
    CHECK(pds.x == y);
  }

  TEST_CASE("vanishing regularization returns the observation") {
    std::mt19937_64 rng(6);
    const DifferenceOperator<double> d(kSmall);
    const auto a = Observation<double>::identity(16);
    const VectorXd y = oracle::uniform_vector(16, rng);
    SolverConfig cfg = noiseless(1.0, 500);
    cfg.lambda = 1e-12;
    CHECK((admm_tv<double>(y, a, d, cfg).x - y).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((pds_tv<double>(y, a, d, cfg).x - y).cwiseAbs().maxCoeff() <= 1e-6);
  }

  TEST_CASE("shift equivariance") {
    std::mt19937_64 rng(12);
    const DifferenceOperator<double> d(kSmall);
    const auto a = Observation<double>::identity(16);
    for (int trial = 0; trial < 5; ++trial) {
      const VectorXd y = oracle::uniform_vector(16, rng);
      const VectorXd shifted = y.array() + 0.25;
      const auto base = admm_tv<double>(y, a, d, noiseless(1.0, 500));
      const auto moved = admm_tv<double>(shifted, a, d, noiseless(1.0, 500));
      CHECK((moved.x.array() - 0.25 - base.x.array()).abs().maxCoeff() <= 1e-8);
      SolverConfig pcfg = noiseless(1.0, 2000);
      const auto pbase = pds_tv<double>(y, a, d, pcfg);
      const auto pmoved = pds_tv<double>(shifted, a, d, pcfg);
      CHECK((pmoved.x.array() - 0.25 - pbase.x.array()).abs().maxCoeff() <= 1e-8);
    }
  }

  TEST_CASE("ADMM objective is nonincreasing after five iterations") {
    // The random 4x4 suite of the optimality test.
    std::mt19937_64 rng(2025);
    const DifferenceOperator<double> d(kSmall);
    const auto a = Observation<double>::identity(16);
    for (int instance = 0; instance < 20; ++instance) {
      const VectorXd y = oracle::uniform_vector(16, rng);
      const auto result = admm_tv<double>(y, a, d, noiseless(1.0, 500));
      const auto& f = result.trace.objective;
      for (std::size_t t = 5; t + 1 < f.size(); ++t) {
        CAPTURE(instance);
        CAPTURE(t);
        REQUIRE(f[t + 1] <= f[t] * (1.0 + 1e-12));
      }
    }
  }

  TEST_CASE("zero simulation scale reproduces the noiseless solvers bit for bit") {
    std::mt19937_64 rng(31);
    const GridShape shape(16, 16);
    const DifferenceOperator<double> d(shape);
    const auto a = Observation<double>::identity(256);
    const VectorXd y = test_patch() + oracle::normal_vector(256, rng, 10.0 / 255.0);
    for (double gamma : {0.1, 10.0}) {
      SolverConfig cfg = noiseless(gamma, 50);
      const auto clean = admm_tv<double>(y, a, d, cfg);
      cfg.noise_enabled = true;
      cfg.noise_model.sim_scale = 0.0;
      cfg.seed = 99;
      const auto noisy = admm_tv_noisy<double>(y, a, d, cfg);
      CHECK(noisy.x == clean.x);
      CHECK(noisy.trace.objective == clean.trace.objective);
    }
    for (double gamma2 : {1.0, 5.0}) {
      SolverConfig cfg;
      cfg.gamma1 = 0.1;
      cfg.gamma2 = gamma2;
      const auto clean = pds_tv<double>(y, a, d, cfg);
      cfg.noise_enabled = true;
      cfg.noise_model.sim_scale = 0.0;
      const auto noisy = pds_tv_noisy<double>(y, a, d, cfg);
      CHECK(noisy.x == clean.x);
      CHECK(noisy.trace.objective == clean.trace.objective);
    }
  }

  TEST_CASE("noisy runs are reproducible from the seed") {
    std::mt19937_64 rng(41);
    const GridShape shape(16, 16);
    const DifferenceOperator<double> d(shape);
    const auto a = Observation<double>::identity(256);
    const VectorXd truth = test_patch();
    const VectorXd y = truth + oracle::normal_vector(256, rng, 10.0 / 255.0);
    const TraceReference ref{truth, shape};
    SolverConfig cfg;
    cfg.noise_enabled = true;
    cfg.seed = 5;
    const auto r1 = admm_tv_noisy<double>(y, a, d, cfg, {}, &ref);
    const auto r2 = admm_tv_noisy<double>(y, a, d, cfg, {}, &ref);
    CHECK(r1.x == r2.x);
    CHECK(r1.trace.objective == r2.trace.objective);
    CHECK(r1.trace.psnr == r2.trace.psnr);
    CHECK(r1.trace.ssim == r2.trace.ssim);
    cfg.seed = 6;
    CHECK(admm_tv_noisy<double>(y, a, d, cfg).x != r1.x);

    SolverConfig pcfg;
    pcfg.noise_enabled = true;
    pcfg.gamma2 = 5.0;
    pcfg.seed = 5;
    const auto p1 = pds_tv_noisy<double>(y, a, d, pcfg, {}, &ref);
    const auto p2 = pds_tv_noisy<double>(y, a, d, pcfg, {}, &ref);
    CHECK(p1.x == p2.x);
    CHECK(p1.trace.psnr == p2.trace.psnr);
    CHECK(p1.trace.step_size_warning);
  }

  TEST_CASE("trace lengths and reference metrics") {
    const GridShape shape(16, 16);
    const DifferenceOperator<double> d(shape);
    const auto a = Observation<double>::identity(256);
    const VectorXd truth = test_patch();
    const TraceReference ref{truth, shape};
    const auto r = admm_tv<double>(truth, a, d, noiseless(10.0, 7), {}, &ref);
    CHECK(r.trace.objective.size() == 7);
    CHECK(r.trace.psnr.size() == 7);
    CHECK(r.trace.ssim.size() == 7);
    CHECK(r.trace.psnr.back() == doctest::Approx(final_psnr(truth, r.x, shape)));
    const auto plain = admm_tv<double>(truth, a, d, noiseless(10.0, 7));
    CHECK(plain.trace.psnr.empty());
    const TraceReference wrong{VectorXd::Zero(10), shape};
    CHECK_THROWS_AS(admm_tv<double>(truth, a, d, noiseless(10.0, 7), {}, &wrong), DimensionError);
  }

  TEST_CASE("PDS step-size admissibility") {
    CHECK(pds_step_admissible(0.1, 1.0, 1.0));
    CHECK_FALSE(pds_step_admissible(0.1, 5.0, 1.0));
    CHECK(pds_step_admissible(0.1, 1.1875, 1.0));
  }

  TEST_CASE("amplifier noise costs little PSNR on a 16x16 patch") {
    const GridShape shape(16, 16);
    const DifferenceOperator<double> d(shape);
    const auto a = Observation<double>::identity(256);
    const VectorXd truth = test_patch();
    std::mt19937_64 rng(1000);
    const VectorXd y = truth + oracle::normal_vector(256, rng, 10.0 / 255.0);

    const SolverConfig admm_cfg = noiseless(10.0, 50);
    const double admm_clean = final_psnr(truth, admm_tv<double>(y, a, d, admm_cfg).x, shape);
    SolverConfig pds_best;
    pds_best.gamma1 = 0.1;
    pds_best.gamma2 = 1.0;
    const double pds_clean = final_psnr(truth, pds_tv<double>(y, a, d, pds_best).x, shape);

    double admm_noisy = 0.0;
    double pds_noisy = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
      SolverConfig cfg = admm_cfg;
      cfg.noise_enabled = true;
      cfg.seed = static_cast<std::uint64_t>(s);
      admm_noisy += final_psnr(truth, admm_tv_noisy<double>(y, a, d, cfg).x, shape);
      SolverConfig pcfg;
      pcfg.gamma1 = 0.1;
      pcfg.gamma2 = 5.0;
      pcfg.noise_enabled = true;
      pcfg.seed = static_cast<std::uint64_t>(s);
      pds_noisy += final_psnr(truth, pds_tv_noisy<double>(y, a, d, pcfg).x, shape);
    }
    admm_noisy /= seeds;
    pds_noisy /= seeds;
    MESSAGE("ADMM noiseless " << admm_clean << " dB, noisy " << admm_noisy << " dB");
    MESSAGE("PDS noiseless " << pds_clean << " dB, noisy " << pds_noisy << " dB");
    CHECK(admm_clean - admm_noisy <= 1.0);
    CHECK(pds_clean - pds_noisy <= 2.5);
  }

  TEST_CASE("single precision instantiation") {
    const GridShape shape(4, 4);
    const DifferenceOperator<float> d(shape);
    const auto a = Observation<float>::identity(16);
    std::mt19937_64 rng(3);
    const VectorXd y = oracle::uniform_vector(16, rng);
    const auto single = admm_tv<float>(y.cast<float>(), a, d, noiseless(1.0, 200));
    const DifferenceOperator<double> dd(shape);
    const auto dbl = admm_tv<double>(y, Observation<double>::identity(16), dd, noiseless(1.0, 200));
    CHECK((single.x.cast<double>() - dbl.x).cwiseAbs().maxCoeff() <= 1e-4);
    SolverConfig cfg;
    cfg.noise_enabled = true;
    const auto noisy = pds_tv_noisy<float>(y.cast<float>(), a, d, cfg);
    CHECK(noisy.x.allFinite());
  }
}

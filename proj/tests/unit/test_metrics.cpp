#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "tvoptics/errors.hpp"
#include "tvoptics/imaging.hpp"
#include "tvoptics/metrics.hpp"

using namespace tvoptics;
using namespace tvoptics::metrics;
using Eigen::ArrayXXd;

namespace {

// Direct per-window SSIM: loops over every window position and evaluates the
// weighted moments from scratch.
double naive_ssim(const ArrayXXd& x, const ArrayXXd& y) {
  const int w = 11;
  const double sigma = 1.5;
  const double c1 = std::pow(0.01, 2);
  const double c2 = std::pow(0.03, 2);
  std::vector<double> g(w);
  double gsum = 0.0;
  for (int i = 0; i < w; ++i) {
    const double d = i - (w - 1) / 2.0;
    g[i] = std::exp(-d * d / (2 * sigma * sigma));
    gsum += g[i];
  }
  double total = 0.0;
  int count = 0;
  for (int r0 = 0; r0 + w <= x.rows(); ++r0) {
    for (int c0 = 0; c0 + w <= x.cols(); ++c0) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = 0; i < w; ++i) {
        for (int j = 0; j < w; ++j) {
          const double wt = g[i] * g[j] / (gsum * gsum);
          mx += wt * x(r0 + i, c0 + j);
          my += wt * y(r0 + i, c0 + j);
        }
      }
      for (int i = 0; i < w; ++i) {
        for (int j = 0; j < w; ++j) {
          const double wt = g[i] * g[j] / (gsum * gsum);
          const double dx = x(r0 + i, c0 + j) - mx;
          const double dy = y(r0 + i, c0 + j) - my;
          sxx += wt * dx * dx;
          syy += wt * dy * dy;
          sxy += wt * dx * dy;
        }
      }
      total += ((2 * mx * my + c1) * (2 * sxy + c2)) /
               ((mx * mx + my * my + c1) * (sxx + syy + c2));
      ++count;
    }
  }
  return total / count;
}

ArrayXXd random_image(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  return oracle::uniform_vector(r * c, rng).reshaped(r, c).array();
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("PSNR of a known mean squared error") {
    const ArrayXXd ref = ArrayXXd::Zero(4, 4);
    const ArrayXXd test = ArrayXXd::Constant(4, 4, 0.1);
    const Psnr p = psnr(ref, test);
    CHECK_FALSE(p.exact);
    CHECK(p.db == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(psnr(ref, test, 255.0).db == doctest::Approx(20.0 + 20.0 * std::log10(255.0)));
  }

  TEST_CASE("identical inputs are flagged exact") {
    std::mt19937_64 rng(1);
    const ArrayXXd img = random_image(8, 8, rng);
    const Psnr p = psnr(img, img);
    CHECK(p.exact);
    CHECK(std::isinf(p.value()));
    CHECK(p.value() > 0);
  }

  TEST_CASE("PSNR size errors") {
    CHECK_THROWS_AS(psnr(ArrayXXd::Zero(4, 4), ArrayXXd::Zero(4, 5)), DimensionError);
    CHECK_THROWS_AS(ssim(ArrayXXd::Zero(16, 16), ArrayXXd::Zero(16, 15)), DimensionError);
    CHECK_THROWS_AS(ssim(ArrayXXd::Zero(8, 8), ArrayXXd::Zero(8, 8)), DimensionError);
  }

  TEST_CASE("observed PSNR at sigma 10/255 is about 28.13 dB") {
    std::mt19937_64 rng(2);
    const ArrayXXd img = random_image(256, 256, rng);
    const ArrayXXd noisy = imaging::degrade(img, 10.0 / 255.0, 8);
    const double db = psnr(img, noisy).value();
    CHECK(std::abs(db - 20.0 * std::log10(25.5)) <= 0.3);
    CHECK(std::abs(db - 28.13) <= 0.3);
    CHECK(db >= 27.8);
    CHECK(db <= 28.5);
  }

  TEST_CASE("PSNR is symmetric and shift invariant") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const ArrayXXd a = random_image(16, 16, rng);
      const ArrayXXd b = random_image(16, 16, rng);
      CHECK(psnr(a, b).db == psnr(b, a).db);
      CHECK(psnr(a + 0.3, b + 0.3).db == doctest::Approx(psnr(a, b).db).epsilon(1e-12));
    }
  }

  TEST_CASE("SSIM of identical images is one") {
    std::mt19937_64 rng(4);
    const ArrayXXd img = random_image(32, 24, rng);
    CHECK(ssim(img, img) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ssim_global(img, img) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(patch_ssim(img, img) == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("SSIM drops under heavy noise") {
    std::mt19937_64 rng(5);
    const ArrayXXd img = random_image(32, 32, rng);
    const ArrayXXd noise = oracle::normal_vector(32 * 32, rng, 0.5).reshaped(32, 32).array();
    CHECK(ssim(img, img + noise) < 1.0);
    CHECK(ssim(img, img + noise) < 0.5);
  }

  TEST_CASE("SSIM matches a direct windowed implementation") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 3; ++trial) {
      const ArrayXXd a = random_image(16, 20, rng);
      const ArrayXXd b = (a + oracle::normal_vector(320, rng, 0.1).reshaped(16, 20).array());
      CHECK(ssim(a, b) == doctest::Approx(naive_ssim(a, b)).epsilon(1e-10));
      CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-14));
    }
  }

  TEST_CASE("SSIM of a constant pair reduces to the luminance term") {
    const ArrayXXd a = ArrayXXd::Constant(16, 16, 0.4);
    const ArrayXXd b = a + 0.1;
    const double c1 = 1e-4;
    const double expected = (2 * 0.4 * 0.5 + c1) / (0.4 * 0.4 + 0.5 * 0.5 + c1);
    CHECK(ssim(a, b) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(naive_ssim(a, b) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(ssim_global(a, b) == doctest::Approx(expected).epsilon(1e-12));
  }

  TEST_CASE("global SSIM follows the single-window formula") {
    std::mt19937_64 rng(7);
    const ArrayXXd a = random_image(8, 8, rng);
    const ArrayXXd b = random_image(8, 8, rng);
    const double n = 64.0;
    const double ma = a.mean();
    const double mb = b.mean();
    // Population moments, as a uniform window weights every pixel 1/n.
    const double va = (a - ma).square().sum() / n;
    const double vb = (b - mb).square().sum() / n;
    const double cov = ((a - ma) * (b - mb)).sum() / n;
    const double c1 = 1e-4, c2 = 9e-4;
    const double expected = ((2 * ma * mb + c1) * (2 * cov + c2)) /
                            ((ma * ma + mb * mb + c1) * (va + vb + c2));
    CHECK(ssim_global(a, b) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(patch_ssim(a, b) == ssim_global(a, b));
  }

  TEST_CASE("aggregate report") {
    auto single = aggregate_report({Psnr{31.5, false}}, {0.8});
    CHECK(single.mean_psnr == 31.5);
    CHECK(single.mean_ssim == 0.8);

    auto two = aggregate_report({Psnr{20.0, false}, Psnr{30.0, false}}, {0.5, 0.7});
    CHECK(two.mean_psnr == doctest::Approx(25.0));
    CHECK(two.mean_ssim == doctest::Approx(0.6));
    CHECK(two.patch_psnr.size() == 2);

    auto with_exact = aggregate_report({Psnr{0.0, true}, Psnr{30.0, false}}, {1.0, 0.7});
    CHECK(with_exact.mean_psnr == 30.0);
    CHECK(with_exact.exact_count == 1);
    auto all_exact = aggregate_report({Psnr{0.0, true}}, {1.0});
    CHECK(std::isinf(all_exact.mean_psnr));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(20.0, 40.0);
    std::vector<Psnr> ps;
    std::vector<double> ss;
    double sum_p = 0.0, sum_s = 0.0;
    for (int i = 0; i < 256; ++i) {
      const double p = u(rng);
      const double s = u(rng) / 40.0;
      ps.push_back({p, false});
      ss.push_back(s);
      sum_p += p;
      sum_s += s;
    }
    const auto report = aggregate_report(ps, ss);
    CHECK(std::abs(report.mean_psnr - sum_p / 256.0) <= 1e-12);
    CHECK(std::abs(report.mean_ssim - sum_s / 256.0) <= 1e-12);
    CHECK(report.patch_ssim.size() == 256);

    CHECK_THROWS_AS(aggregate_report({}, {}), ConfigError);
    CHECK_THROWS_AS(aggregate_report({Psnr{1.0, false}}, {0.1, 0.2}), DimensionError);
  }
}

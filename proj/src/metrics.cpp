#include "tvoptics/metrics.hpp"

#include <cmath>
#include <limits>

#include "tvoptics/errors.hpp"

namespace tvoptics::metrics {

double Psnr::value() const { return exact ? std::numeric_limits<double>::infinity() : db; }

Psnr psnr(const Eigen::Ref<const Eigen::ArrayXXd>& reference,
          const Eigen::Ref<const Eigen::ArrayXXd>& test, double peak) {
  if (reference.rows() != test.rows() || reference.cols() != test.cols()) {
    throw DimensionError("psnr: image sizes differ");
  }
  if (reference.size() == 0) throw DimensionError("psnr: empty input");
  const double mse = (reference - test).square().mean();
  if (mse == 0.0) return {0.0, true};
  return {10.0 * std::log10(peak * peak / mse), false};
}

namespace {

void check_pair(const Eigen::Ref<const Eigen::ArrayXXd>& a, const Eigen::Ref<const Eigen::ArrayXXd>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("ssim: image sizes differ");
  if (a.size() == 0) throw DimensionError("ssim: empty input");
}

Eigen::ArrayXXd gaussian_window(int size, double sigma) {
  Eigen::ArrayXd g(size);
  const double c = (size - 1) / 2.0;
  for (int i = 0; i < size; ++i) g(i) = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
  g /= g.sum();
  return g.matrix() * g.matrix().transpose();
}

// SSIM of one window position given weights w summing to one.
double ssim_at(const Eigen::Ref<const Eigen::ArrayXXd>& x, const Eigen::Ref<const Eigen::ArrayXXd>& y,
               const Eigen::ArrayXXd& w, double c1, double c2) {
  const double mx = (w * x).sum();
  const double my = (w * y).sum();
  const double sxx = (w * x * x).sum() - mx * mx;
  const double syy = (w * y * y).sum() - my * my;
  const double sxy = (w * x * y).sum() - mx * my;
  return ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) /
         ((mx * mx + my * my + c1) * (sxx + syy + c2));
}

}  // namespace

double ssim(const Eigen::Ref<const Eigen::ArrayXXd>& reference,
            const Eigen::Ref<const Eigen::ArrayXXd>& test, const SsimParams& params) {
  check_pair(reference, test);
  const int win = params.window;
  if (reference.rows() < win || reference.cols() < win) {
    throw DimensionError("ssim: image smaller than the " + std::to_string(win) + "x" +
                         std::to_string(win) + " window");
  }
  const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
  const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
  const Eigen::ArrayXXd w = gaussian_window(win, params.sigma);
  double total = 0.0;
  const Eigen::Index nr = reference.rows() - win + 1;
  const Eigen::Index nc = reference.cols() - win + 1;
  for (Eigen::Index c = 0; c < nc; ++c) {
    for (Eigen::Index r = 0; r < nr; ++r) {
      total += ssim_at(reference.block(r, c, win, win), test.block(r, c, win, win), w, c1, c2);
    }
  }
  return total / static_cast<double>(nr * nc);
}

double ssim_global(const Eigen::Ref<const Eigen::ArrayXXd>& reference,
                   const Eigen::Ref<const Eigen::ArrayXXd>& test, const SsimParams& params) {
  check_pair(reference, test);
  const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
  const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
  const Eigen::ArrayXXd w = Eigen::ArrayXXd::Constant(reference.rows(), reference.cols(),
                                                      1.0 / static_cast<double>(reference.size()));
  return ssim_at(reference, test, w, c1, c2);
}

double patch_ssim(const Eigen::Ref<const Eigen::ArrayXXd>& reference,
                  const Eigen::Ref<const Eigen::ArrayXXd>& test, const SsimParams& params) {
  if (reference.rows() >= params.window && reference.cols() >= params.window) {
    return ssim(reference, test, params);
  }
  return ssim_global(reference, test, params);
}

RestorationReport aggregate_report(std::vector<Psnr> patch_psnr, std::vector<double> patch_ssim) {
  if (patch_psnr.empty() || patch_ssim.empty()) throw ConfigError("aggregate_report: no patches");
  if (patch_psnr.size() != patch_ssim.size()) {
    throw DimensionError("aggregate_report: PSNR and SSIM lists differ in length");
  }
  RestorationReport report;
  double psnr_sum = 0.0;
  for (const Psnr& p : patch_psnr) {
    if (p.exact) {
      ++report.exact_count;
    } else {
      psnr_sum += p.db;
    }
  }
  const std::size_t finite = patch_psnr.size() - report.exact_count;
  report.mean_psnr = finite > 0 ? psnr_sum / static_cast<double>(finite)
                                : std::numeric_limits<double>::infinity();
  double ssim_sum = 0.0;
  for (double s : patch_ssim) ssim_sum += s;
  report.mean_ssim = ssim_sum / static_cast<double>(patch_ssim.size());
  report.patch_psnr = std::move(patch_psnr);
  report.patch_ssim = std::move(patch_ssim);
  return report;
}

}  // namespace tvoptics::metrics

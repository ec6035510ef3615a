#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tvoptics::metrics {

/// PSNR in dB. Identical inputs have no finite PSNR and are flagged `exact`.
struct Psnr {
  double db = 0.0;
  bool exact = false;

  /// dB value, or +inf for an exact match.
  double value() const;
};

Psnr psnr(const Eigen::Ref<const Eigen::ArrayXXd>& reference,
          const Eigen::Ref<const Eigen::ArrayXXd>& test, double peak = 1.0);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean SSIM over all positions where the Gaussian window fits entirely
/// inside the image (no padding). Needs both sides >= window.
double ssim(const Eigen::Ref<const Eigen::ArrayXXd>& reference,
            const Eigen::Ref<const Eigen::ArrayXXd>& test, const SsimParams& params = {});

/// SSIM with one uniform window covering the whole array.
double ssim_global(const Eigen::Ref<const Eigen::ArrayXXd>& reference,
                   const Eigen::Ref<const Eigen::ArrayXXd>& test, const SsimParams& params = {});

/// SSIM of one patch: windowed when the patch holds a full window, global
/// otherwise.
double patch_ssim(const Eigen::Ref<const Eigen::ArrayXXd>& reference,
                  const Eigen::Ref<const Eigen::ArrayXXd>& test, const SsimParams& params = {});

struct RestorationReport {
  std::vector<Psnr> patch_psnr;
  std::vector<double> patch_ssim;
  double mean_psnr = 0.0;  // over non-exact patches
  double mean_ssim = 0.0;
  std::size_t exact_count = 0;
  std::string config_echo;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
};

/// Arithmetic means of per-patch metrics. Exact-PSNR patches are left out of
/// the PSNR mean and counted instead. If every patch is exact, mean_psnr is
/// +inf.
RestorationReport aggregate_report(std::vector<Psnr> patch_psnr, std::vector<double> patch_ssim);

}  // namespace tvoptics::metrics

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tvoptics/imaging.hpp"
#include "tvoptics/metrics.hpp"
#include "tvoptics/solvers.hpp"

namespace tvoptics {

enum class Method { Admm, Pds };

/// Solver selection: method x {noiseless, noisy}.
struct Algorithm {
  Method method = Method::Admm;
  bool noisy = false;

  std::string name() const;
};

/// "admm" / "pds"; throws ConfigError otherwise.
Method parse_method(std::string_view text);
std::string_view method_name(Method method);

/// Seed of patch `index` derived from the experiment seed, independent of the
/// order in which patches are processed.
std::uint64_t patch_seed(std::uint64_t master_seed, std::size_t index);

struct RestoreResult {
  imaging::ImageTensor restored;  // unclamped solver output
  std::vector<SolverTrace> traces;  // one per patch, patch order
  bool step_size_warning = false;
};

struct RestoreOptions {
  Eigen::Index patch_size = 16;
  unsigned workers = 1;
  /// Ground truth used to trace per-iteration PSNR/SSIM; optional.
  const imaging::ImageTensor* truth = nullptr;
  /// Processing order of patch indices; defaults to 0..P-1. Results do not
  /// depend on it.
  std::span<const std::size_t> order{};
};

/// Restores every patch independently with A = I and reassembles the image.
/// cfg.noise_enabled is overridden by `algorithm.noisy`; patch k uses seed
/// patch_seed(cfg.seed, k).
RestoreResult restore_image(const imaging::ImageTensor& observed, Algorithm algorithm,
                            const SolverConfig& cfg, const RestoreOptions& options = {});

/// Per-patch PSNR/SSIM of `test` against `truth`, aggregated by patch mean.
metrics::RestorationReport evaluate_patches(const imaging::ImageTensor& truth,
                                            const imaging::ImageTensor& test,
                                            Eigen::Index patch_size);

/// Whole-image PSNR and windowed SSIM.
metrics::RestorationReport evaluate_whole(const imaging::ImageTensor& truth,
                                          const imaging::ImageTensor& test);

/// Patch-averaged trace: objective summed over patches, PSNR/SSIM averaged
/// (PSNR over patches that are not exact).
SolverTrace combine_traces(const std::vector<SolverTrace>& traces);

}  // namespace tvoptics

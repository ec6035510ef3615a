#include "tvoptics/restore.hpp"

#include <limits>
#include <numeric>

#include "tvoptics/parallel.hpp"

namespace tvoptics {

std::string Algorithm::name() const {
  return std::string(method_name(method)) + (noisy ? "-noisy" : "-noiseless");
}

Method parse_method(std::string_view text) {
  if (text == "admm") return Method::Admm;
  if (text == "pds") return Method::Pds;
  throw ConfigError("unknown algorithm '" + std::string(text) + "' (expected admm or pds)");
}

std::string_view method_name(Method method) { return method == Method::Admm ? "admm" : "pds"; }

std::uint64_t patch_seed(std::uint64_t master_seed, std::size_t index) {
  // splitmix64 finalizer over a Weyl-sequence step.
  std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RestoreResult restore_image(const imaging::ImageTensor& observed, Algorithm algorithm,
                            const SolverConfig& cfg, const RestoreOptions& options) {
  SolverConfig base = cfg;
  base.noise_enabled = algorithm.noisy;
  base.validate();

  const imaging::PatchSet input = imaging::patchify(observed, options.patch_size);
  std::optional<imaging::PatchSet> truth;
  if (options.truth != nullptr) {
    if (options.truth->rows() != observed.rows() || options.truth->cols() != observed.cols()) {
      throw DimensionError("ground truth and observed image differ in size");
    }
    truth = imaging::patchify(*options.truth, options.patch_size);
  }

  const Eigen::Index p = options.patch_size;
  const GridShape shape(p, p);
  const DifferenceOperator<double> d(shape);
  const auto a = Observation<double>::identity(shape.size());
  std::optional<AdmmLinearSolver<double>> solver;
  if (algorithm.method == Method::Admm) solver.emplace(a, d, base.gamma);

  const std::size_t count = input.patches.size();
  std::vector<std::size_t> order(options.order.begin(), options.order.end());
  if (order.empty()) {
    order.resize(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  std::vector<bool> seen(count, false);
  for (std::size_t k : order) {
    if (k >= count || seen[k]) throw ConfigError("patch order must list every patch once");
    seen[k] = true;
  }
  if (order.size() != count) throw ConfigError("patch order must list every patch once");

  imaging::PatchSet output = input;
  std::vector<SolverTrace> traces(count);

  parallel_for(count, options.workers, [&](std::size_t slot) {
    const std::size_t k = order[slot];
    SolverConfig patch_cfg = base;
    patch_cfg.seed = patch_seed(base.seed, k);
    const Eigen::VectorXd y = input.patches[k].reshaped();
    std::optional<TraceReference> ref;
    if (truth) ref = TraceReference{truth->patches[k].reshaped(), shape};
    const TraceReference* ref_ptr = ref ? &*ref : nullptr;

    SolverResult<double> result;
    if (algorithm.method == Method::Admm) {
      result = algorithm.noisy ? admm_tv_noisy<double>(y, a, d, *solver, patch_cfg, {}, ref_ptr)
                               : admm_tv<double>(y, a, d, *solver, patch_cfg, {}, ref_ptr);
    } else {
      result = algorithm.noisy ? pds_tv_noisy<double>(y, a, d, patch_cfg, {}, ref_ptr)
                               : pds_tv<double>(y, a, d, patch_cfg, {}, ref_ptr);
    }
    output.patches[k] = result.x.reshaped(p, p).array();
    traces[k] = std::move(result.trace);
  });

  RestoreResult out;
  out.restored = imaging::depatchify(output);
  out.step_size_warning = !traces.empty() && traces.front().step_size_warning;
  out.traces = std::move(traces);
  return out;
}

metrics::RestorationReport evaluate_patches(const imaging::ImageTensor& truth,
                                            const imaging::ImageTensor& test,
                                            Eigen::Index patch_size) {
  if (truth.rows() != test.rows() || truth.cols() != test.cols()) {
    throw DimensionError("evaluate_patches: image sizes differ");
  }
  const imaging::PatchSet a = imaging::patchify(truth, patch_size);
  const imaging::PatchSet b = imaging::patchify(test, patch_size);
  std::vector<metrics::Psnr> psnr;
  std::vector<double> ssim;
  psnr.reserve(a.patches.size());
  ssim.reserve(a.patches.size());
  for (std::size_t k = 0; k < a.patches.size(); ++k) {
    psnr.push_back(metrics::psnr(a.patches[k], b.patches[k]));
    ssim.push_back(metrics::patch_ssim(a.patches[k], b.patches[k]));
  }
  return metrics::aggregate_report(std::move(psnr), std::move(ssim));
}

metrics::RestorationReport evaluate_whole(const imaging::ImageTensor& truth,
                                          const imaging::ImageTensor& test) {
  return metrics::aggregate_report({metrics::psnr(truth, test)}, {metrics::patch_ssim(truth, test)});
}

SolverTrace combine_traces(const std::vector<SolverTrace>& traces) {
  SolverTrace out;
  if (traces.empty()) return out;
  const std::size_t iterations = traces.front().objective.size();
  const bool with_metrics = !traces.front().psnr.empty();
  out.objective.assign(iterations, 0.0);
  if (with_metrics) {
    out.psnr.assign(iterations, 0.0);
    out.ssim.assign(iterations, 0.0);
  }
  for (std::size_t t = 0; t < iterations; ++t) {
    std::size_t finite = 0;
    for (const SolverTrace& tr : traces) {
      out.objective[t] += tr.objective.at(t);
      if (!with_metrics) continue;
      const double p = tr.psnr.at(t);
      if (p != std::numeric_limits<double>::infinity()) {
        out.psnr[t] += p;
        ++finite;
      }
      out.ssim[t] += tr.ssim.at(t);
    }
    if (with_metrics) {
      out.psnr[t] = finite ? out.psnr[t] / static_cast<double>(finite)
                           : std::numeric_limits<double>::infinity();
      out.ssim[t] /= static_cast<double>(traces.size());
    }
  }
  out.step_size_warning = traces.front().step_size_warning;
  return out;
}

}  // namespace tvoptics

#include "commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "tvoptics/imaging.hpp"
#include "tvoptics/parallel.hpp"
#include "tvoptics/restore.hpp"

namespace fs = std::filesystem;

namespace tvoptics::cli {

namespace {

constexpr const char* kTraceHeader = "# tvoptics-trace v1";
constexpr const char* kSweepHeader = "# tvoptics-sweep v1";
constexpr const char* kSweepSummaryHeader = "# tvoptics-sweep-summary v1";
constexpr const char* kCompareHeader = "# tvoptics-compare v1";

std::string fmt_num(double v) {
  if (std::isinf(v)) return v > 0 ? "exact" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

nlohmann::json json_num(double v) {
  if (std::isinf(v)) return "exact";
  return v;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

unsigned resolve_workers(unsigned w) { return w == 0 ? default_workers() : w; }

std::string image_name(const std::string& stem, const std::string& format) {
  return stem + "." + format;
}

struct LoadedInput {
  std::string stem;
  imaging::ImageTensor truth;
  imaging::ImageTensor observed;
};

// Loads every input and checks the patch size against it before any solver
// runs.
std::vector<LoadedInput> load_inputs(const ExperimentSpec& spec) {
  std::vector<LoadedInput> loaded;
  for (const std::string& path : spec.inputs) {
    LoadedInput in;
    in.stem = fs::path(path).stem().string();
    in.truth = imaging::load_image(path);
    if (in.truth.rows() % spec.patch != 0 || in.truth.cols() % spec.patch != 0) {
      throw ConfigError("patch size " + std::to_string(spec.patch) + " must divide the image size " +
                        std::to_string(in.truth.rows()) + "x" + std::to_string(in.truth.cols()) +
                        " of " + path);
    }
    in.observed = imaging::degrade(in.truth, spec.sigma, spec.seed);
    loaded.push_back(std::move(in));
  }
  return loaded;
}

metrics::RestorationReport evaluate(const ExperimentSpec& spec, const imaging::ImageTensor& truth,
                                    const imaging::ImageTensor& test) {
  return spec.whole_image ? evaluate_whole(truth, test) : evaluate_patches(truth, test, spec.patch);
}

nlohmann::json report_json(const metrics::RestorationReport& r) {
  return {{"psnr", json_num(r.mean_psnr)}, {"ssim", r.mean_ssim}, {"exact_patches", r.exact_count}};
}

std::string trace_csv(const SolverTrace& trace) {
  std::ostringstream os;
  os << kTraceHeader << "\n" << "iteration,objective,psnr,ssim\n";
  for (std::size_t t = 0; t < trace.objective.size(); ++t) {
    os << (t + 1) << ',' << fmt_num(trace.objective[t]) << ',' << fmt_num(trace.psnr.at(t)) << ','
       << fmt_num(trace.ssim.at(t)) << '\n';
  }
  return os.str();
}

Algorithm selected_algorithm(const ExperimentSpec& spec) {
  return Algorithm{parse_method(spec.algo), spec.noisy};
}

void prepare_out(const ExperimentSpec& spec) {
  fs::create_directories(spec.out);
  write_json(fs::path(spec.out) / "config.json", spec.to_json());
}

void warn_steps(const ExperimentSpec& spec, const SolverConfig& cfg, std::ostream& out) {
  if (parse_method(spec.algo) == Method::Pds && !pds_step_admissible(cfg.gamma1, cfg.gamma2, 1.0)) {
    out << "warning: PDS steps gamma1=" << cfg.gamma1 << " gamma2=" << cfg.gamma2
        << " exceed gamma1 (1/2 + 8 gamma2) <= 1; convergence is not guaranteed\n";
  }
}

}  // namespace

void ExperimentSpec::validate() const {
  solver.validate();
  parse_method(algo);
  if (inputs.empty()) throw ConfigError("at least one --input image is required");
  if (patch < 2) throw ConfigError("--patch must be >= 2");
  if (!(sigma >= 0.0)) throw ConfigError("--sigma must be >= 0");
  if (reps < 1) throw ConfigError("--reps must be >= 1");
  if (out.empty()) throw ConfigError("--out must not be empty");
  if (format != "pgm" && format != "png") throw ConfigError("--format must be pgm or png");
  for (double g : grid) {
    if (!(g > 0.0)) throw ConfigError("sweep grid values must be > 0");
  }
  if (!(gamma2_noisy > 0.0)) throw ConfigError("--gamma2-noisy must be > 0");
}

nlohmann::json ExperimentSpec::to_json() const {
  const auto& m = solver.noise_model;
  return {
      {"inputs", inputs},
      {"algo", algo},
      {"noisy", noisy},
      {"gamma", solver.gamma},
      {"gamma1", solver.gamma1},
      {"gamma2", solver.gamma2},
      {"gamma2_noisy", gamma2_noisy},
      {"lambda", solver.lambda},
      {"iters", solver.iterations},
      {"patch", patch},
      {"sigma", sigma},
      {"seed", seed},
      {"reps", reps},
      {"out", out},
      {"workers", workers},
      {"whole_image", whole_image},
      {"format", format},
      {"grid", grid},
      {"noise_model",
       {{"noise_figure", m.noise_figure},
        {"frequency_hz", m.frequency_hz},
        {"bandwidth_hz", m.bandwidth_hz},
        {"planck", m.planck},
        {"sim_scale", m.sim_scale}}},
  };
}

std::uint64_t amplifier_seed(std::uint64_t seed, int rep) {
  return patch_seed(seed ^ 0x6A09E667F3BCC909ULL, static_cast<std::size_t>(rep));
}

int cmd_denoise(const ExperimentSpec& spec, std::ostream& out) {
  spec.validate();
  const auto inputs = load_inputs(spec);
  prepare_out(spec);
  warn_steps(spec, spec.solver, out);
  const Algorithm algorithm = selected_algorithm(spec);
  // Noiseless runs do not depend on the amplifier seed.
  const int reps = algorithm.noisy ? spec.reps : 1;

  for (const LoadedInput& in : inputs) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = inputs.size() > 1 ? fs::path(spec.out) / in.stem : fs::path(spec.out);
    fs::create_directories(dir);
    imaging::save_image(in.observed, dir / image_name("observed", spec.format));
    const metrics::RestorationReport observed = evaluate(spec, in.truth, in.observed);

    nlohmann::json runs = nlohmann::json::array();
    double psnr_sum = 0.0;
    double ssim_sum = 0.0;
    bool warned = false;
    for (int rep = 0; rep < reps; ++rep) {
      SolverConfig cfg = spec.solver;
      cfg.seed = amplifier_seed(spec.seed, rep);
      RestoreOptions options;
      options.patch_size = spec.patch;
      options.workers = resolve_workers(spec.workers);
      options.truth = &in.truth;
      const RestoreResult result = restore_image(in.observed, algorithm, cfg, options);
      warned = warned || result.step_size_warning;
      const std::string suffix = reps > 1 ? "_rep" + std::to_string(rep) : "";
      imaging::save_image(result.restored, dir / image_name("restored" + suffix, spec.format));
      write_text(dir / ("trace" + suffix + ".csv"), trace_csv(combine_traces(result.traces)));
      const metrics::RestorationReport restored = evaluate(spec, in.truth, result.restored);
      psnr_sum += restored.mean_psnr;
      ssim_sum += restored.mean_ssim;
      nlohmann::json run = report_json(restored);
      run["rep"] = rep;
      run["amplifier_seed"] = cfg.seed;
      runs.push_back(run);
    }
    const double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    nlohmann::json summary = {
        {"input", in.stem},
        {"algorithm", algorithm.name()},
        {"metric_mode", spec.whole_image ? "whole-image" : "patch-mean"},
        {"observed", report_json(observed)},
        {"restored", runs},
        {"mean_restored_psnr", json_num(psnr_sum / reps)},
        {"mean_restored_ssim", ssim_sum / reps},
        {"seed", spec.seed},
        {"step_size_warning", warned},
        {"runtime_seconds", runtime},
        {"config", spec.to_json()},
    };
    write_json(dir / "summary.json", summary);
    out << in.stem << ": observed PSNR " << fmt_num(observed.mean_psnr) << " dB, SSIM "
        << fmt_num(observed.mean_ssim) << "; " << algorithm.name() << " PSNR "
        << fmt_num(psnr_sum / reps) << " dB, SSIM " << fmt_num(ssim_sum / reps) << "\n";
  }
  return 0;
}

int cmd_sweep(const ExperimentSpec& spec, std::ostream& out) {
  spec.validate();
  const Method method = parse_method(spec.algo);
  std::vector<double> grid = spec.grid;
  if (grid.empty()) {
    grid = method == Method::Admm ? std::vector<double>{0.1, 0.5, 1.0, 5.0, 10.0}
                                  : std::vector<double>{0.5, 1.0, 5.0};
  }
  const std::string parameter = method == Method::Admm ? "gamma" : "gamma2";
  const auto inputs = load_inputs(spec);
  if (inputs.size() != 1) throw ConfigError("sweep takes exactly one --input");
  const LoadedInput& in = inputs.front();
  prepare_out(spec);

  struct Cell {
    double value;
    bool noisy;
    int rep;
    SolverTrace trace;
    metrics::RestorationReport report;
  };
  std::vector<Cell> cells;
  for (double value : grid) {
    for (bool noisy : {false, true}) {
      const int reps = noisy ? spec.reps : 1;
      for (int rep = 0; rep < reps; ++rep) cells.push_back({value, noisy, rep, {}, {}});
    }
  }

  const auto start = std::chrono::steady_clock::now();
  parallel_for(cells.size(), resolve_workers(spec.workers), [&](std::size_t i) {
    Cell& cell = cells[i];
    SolverConfig cfg = spec.solver;
    (method == Method::Admm ? cfg.gamma : cfg.gamma2) = cell.value;
    cfg.seed = amplifier_seed(spec.seed, cell.rep);
    RestoreOptions options;
    options.patch_size = spec.patch;
    options.truth = &in.truth;
    const RestoreResult result = restore_image(in.observed, {method, cell.noisy}, cfg, options);
    cell.trace = combine_traces(result.traces);
    cell.report = evaluate(spec, in.truth, result.restored);
  });
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ostringstream rows;
  rows << kSweepHeader << "\n" << "parameter,value,mode,rep,iteration,objective,psnr,ssim\n";
  for (const Cell& c : cells) {
    for (std::size_t t = 0; t < c.trace.objective.size(); ++t) {
      rows << parameter << ',' << fmt_num(c.value) << ',' << (c.noisy ? "noisy" : "noiseless") << ','
           << c.rep << ',' << (t + 1) << ',' << fmt_num(c.trace.objective[t]) << ','
           << fmt_num(c.trace.psnr[t]) << ',' << fmt_num(c.trace.ssim[t]) << '\n';
    }
  }
  write_text(fs::path(spec.out) / "sweep.csv", rows.str());

  // Pivot: mean over repetitions per (value, mode, iteration).
  std::ostringstream pivot;
  pivot << kSweepSummaryHeader << "\n" << "value,mode,iteration,psnr_mean,ssim_mean\n";
  nlohmann::json finals = {{"noiseless", nlohmann::json::object()}, {"noisy", nlohmann::json::object()}};
  std::map<std::string, std::pair<double, double>> best;  // mode -> (value, psnr)
  for (double value : grid) {
    for (bool noisy : {false, true}) {
      std::vector<const Cell*> group;
      for (const Cell& c : cells) {
        if (c.value == value && c.noisy == noisy) group.push_back(&c);
      }
      const std::size_t iters = group.front()->trace.objective.size();
      for (std::size_t t = 0; t < iters; ++t) {
        double p = 0.0, s = 0.0;
        for (const Cell* c : group) {
          p += c->trace.psnr[t];
          s += c->trace.ssim[t];
        }
        pivot << fmt_num(value) << ',' << (noisy ? "noisy" : "noiseless") << ',' << (t + 1) << ','
              << fmt_num(p / group.size()) << ',' << fmt_num(s / group.size()) << '\n';
      }
      double fp = 0.0, fs_ = 0.0;
      for (const Cell* c : group) {
        fp += c->report.mean_psnr;
        fs_ += c->report.mean_ssim;
      }
      fp /= group.size();
      fs_ /= group.size();
      const std::string mode = noisy ? "noisy" : "noiseless";
      finals[mode][fmt_num(value)] = {{"psnr", json_num(fp)}, {"ssim", fs_}, {"reps", group.size()}};
      auto it = best.find(mode);
      if (it == best.end() || fp > it->second.second) best[mode] = {value, fp};
    }
  }
  write_text(fs::path(spec.out) / "sweep_summary.csv", pivot.str());

  const metrics::RestorationReport observed = evaluate(spec, in.truth, in.observed);
  nlohmann::json summary = {
      {"input", in.stem},
      {"algorithm", std::string(method_name(method))},
      {"parameter", parameter},
      {"grid", grid},
      {"observed", report_json(observed)},
      {"final", finals},
      {"best", {{"noiseless", best["noiseless"].first}, {"noisy", best["noisy"].first}}},
      {"runtime_seconds", runtime},
      {"config", spec.to_json()},
  };
  write_json(fs::path(spec.out) / "summary.json", summary);
  out << "sweep " << method_name(method) << " over " << parameter << ": best noiseless "
      << fmt_num(best["noiseless"].first) << " (" << fmt_num(best["noiseless"].second)
      << " dB), best noisy " << fmt_num(best["noisy"].first) << " (" << fmt_num(best["noisy"].second)
      << " dB)\n";
  return 0;
}

int cmd_compare(const ExperimentSpec& spec, std::ostream& out) {
  spec.validate();
  const auto inputs = load_inputs(spec);
  if (inputs.size() != 1) throw ConfigError("compare takes exactly one --input");
  const LoadedInput& in = inputs.front();
  prepare_out(spec);
  const fs::path dir(spec.out);
  imaging::save_image(in.truth, dir / image_name("original", spec.format));
  imaging::save_image(in.observed, dir / image_name("observed", spec.format));

  struct Entry {
    std::string label;
    Algorithm algorithm;
    SolverConfig cfg;
  };
  SolverConfig pds_noisy = spec.solver;
  pds_noisy.gamma2 = spec.gamma2_noisy;
  const std::vector<Entry> entries = {
      {"admm_noiseless", {Method::Admm, false}, spec.solver},
      {"admm_noisy", {Method::Admm, true}, spec.solver},
      {"pds_noiseless", {Method::Pds, false}, spec.solver},
      {"pds_noisy", {Method::Pds, true}, pds_noisy},
  };

  std::ostringstream csv;
  csv << kCompareHeader << "\n" << "algorithm,rep,iteration,objective,psnr,ssim\n";
  const metrics::RestorationReport observed = evaluate(spec, in.truth, in.observed);
  nlohmann::json table = nlohmann::json::array();
  table.push_back({{"image", "observed"}, {"psnr", json_num(observed.mean_psnr)}, {"ssim", observed.mean_ssim}});
  for (const Entry& e : entries) {
    const int reps = e.algorithm.noisy ? spec.reps : 1;
    double p = 0.0, s = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      SolverConfig cfg = e.cfg;
      cfg.seed = amplifier_seed(spec.seed, rep);
      RestoreOptions options;
      options.patch_size = spec.patch;
      options.workers = resolve_workers(spec.workers);
      options.truth = &in.truth;
      const RestoreResult result = restore_image(in.observed, e.algorithm, cfg, options);
      if (rep == 0) imaging::save_image(result.restored, dir / image_name(e.label, spec.format));
      const SolverTrace trace = combine_traces(result.traces);
      for (std::size_t t = 0; t < trace.objective.size(); ++t) {
        csv << e.label << ',' << rep << ',' << (t + 1) << ',' << fmt_num(trace.objective[t]) << ','
            << fmt_num(trace.psnr[t]) << ',' << fmt_num(trace.ssim[t]) << '\n';
      }
      const metrics::RestorationReport r = evaluate(spec, in.truth, result.restored);
      p += r.mean_psnr;
      s += r.mean_ssim;
    }
    table.push_back({{"image", e.label},
                     {"psnr", json_num(p / reps)},
                     {"ssim", s / reps},
                     {"gamma", e.cfg.gamma},
                     {"gamma1", e.cfg.gamma1},
                     {"gamma2", e.cfg.gamma2},
                     {"reps", reps}});
  }
  write_text(dir / "compare.csv", csv.str());
  write_json(dir / "summary.json", {{"input", in.stem}, {"results", table}, {"config", spec.to_json()}});
  for (const auto& row : table) {
    out << row["image"].get<std::string>() << ": PSNR "
        << (row["psnr"].is_string() ? std::string("exact") : fmt_num(row["psnr"].get<double>()))
        << " dB, SSIM " << fmt_num(row["ssim"].get<double>()) << "\n";
  }
  return 0;
}

int cmd_noise_table(const optics::AmplifierNoiseModel& model, std::ostream& out) {
  model.validate();
  out << "gain,computed_power_w,reference_power_w,relative_error,sim_noise_std\n";
  for (const auto& row : optics::kReferenceNoiseTable) {
    const double p = optics::ase_noise_power(model, row.gain);
    const double rel = std::abs(p - row.reference_power) / row.reference_power;
    out << fmt_num(row.gain) << ',' << fmt_num(p) << ',' << fmt_num(row.reference_power) << ','
        << fmt_num(rel) << ',' << fmt_num(optics::sim_noise_std(model, row.gain)) << '\n';
  }
  return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"TV-regularized image restoration with ADMM and PDS under optical amplifier noise",
               "tvoptics"};
  app.set_config("--config", "", "TOML/INI configuration file; command-line flags take precedence");
  app.require_subcommand(1);

  ExperimentSpec spec;
  optics::AmplifierNoiseModel& model = spec.solver.noise_model;

  const auto add_noise_model = [&](CLI::App* sub) {
    sub->add_option("--nf", model.noise_figure, "amplifier noise figure F")->capture_default_str();
    sub->add_option("--freq", model.frequency_hz, "optical frequency in Hz")->capture_default_str();
    sub->add_option("--bandwidth", model.bandwidth_hz, "signal bandwidth in Hz")->capture_default_str();
    sub->add_option("--sim-scale", model.sim_scale, "variance multiplier for simulation")
        ->capture_default_str();
  };
  const auto add_experiment = [&](CLI::App* sub) {
    sub->add_option("--input", spec.inputs, "input image(s), 8-bit grayscale PGM or PNG")->required();
    sub->add_option("--algo", spec.algo, "admm or pds")->capture_default_str();
    sub->add_flag("--noisy", spec.noisy, "simulate optical amplifier noise");
    sub->add_option("--gamma", spec.solver.gamma, "ADMM step gamma")->capture_default_str();
    sub->add_option("--gamma1", spec.solver.gamma1, "PDS primal step gamma1")->capture_default_str();
    sub->add_option("--gamma2", spec.solver.gamma2, "PDS dual step gamma2")->capture_default_str();
    sub->add_option("--lambda", spec.solver.lambda, "TV weight")->capture_default_str();
    sub->add_option("--iters", spec.solver.iterations, "iterations K")->capture_default_str();
    sub->add_option("--patch", spec.patch, "patch size p")->capture_default_str();
    sub->add_option("--sigma", spec.sigma, "observation noise standard deviation")->capture_default_str();
    sub->add_option("--seed", spec.seed, "master seed")->capture_default_str();
    sub->add_option("--reps", spec.reps, "amplifier-noise repetitions")->capture_default_str();
    sub->add_option("--out", spec.out, "output directory")->capture_default_str();
    sub->add_option("--workers", spec.workers, "worker threads (0 = all cores)")->capture_default_str();
    sub->add_flag("--whole-image", spec.whole_image, "report whole-image instead of patch-mean metrics");
    sub->add_option("--format", spec.format, "output image format, pgm or png")->capture_default_str();
    add_noise_model(sub);
  };

  CLI::App* denoise = app.add_subcommand("denoise", "degrade an image and restore it");
  add_experiment(denoise);
  CLI::App* sweep = app.add_subcommand("sweep", "PSNR/SSIM vs iteration over a step-size grid");
  add_experiment(sweep);
  sweep->add_option("--grid", spec.grid, "gamma (admm) or gamma2 (pds) values")->delimiter(',');
  CLI::App* compare = app.add_subcommand("compare", "ADMM and PDS, noiseless and noisy, side by side");
  add_experiment(compare);
  compare->add_option("--gamma2-noisy", spec.gamma2_noisy, "gamma2 of the noisy PDS run")
      ->capture_default_str();
  CLI::App* table = app.add_subcommand("noise-table", "ASE noise power per amplifier gain");
  add_noise_model(table);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (denoise->parsed()) return cmd_denoise(spec, out);
    if (sweep->parsed()) return cmd_sweep(spec, out);
    if (compare->parsed()) return cmd_compare(spec, out);
    if (table->parsed()) return cmd_noise_table(model, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace tvoptics::cli

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvoptics/solvers.hpp"

namespace tvoptics::cli {

/// Everything one CLI invocation needs, after defaults, config file and flags
/// are resolved.
struct ExperimentSpec {
  std::vector<std::string> inputs;
  std::string algo = "admm";
  bool noisy = false;
  SolverConfig solver{};
  long patch = 16;
  double sigma = 10.0 / 255.0;
  std::uint64_t seed = 0;
  int reps = 1;
  std::string out = "out";
  unsigned workers = 0;  // 0: hardware concurrency
  bool whole_image = false;
  std::string format = "pgm";
  std::vector<double> grid;  // sweep values; empty selects the default grid
  double gamma2_noisy = 5.0;  // compare: gamma2 of the noisy PDS run

  /// Checks everything that does not need the input images.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Amplifier-noise master seed of repetition `rep`. The observation noise
/// uses `seed` itself.
std::uint64_t amplifier_seed(std::uint64_t seed, int rep);

int cmd_denoise(const ExperimentSpec& spec, std::ostream& out);
int cmd_sweep(const ExperimentSpec& spec, std::ostream& out);
int cmd_compare(const ExperimentSpec& spec, std::ostream& out);
int cmd_noise_table(const optics::AmplifierNoiseModel& model, std::ostream& out);

/// Parses argv (without the program name) and dispatches. Returns the process
/// exit code; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tvoptics::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "clusterpool/config.hpp"
#include "clusterpool/evaluation.hpp"

namespace clusterpool {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitRuntime = 4;

// Builds the experiment for synth-mse, synth-newsvendor or real-data from a config.
ExperimentConfig experiment_from_config(Config& cfg, const std::string& subcommand);

// Runs one subcommand against an already-loaded config, writing into out_dir.
// Returns an exit code; config problems throw ConfigError.
int run_subcommand(const std::string& subcommand, Config& cfg, const std::string& out_dir, std::ostream& log,
                   unsigned threads = 1);

// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clusterpool

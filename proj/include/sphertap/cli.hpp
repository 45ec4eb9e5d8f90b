#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sphertap/common.hpp"

namespace sphertap::cli {

// Batch sweep description. Which grids are required depends on the
// experiment; validate() reports every problem by field name.
struct ExperimentConfig {
  std::string experiment;
  Vec beta_grid;
  Vec h_grid;
  std::vector<long> N_list;
  std::vector<int> K_list;
  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir = ".";
  bool emit_svg = false;
};

// Strict JSON parsing: unknown fields are rejected by name, defaults are
// seeds = [1], emit_svg = false, output_dir = ".". Throws
// std::runtime_error with a diagnostic.
ExperimentConfig parse_config(const std::string& text);

// JSON encoding of the config; parse_config(serialize_config(c)) is
// field-equivalent to c.
std::string serialize_config(const ExperimentConfig& config);

// Empty when the config is runnable; otherwise one message per problem,
// each naming the offending field.
std::vector<std::string> validate(const ExperimentConfig& config);

// Executes the sweep: one CSV per experiment (schema documented in the
// README), a JSON manifest, optional SVG plot. Returns 0 on success, 1
// when a row fails its assertion or throws, 2 on validation failure.
// threads <= 0 selects hardware concurrency.
int run(const ExperimentConfig& config, int threads);

// Flag-driven entry point: --config <path>, --output <dir>, --threads <n>,
// --experiment <name>, --seed <u64>; SPHERICAL_TAP_THREADS is the fallback
// for --threads.
int main_entry(int argc, char** argv);

}  // namespace sphertap::cli

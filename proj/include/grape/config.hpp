#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "grape/hardware.hpp"
#include "grape/objective.hpp"
#include "grape/optimizer.hpp"
#include "grape/spin_system.hpp"
#include "grape/target.hpp"

namespace grape {

enum class ErrorKind { kPle, kOre };
ErrorKind parse_error_kind(const std::string& text);
std::string to_string(ErrorKind kind);

struct ScanSpec {
  ErrorKind kind = ErrorKind::kPle;
  double from = 0.0;
  double to = 2.0;
  std::size_t points = 50;
};

struct CoarsenSpec {
  std::size_t depth = 2;
  std::size_t min_steps = 1;
};

/// Everything a CLI run needs, resolved: the system file is loaded and the
/// target gate is built. Relative paths resolve against the config file.
struct RunConfig {
  std::filesystem::path config_path;
  std::filesystem::path system_path;
  SpinSystem system;
  TargetGate target;
  SeedSpec seed;
  std::uint64_t rng_seed = 1;
  OptimizerConfig optimizer;
  EnsembleSpec ensemble = EnsembleSpec::nominal();
  PenaltyConfig penalty;
  std::optional<QuantizationSpec> quantization;
  DelayPad pad;
  ScanSpec scan;
  CoarsenSpec coarsen;
  std::filesystem::path output_dir = "out";

  /// Overrides both the seed-sequence RNG and the restart RNG.
  void override_seed(std::uint64_t seed);
};

SpinSystem load_spin_system(const std::filesystem::path& path);
SpinSystem parse_spin_system(const std::string& text, const std::string& source);

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& source);

}  // namespace grape

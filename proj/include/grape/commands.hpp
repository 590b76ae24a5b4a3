#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "grape/config.hpp"
#include "grape/problem.hpp"

namespace grape {

/// Process exit codes shared by every CLI verb.
enum ExitCode : int {
  kExitSuccess = 0,
  kExitUsage = 1,
  kExitGoalNotReached = 2,
  kExitNumerical = 3,
};

struct ScanRow {
  ErrorKind kind = ErrorKind::kPle;
  double value = 0.0;
  double fidelity = 0.0;
};

using ScanResult = std::vector<ScanRow>;

/// Plain fidelity of `sequence` at each point of an evenly spaced sweep, rows
/// sorted by error value. PLE scale 0 is allowed here (controls switched off).
ScanResult robustness_scan(const SpinSystem& system, const ControlSequence& sequence,
                           const TargetGate& target, const ScanSpec& sweep);
void write_scan(std::ostream& out, const ScanResult& scan);

/// Plain fidelity of `sequence` on the nominal system, with the hardware pads
/// applied around it when given.
double evaluate_sequence(const SpinSystem& system, const ControlSequence& sequence,
                         const TargetGate& target, const DelayPad& pad = {});

struct OptimizeOutcome {
  SequenceOptimization run;
  ControlSequence initial;
  std::filesystem::path sequence_file;
  int exit_code = kExitSuccess;
};

/// seed -> CG -> restarts, then writes sequence.csv, summary.csv, members.csv
/// and trace.csv into `out_dir`. Nonzero hardware pads adjust the target.
OptimizeOutcome cmd_optimize(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log,
                             bool quiet = false);

std::filesystem::path cmd_scan(const RunConfig& cfg, const ControlSequence& sequence,
                               const std::filesystem::path& out_dir);

/// Writes ladder.csv plus one sequence file per rung.
std::vector<CoarseningLevel> cmd_coarsen_study(const RunConfig& cfg, const ControlSequence& sequence,
                                               const std::filesystem::path& out_dir, std::ostream& log,
                                               bool quiet = false);

enum class ExportFormat { kNative, kAmpPhase };
ExportFormat parse_export_format(const std::string& text);

void cmd_export(const ControlSequence& sequence, ExportFormat format, const QuantizationSpec* quantization,
                bool delays_as_zero, const std::filesystem::path& out_file);

/// Builds the composite objective a run config describes, with the target
/// adjusted for hardware pads.
CompositeObjective make_run_objective(const RunConfig& cfg);

}  // namespace grape

// Command-line driver: optimize, scan, coarsen-study, export, bb1, evaluate.

#include <cmath>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "grape/commands.hpp"
#include "grape/gates.hpp"
#include "grape/sequence_io.hpp"

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "Run configuration file (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--out", c.out, "Output directory (default: config output_dir)");
  cmd->add_option("--seed", c.seed, "Override the RNG seed");
  cmd->add_flag("--quiet", c.quiet, "Suppress progress output");
}

grape::RunConfig load(const Common& c) {
  grape::RunConfig cfg = grape::load_run_config(c.config);
  if (c.seed) cfg.override_seed(*c.seed);
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shaped-pulse gate synthesis by gradient ascent"};
  app.require_subcommand(1);

  Common common;

  auto* optimize = app.add_subcommand("optimize", "Optimize a control sequence for the configured gate");
  add_common(optimize, common, true);

  std::string sequence_file;
  std::string kind;
  std::optional<double> from, to;
  std::optional<std::size_t> points;
  auto* scan = app.add_subcommand("scan", "Fidelity of a sequence across a PLE or ORE sweep");
  add_common(scan, common, true);
  scan->add_option("--sequence", sequence_file, "Sequence file")->required();
  scan->add_option("--kind", kind, "PLE or ORE (default: config scan.kind)");
  scan->add_option("--from", from, "Sweep start");
  scan->add_option("--to", to, "Sweep end");
  scan->add_option("--points", points, "Number of sweep points (>= 2)");

  std::optional<std::size_t> depth;
  auto* coarsen = app.add_subcommand("coarsen-study", "Halve and re-optimize a sequence repeatedly");
  add_common(coarsen, common, true);
  coarsen->add_option("--sequence", sequence_file, "Sequence file")->required();
  coarsen->add_option("--depth", depth, "Number of halvings");

  std::string format = "native";
  std::string out_file;
  bool quantize = false;
  bool delays_as_zero = false;
  auto* exp = app.add_subcommand("export", "Write a sequence as native or amplitude/phase text");
  exp->add_option("--config", common.config, "Run configuration (for hardware quantization)");
  exp->add_option("--sequence", sequence_file, "Sequence file")->required();
  exp->add_option("--format", format, "native or amp_phase")->check(CLI::IsMember({"native", "amp_phase"}));
  exp->add_option("--out", out_file, "Output file")->required();
  exp->add_flag("--quantize", quantize, "Apply the config's hardware quantization");
  exp->add_flag("--delays-as-zero", delays_as_zero, "Write delay steps as zero-amplitude rows");
  exp->add_flag("--quiet", common.quiet, "Suppress progress output");

  double angle_deg = 90.0;
  double phase_deg = 0.0;
  double rabi_hz = 10000.0;
  bool hard = false;
  auto* bb1 = app.add_subcommand("bb1", "Emit a BB1 composite pulse (or plain hard pulse) as a sequence file");
  bb1->add_option("--angle-deg", angle_deg, "Rotation angle in degrees");
  bb1->add_option("--phase-deg", phase_deg, "Rotation axis phase in degrees");
  bb1->add_option("--rabi-hz", rabi_hz, "Hard pulse nutation rate in Hz");
  bb1->add_flag("--hard", hard, "Emit the uncorrected hard pulse instead");
  bb1->add_option("--out", out_file, "Output sequence file")->required();
  bb1->add_flag("--quiet", common.quiet, "Suppress progress output");

  auto* evaluate = app.add_subcommand("evaluate", "Fidelity of a sequence file against the configured target");
  add_common(evaluate, common, true);
  evaluate->add_option("--sequence", sequence_file, "Sequence file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? grape::kExitSuccess : grape::kExitUsage;
  }

  try {
    if (*optimize) {
      const auto cfg = load(common);
      return grape::cmd_optimize(cfg, cfg.output_dir, std::cerr, common.quiet).exit_code;
    }
    if (*scan) {
      auto cfg = load(common);
      if (!kind.empty()) cfg.scan.kind = grape::parse_error_kind(kind);
      if (from) cfg.scan.from = *from;
      if (to) cfg.scan.to = *to;
      if (points) cfg.scan.points = *points;
      const auto path = grape::cmd_scan(cfg, grape::load_sequence(sequence_file), cfg.output_dir);
      if (!common.quiet) std::cerr << "wrote " << path.string() << '\n';
      return grape::kExitSuccess;
    }
    if (*coarsen) {
      auto cfg = load(common);
      if (depth) cfg.coarsen.depth = *depth;
      grape::cmd_coarsen_study(cfg, grape::load_sequence(sequence_file), cfg.output_dir, std::cerr, common.quiet);
      return grape::kExitSuccess;
    }
    if (*exp) {
      std::optional<grape::RunConfig> cfg;
      if (!common.config.empty()) cfg = grape::load_run_config(common.config);
      const grape::QuantizationSpec* q = nullptr;
      if (quantize) {
        if (!cfg || !cfg->quantization) {
          std::cerr << "error: --quantize needs --config with hardware amplitude_levels/phase_resolution_deg\n";
          return grape::kExitUsage;
        }
        q = &*cfg->quantization;
      }
      grape::cmd_export(grape::load_sequence(sequence_file), grape::parse_export_format(format), q,
                        delays_as_zero, out_file);
      if (!common.quiet) std::cerr << "wrote " << out_file << '\n';
      return grape::kExitSuccess;
    }
    if (*bb1) {
      const double theta = angle_deg * kDegToRad;
      const double phase = phase_deg * kDegToRad;
      const auto seq = hard ? grape::hard_pulse(theta, phase, rabi_hz) : grape::bb1_sequence(theta, phase, rabi_hz);
      grape::save_sequence(out_file, seq);
      if (!common.quiet && !hard) {
        std::cerr << "BB1 correction phase " << grape::bb1_phase(theta) / kDegToRad << " deg; wrote " << out_file
                  << '\n';
      }
      return grape::kExitSuccess;
    }
    if (*evaluate) {
      const auto cfg = load(common);
      const auto seq = grape::load_sequence(sequence_file);
      const grape::CompositeObjective objective = grape::make_run_objective(cfg);
      const auto report = objective.evaluate(seq, false);
      std::cout << "plain_fidelity," << grape::format_number(grape::evaluate_sequence(cfg.system, seq, cfg.target, cfg.pad))
                << '\n';
      std::cout << "objective," << grape::format_number(report.total) << '\n';
      std::cout << "gate_fidelity," << grape::format_number(report.gate_fidelity) << '\n';
      std::cout << "contaminant_fidelity," << grape::format_number(report.contaminant_fidelity) << '\n';
      for (std::size_t m = 0; m < report.member_fidelities.size(); ++m) {
        std::cout << "member" << m << "," << grape::format_number(report.member_fidelities[m]) << '\n';
      }
      return grape::kExitSuccess;
    }
  } catch (const grape::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return grape::kExitUsage;
  } catch (const grape::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return grape::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return grape::kExitNumerical;
  }
  return grape::kExitUsage;
}

#include "grape/commands.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <random>

#include "grape/sequence_io.hpp"

namespace grape {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  return out;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::string describe_member(const EnsembleMember& m, double& ple, double& ore) {
  ple = 1.0;
  ore = 0.0;
  for (const auto& e : m.errors) {
    if (const auto* p = std::get_if<PulseLengthError>(&e)) ple *= p->scale;
    else ore += std::get<OffResonanceError>(e).offset_hz;
  }
  return format_number(ple) + "," + format_number(ore);
}

}  // namespace

ScanResult robustness_scan(const SpinSystem& system, const ControlSequence& sequence,
                           const TargetGate& target, const ScanSpec& sweep) {
  if (sweep.points < 2) throw ConfigError("scan needs at least 2 points");
  const HamiltonianSet nominal = build_hamiltonians(system);
  const double lo = std::min(sweep.from, sweep.to);
  const double hi = std::max(sweep.from, sweep.to);
  ScanResult rows;
  for (std::size_t i = 0; i < sweep.points; ++i) {
    const double v = i + 1 == sweep.points ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(sweep.points - 1);
    HamiltonianSet hams;
    if (sweep.kind == ErrorKind::kPle) {
      if (v < 0.0) throw ConfigError("PLE scale must be non-negative");
      hams = nominal;
      for (auto& c : hams.controls) c *= v;
    } else {
      hams = apply_error_model(nominal, OffResonanceError{v});
    }
    const PropagatorCache cache = build_cache(hams, sequence, target);
    rows.push_back({sweep.kind, v, fidelity(target, cache.final)});
  }
  return rows;
}

void write_scan(std::ostream& out, const ScanResult& scan) {
  out << "error_kind,error_value,fidelity\n";
  for (const auto& r : scan) {
    out << to_string(r.kind) << ',' << format_number(r.value) << ',' << format_number(r.fidelity) << '\n';
  }
}

double evaluate_sequence(const SpinSystem& system, const ControlSequence& sequence, const TargetGate& target,
                         const DelayPad& pad) {
  const HamiltonianSet hams = build_hamiltonians(system);
  const PropagatorCache cache = build_cache(hams, pad_sequence(sequence, pad), target);
  return fidelity(target, cache.final);
}

CompositeObjective make_run_objective(const RunConfig& cfg) {
  TargetGate target = cfg.target;
  if (cfg.pad.pre_s > 0.0 || cfg.pad.post_s > 0.0) target = adjust_target(cfg.target, cfg.system, cfg.pad);
  OptimizerConfig opt = cfg.optimizer;
  return CompositeObjective(cfg.system, std::move(target), cfg.ensemble, cfg.penalty, opt.gradient_mode);
}

OptimizeOutcome cmd_optimize(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log,
                             bool quiet) {
  const CompositeObjective objective = make_run_objective(cfg);
  if (!quiet) {
    for (const auto& w : objective.warnings()) log << "warning: " << w << '\n';
  }

  std::mt19937_64 rng(cfg.rng_seed);
  OptimizeOutcome outcome;
  outcome.initial = seed_sequence(cfg.seed, rng);
  outcome.initial.metadata.seed = cfg.rng_seed;
  outcome.initial.metadata.label = cfg.target.label;
  outcome.run = optimize_sequence(objective, outcome.initial, cfg.optimizer);
  outcome.run.sequence.metadata.seed = cfg.rng_seed;
  outcome.run.sequence.metadata.label = cfg.target.label;

  ensure_dir(out_dir);
  outcome.sequence_file = out_dir / "sequence.csv";
  save_sequence(outcome.sequence_file, outcome.run.sequence);

  const auto& r = outcome.run.result;
  const auto& rep = outcome.run.report;
  {
    auto out = open_out(out_dir / "summary.csv");
    out << "key,value\n";
    out << "target," << cfg.target.label << '\n';
    out << "objective," << format_number(rep.total) << '\n';
    out << "gate_fidelity," << format_number(rep.gate_fidelity) << '\n';
    out << "contaminant_fidelity," << format_number(rep.contaminant_fidelity) << '\n';
    out << "penalty," << format_number(rep.penalty) << '\n';
    out << "termination," << to_string(r.termination) << '\n';
    out << "iterations," << r.iterations << '\n';
    out << "evaluations," << r.evaluations << '\n';
    out << "restarts," << r.restarts << '\n';
    out << "n_steps," << outcome.run.sequence.size() << '\n';
    out << "duration_s," << format_number(outcome.run.sequence.total_duration()) << '\n';
    out << "rng_seed," << cfg.rng_seed << '\n';
  }
  {
    auto out = open_out(out_dir / "members.csv");
    const std::size_t n_cont = cfg.system.contaminant_offsets_hz.size();
    out << "member,ple,ore_hz,weight,fidelity";
    for (std::size_t c = 0; c < n_cont; ++c) out << ",contaminant" << c << "_fidelity";
    out << '\n';
    const auto weights = cfg.ensemble.normalized_weights();
    for (std::size_t m = 0; m < cfg.ensemble.members.size(); ++m) {
      double ple = 1.0, ore = 0.0;
      out << m << ',' << describe_member(cfg.ensemble.members[m], ple, ore) << ',' << format_number(weights[m])
          << ',' << format_number(rep.member_fidelities[m]);
      for (double f : rep.contaminant_fidelities[m]) out << ',' << format_number(f);
      out << '\n';
    }
  }
  {
    auto out = open_out(out_dir / "trace.csv");
    out << "iteration,objective\n";
    for (std::size_t i = 0; i < r.trace.size(); ++i) out << i << ',' << format_number(r.trace[i]) << '\n';
  }

  if (!quiet) {
    log << "objective " << format_number(rep.total) << " (gate fidelity " << format_number(rep.gate_fidelity)
        << ") after " << r.iterations << " iterations, " << r.restarts << " restarts: " << to_string(r.termination)
        << '\n';
    log << "wrote " << outcome.sequence_file.string() << '\n';
  }
  outcome.exit_code = r.termination == Termination::kGoalReached ? kExitSuccess : kExitGoalNotReached;
  return outcome;
}

std::filesystem::path cmd_scan(const RunConfig& cfg, const ControlSequence& sequence,
                               const std::filesystem::path& out_dir) {
  const ScanResult scan = robustness_scan(cfg.system, sequence, cfg.target, cfg.scan);
  ensure_dir(out_dir);
  const auto path = out_dir / "scan.csv";
  auto out = open_out(path);
  write_scan(out, scan);
  return path;
}

std::vector<CoarseningLevel> cmd_coarsen_study(const RunConfig& cfg, const ControlSequence& sequence,
                                               const std::filesystem::path& out_dir, std::ostream& log,
                                               bool quiet) {
  const CompositeObjective objective = make_run_objective(cfg);
  const auto ladder = coarsening_study(sequence, make_objective_factory(objective), cfg.optimizer,
                                       cfg.coarsen.depth, cfg.coarsen.min_steps);
  ensure_dir(out_dir);
  auto out = open_out(out_dir / "ladder.csv");
  out << "n_steps,step_s,fidelity,sequence_file\n";
  for (const auto& row : ladder) {
    const std::string name = "sequence_" + std::to_string(row.n_steps) + ".csv";
    save_sequence(out_dir / name, row.sequence);
    const double step = row.sequence.empty() ? 0.0 : step_duration(row.sequence.steps.front());
    out << row.n_steps << ',' << format_number(step) << ',' << format_number(row.fidelity) << ',' << name << '\n';
    if (!quiet) log << row.n_steps << " steps: " << format_number(row.fidelity) << '\n';
  }
  return ladder;
}

ExportFormat parse_export_format(const std::string& text) {
  if (text == "native") return ExportFormat::kNative;
  if (text == "amp_phase") return ExportFormat::kAmpPhase;
  throw ConfigError("invalid export format '" + text + "' (expected native or amp_phase)");
}

void cmd_export(const ControlSequence& sequence, ExportFormat format, const QuantizationSpec* quantization,
                bool delays_as_zero, const std::filesystem::path& out_file) {
  if (out_file.has_parent_path()) ensure_dir(out_file.parent_path());
  auto out = open_out(out_file);
  if (format == ExportFormat::kNative) {
    write_sequence(out, quantization ? quantize(sequence, *quantization) : sequence);
  } else {
    write_amp_phase(out, sequence, {delays_as_zero, quantization});
  }
}

}  // namespace grape

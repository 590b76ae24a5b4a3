#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "grape/propagation.hpp"
#include "grape/sequence.hpp"
#include "grape/spin_system.hpp"
#include "grape/target.hpp"

namespace grape {

/// Phase-invariant gate fidelity |tr(U_t^dag U_f)|^2 / N^2.
double fidelity(const TargetGate& target, const Matrix& final);
double fidelity(const Matrix& target, const Matrix& final);

/// Gradient of the fidelity with respect to every sequence parameter (pulse
/// amplitudes and delay durations, in step order). The cache must have been
/// built from `sequence`; a hash mismatch throws std::logic_error.
RealVector gradient(const PropagatorCache& cache, const HamiltonianSet& hams,
                    const ControlSequence& sequence, GradientMode mode);

using ErrorModel = std::variant<PulseLengthError, OffResonanceError>;

HamiltonianSet apply_error_models(const HamiltonianSet& hams, const std::vector<ErrorModel>& models);

struct EnsembleMember {
  std::vector<ErrorModel> errors;
  double weight = 1.0;
};

struct EnsembleSpec {
  std::vector<EnsembleMember> members;
  /// Share of the total given to impurity-identity fidelity; ignored when the
  /// system has no contaminant spins.
  double contaminant_weight = 0.2;

  /// Single error-free member.
  static EnsembleSpec nominal();
  /// PLE scales {0.7, 0.85, 1.0, 1.12, 1.3} with equal weights.
  static EnsembleSpec default_ple();
  static EnsembleSpec from_ple_scales(const std::vector<double>& scales);

  /// Weights scaled to sum to one.
  std::vector<double> normalized_weights() const;
  /// Throws ConfigError on hard violations, returns warnings (for example an
  /// evenly spaced error grid, which invites good-at-grid/bad-between solutions).
  std::vector<std::string> validate() const;
};

struct PenaltyConfig {
  double u_max = 0.0;  ///< rad/s
  double lambda = 10.0;
  bool enabled = false;
};

struct PenaltyValue {
  double value = 0.0;
  RealVector gradient;
};

/// lambda * sum over steps and channels of max(0, |u| - u_max)^2, |u| the
/// magnitude of a channel's (u_x, u_y) pair.
PenaltyValue power_penalty(const ControlSequence& sequence, double u_max, double lambda);

struct ObjectiveReport {
  double total = 0.0;
  double gate_fidelity = 0.0;         ///< weighted mean over members
  double contaminant_fidelity = 1.0;  ///< weighted mean over members and impurities
  std::vector<double> member_fidelities;
  /// contaminant_fidelities[m][c]: member m, impurity c.
  std::vector<std::vector<double>> contaminant_fidelities;
  double penalty = 0.0;
  RealVector gradient;  ///< empty when not requested
};

/// Ensemble objective with precomputed member Hamiltonians. Members are
/// evaluated independently (optionally on several threads) and reduced in
/// member order, so results do not depend on the thread count.
class CompositeObjective {
 public:
  CompositeObjective(const SpinSystem& system, TargetGate target, EnsembleSpec ensemble,
                     PenaltyConfig penalty = {}, GradientMode mode = GradientMode::kFirstOrder);

  ObjectiveReport evaluate(const ControlSequence& sequence, bool with_gradient = true) const;

  const TargetGate& target() const { return target_; }
  const EnsembleSpec& ensemble() const { return ensemble_; }
  const HamiltonianSet& nominal_hamiltonians() const { return nominal_; }
  std::size_t num_controls() const { return nominal_.controls.size(); }
  GradientMode mode() const { return mode_; }
  void set_threads(std::size_t n) { threads_ = n == 0 ? 1 : n; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct MemberResult {
    double fidelity = 0.0;
    RealVector gradient;
    std::vector<double> contaminant_fidelities;
    std::vector<RealVector> contaminant_gradients;
  };
  MemberResult evaluate_member(std::size_t m, const ControlSequence& seq, bool with_gradient) const;

  TargetGate target_;
  EnsembleSpec ensemble_;
  PenaltyConfig penalty_;
  GradientMode mode_;
  HamiltonianSet nominal_;
  std::vector<double> weights_;
  std::vector<HamiltonianSet> member_hams_;
  std::vector<std::vector<HamiltonianSet>> member_contaminants_;
  TargetGate contaminant_target_;
  std::size_t threads_ = 1;
  std::vector<std::string> warnings_;
};

/// Thread count for ensemble evaluation: GRAPE_THREADS if set, else the
/// hardware concurrency.
std::size_t default_thread_count();

ObjectiveReport composite_objective(const SpinSystem& system, const ControlSequence& sequence,
                                    const TargetGate& target, const EnsembleSpec& ensemble,
                                    const PenaltyConfig& penalty = {},
                                    GradientMode mode = GradientMode::kFirstOrder);

}  // namespace grape

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "grape/propagation.hpp"
#include "grape/sequence.hpp"
#include "grape/types.hpp"

namespace grape {

struct Evaluation {
  double value = 0.0;
  RealVector gradient;
};

/// Function to maximize. Parameters listed in `nonnegative` are projected onto
/// [0, inf) after every step.
struct Objective {
  std::function<Evaluation(const RealVector&)> evaluate;
  std::vector<std::size_t> nonnegative;
};

struct LineSearchConfig {
  double initial_step = 0.01;  ///< first trial step length, relative to max(|x|, 1)
  double growth = 4.0;
  double shrink = 0.1;  ///< interpolated points stay this fraction inside the bracket
  std::size_t max_probes = 40;
  double sufficient_increase = 1e-4;
  double curvature = 0.1;  ///< accept once |phi'(a)| <= curvature * phi'(0)
};

enum class Termination { kGoalReached, kGradientFloor, kIterationCap, kRestartsExhausted };

std::string to_string(Termination t);

struct OptimizerConfig {
  std::size_t max_iterations = 1000;
  double fidelity_goal = 0.99999;
  double gradient_norm_floor = 1e-12;
  LineSearchConfig line_search;
  /// Restart kick as a fraction of the parameter-vector norm.
  double perturbation = 0.05;
  std::size_t max_restarts = 5;
  std::uint64_t seed = 1;
  GradientMode gradient_mode = GradientMode::kFirstOrder;
  /// Steepest-ascent reset period; 0 means the problem dimension.
  std::size_t reset_interval = 0;

  void validate() const;
};

struct OptimizationResult {
  RealVector best;
  double best_value = 0.0;
  /// Objective at the start point and after every accepted step, across all runs.
  std::vector<double> trace;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::size_t restarts = 0;
  Termination termination = Termination::kIterationCap;
};

OptimizationResult conjugate_gradient_ascend(const Objective& objective, const RealVector& initial,
                                             const OptimizerConfig& cfg);

/// Kicks the incumbent a fixed distance in a random direction and re-runs CG,
/// keeping the strictly better result, until the goal or max_restarts.
OptimizationResult perturb_and_retry(const OptimizationResult& result, const Objective& objective,
                                     const OptimizerConfig& cfg, std::mt19937_64& rng);

struct SeedSpec {
  std::size_t n_steps = 0;
  double dt_s = 0.0;
  std::size_t channels = 1;
  std::size_t n_harmonics = 4;
  double amplitude_bound = 0.0;  ///< rad/s
};

/// Sum of random sinusoids per channel component, rescaled so that the largest
/// per-step field magnitude is at most `amplitude_bound`.
ControlSequence seed_sequence(const SeedSpec& spec, std::mt19937_64& rng);

/// Halves the step count by averaging adjacent pairs; duration per step doubles.
ControlSequence coarsen(const ControlSequence& sequence);

struct CoarseningLevel {
  std::size_t n_steps = 0;
  double fidelity = 0.0;
  ControlSequence sequence;
  Termination termination = Termination::kGoalReached;
};

using ObjectiveFactory = std::function<Objective(const ControlSequence& layout)>;

/// Row 0 is the input as given; each further row coarsens the previous row's
/// sequence and re-optimizes it. Stops after `depth` halvings or before the
/// step count would fall below `min_steps`.
std::vector<CoarseningLevel> coarsening_study(const ControlSequence& sequence,
                                              const ObjectiveFactory& factory,
                                              const OptimizerConfig& cfg, std::size_t depth,
                                              std::size_t min_steps = 1);

}  // namespace grape

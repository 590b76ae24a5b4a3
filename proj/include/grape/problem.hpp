#pragma once

#include "grape/objective.hpp"
#include "grape/optimizer.hpp"

namespace grape {

/// Optimizer view of a composite objective over the parameters of `layout`.
Objective make_sequence_objective(const CompositeObjective& objective, const ControlSequence& layout);

/// Factory for coarsening studies: each layout gets its own parameter view.
ObjectiveFactory make_objective_factory(const CompositeObjective& objective);

struct SequenceOptimization {
  ControlSequence sequence;
  OptimizationResult result;
  ObjectiveReport report;  ///< final evaluation of `sequence`
};

/// CG from `initial`, then perturbation restarts (seeded from cfg.seed).
SequenceOptimization optimize_sequence(const CompositeObjective& objective, const ControlSequence& initial,
                                       const OptimizerConfig& cfg);

}  // namespace grape

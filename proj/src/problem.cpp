#include "grape/problem.hpp"

#include <random>

namespace grape {

Objective make_sequence_objective(const CompositeObjective& objective, const ControlSequence& layout) {
  layout.validate(objective.num_controls());
  Objective out;
  out.nonnegative = delay_parameter_indices(layout);
  out.evaluate = [&objective, layout](const RealVector& x) {
    ObjectiveReport r = objective.evaluate(from_parameters(layout, x), true);
    return Evaluation{r.total, std::move(r.gradient)};
  };
  return out;
}

ObjectiveFactory make_objective_factory(const CompositeObjective& objective) {
  return [&objective](const ControlSequence& layout) { return make_sequence_objective(objective, layout); };
}

SequenceOptimization optimize_sequence(const CompositeObjective& objective, const ControlSequence& initial,
                                       const OptimizerConfig& cfg) {
  const Objective obj = make_sequence_objective(objective, initial);
  std::mt19937_64 rng(cfg.seed);
  OptimizationResult r = conjugate_gradient_ascend(obj, to_parameters(initial), cfg);
  r = perturb_and_retry(r, obj, cfg, rng);

  SequenceOptimization out;
  out.sequence = from_parameters(initial, r.best);
  out.sequence.metadata.provenance = "grape cg " + to_string(r.termination);
  out.result = std::move(r);
  out.report = objective.evaluate(out.sequence, false);
  return out;
}

}  // namespace grape

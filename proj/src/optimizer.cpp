#include "grape/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace grape {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kGoalReached: return "goal_reached";
    case Termination::kGradientFloor: return "gradient_floor";
    case Termination::kIterationCap: return "iteration_cap";
    case Termination::kRestartsExhausted: return "restarts_exhausted";
  }
  return "unknown";
}

void OptimizerConfig::validate() const {
  if (!(fidelity_goal > 0.0 && fidelity_goal <= 1.0)) throw ConfigError("fidelity_goal must lie in (0, 1]");
  if (!(perturbation >= 0.0)) throw ConfigError("perturbation magnitude must be non-negative");
  if (!(gradient_norm_floor >= 0.0)) throw ConfigError("gradient_norm_floor must be non-negative");
  const auto& ls = line_search;
  if (!(ls.initial_step > 0.0)) throw ConfigError("line_search.initial_step must be positive");
  if (!(ls.growth > 1.0)) throw ConfigError("line_search.growth must exceed 1");
  if (!(ls.shrink > 0.0 && ls.shrink < 0.5)) throw ConfigError("line_search.shrink must lie in (0, 0.5)");
  if (ls.max_probes == 0) throw ConfigError("line_search.max_probes must be positive");
  if (!(ls.sufficient_increase > 0.0 && ls.sufficient_increase < ls.curvature && ls.curvature < 1.0)) {
    throw ConfigError("line search requires 0 < sufficient_increase < curvature < 1");
  }
}

namespace {

struct Probe {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
  RealVector x;
  RealVector gradient;
};

class Runner {
 public:
  Runner(const Objective& objective, const OptimizerConfig& cfg) : objective_(objective), cfg_(cfg) {}

  std::size_t evaluations = 0;
  std::size_t iteration = 0;

  void project(RealVector& x) const {
    for (auto i : objective_.nonnegative) {
      if (x[static_cast<Eigen::Index>(i)] < 0.0) x[static_cast<Eigen::Index>(i)] = 0.0;
    }
  }

  /// Zeroes gradient components that would push a clamped parameter negative.
  void mask(const RealVector& x, RealVector& g) const {
    for (auto i : objective_.nonnegative) {
      const auto k = static_cast<Eigen::Index>(i);
      if (x[k] <= 0.0 && g[k] < 0.0) g[k] = 0.0;
    }
  }

  Evaluation evaluate(const RealVector& x) {
    ++evaluations;
    Evaluation e;
    try {
      e = objective_.evaluate(x);
    } catch (const std::exception& err) {
      throw NumericalError("objective evaluation failed at iteration " + std::to_string(iteration) +
                           ": " + err.what());
    }
    if (e.gradient.size() != x.size()) {
      throw NumericalError("objective returned a gradient of length " + std::to_string(e.gradient.size()) +
                           " for " + std::to_string(x.size()) + " parameters at iteration " +
                           std::to_string(iteration));
    }
    return e;
  }

  Probe probe(const RealVector& x0, const RealVector& d, double alpha) {
    Probe p;
    p.alpha = alpha;
    p.x = x0 + alpha * d;
    project(p.x);
    Evaluation e = evaluate(p.x);
    p.value = e.value;
    p.gradient = std::move(e.gradient);
    p.slope = p.gradient.dot(d);
    return p;
  }

  /// Bracketing search for the maximum of phi(a) = f(x0 + a d). Returns the
  /// accepted probe, or the best strictly improving probe seen, or nothing.
  std::optional<Probe> line_search(const RealVector& x0, double f0, double slope0, const RealVector& d,
                                   double alpha) {
    const auto& ls = cfg_.line_search;
    Probe lo;
    lo.alpha = 0.0;
    lo.value = f0;
    lo.slope = slope0;
    std::optional<Probe> hi;
    std::optional<Probe> best;

    for (std::size_t k = 0; k < ls.max_probes; ++k) {
      Probe p = probe(x0, d, alpha);
      const bool finite = std::isfinite(p.value) && std::isfinite(p.slope);
      if (finite && p.value > f0 && (!best || p.value > best->value)) best = p;
      const bool armijo = finite && p.value >= f0 + ls.sufficient_increase * alpha * slope0;
      if (armijo && std::abs(p.slope) <= ls.curvature * slope0) return p;

      if (!armijo || p.slope < 0.0) {
        hi = std::move(p);
      } else {
        lo = std::move(p);
      }

      if (!hi) {
        alpha = lo.alpha * ls.growth;
        continue;
      }

      const double width = hi->alpha - lo.alpha;
      if (width <= 1e-15 * std::max(1.0, std::abs(hi->alpha))) break;
      double next = std::numeric_limits<double>::quiet_NaN();
      const bool hi_finite = std::isfinite(hi->value) && std::isfinite(hi->slope);
      if (hi_finite && hi->slope < 0.0) {
        // Secant on the slope: exact for a quadratic phi.
        next = lo.alpha + lo.slope * width / (lo.slope - hi->slope);
      } else if (hi_finite) {
        const double curv = (hi->value - lo.value - lo.slope * width) / (width * width);
        if (curv < 0.0) next = lo.alpha - lo.slope / (2.0 * curv);
      }
      const double inner_lo = lo.alpha + ls.shrink * width;
      const double inner_hi = hi->alpha - ls.shrink * width;
      if (!std::isfinite(next)) next = 0.5 * (lo.alpha + hi->alpha);
      alpha = std::clamp(next, inner_lo, inner_hi);
    }
    return best;
  }

  OptimizationResult run(const RealVector& initial) {
    OptimizationResult result;
    RealVector x = initial;
    project(x);
    Evaluation e = evaluate(x);
    if (!std::isfinite(e.value)) throw NumericalError("objective is not finite at the initial point");
    result.best = x;
    result.best_value = e.value;
    result.trace.push_back(e.value);
    if (e.value >= cfg_.fidelity_goal) {
      result.termination = Termination::kGoalReached;
      result.evaluations = evaluations;
      return result;
    }

    const auto dim = static_cast<std::size_t>(x.size());
    const std::size_t reset_interval = cfg_.reset_interval == 0 ? std::max<std::size_t>(dim, 1) : cfg_.reset_interval;
    const double initial_length = cfg_.line_search.initial_step * std::max(1.0, x.norm());

    RealVector g = std::move(e.gradient);
    mask(x, g);
    RealVector d = g;
    double value = e.value;
    std::size_t since_reset = 0;
    double prev_alpha = 0.0;
    double prev_slope = 0.0;
    result.termination = Termination::kIterationCap;

    for (iteration = 0; iteration < cfg_.max_iterations; ++iteration) {
      if (g.norm() <= cfg_.gradient_norm_floor) {
        result.termination = Termination::kGradientFloor;
        break;
      }
      double slope = g.dot(d);
      bool steepest = since_reset == 0;
      if (!(slope > 0.0)) {
        d = g;
        slope = g.squaredNorm();
        since_reset = 0;
        steepest = true;
      }
      double alpha = prev_alpha > 0.0 ? prev_alpha * prev_slope / slope : initial_length / d.norm();

      std::optional<Probe> accepted = line_search(x, value, slope, d, alpha);
      if (!accepted && !steepest) {
        d = g;
        slope = g.squaredNorm();
        since_reset = 0;
        accepted = line_search(x, value, slope, d, initial_length / d.norm());
      }
      if (!accepted) {
        // No improving point along steepest ascent: stationary to working precision.
        result.termination = Termination::kGradientFloor;
        break;
      }

      x = std::move(accepted->x);
      value = accepted->value;
      prev_alpha = accepted->alpha;
      prev_slope = slope;
      result.trace.push_back(value);
      result.best = x;
      result.best_value = value;
      ++result.iterations;
      if (value >= cfg_.fidelity_goal) {
        result.termination = Termination::kGoalReached;
        break;
      }

      RealVector g_new = std::move(accepted->gradient);
      mask(x, g_new);
      double beta = std::max(0.0, g_new.dot(g_new - g) / g.squaredNorm());
      if (++since_reset >= reset_interval) {
        beta = 0.0;
        since_reset = 0;
      }
      d = g_new + beta * d;
      g = std::move(g_new);
    }
    result.evaluations = evaluations;
    return result;
  }

 private:
  const Objective& objective_;
  const OptimizerConfig& cfg_;
};

}  // namespace

OptimizationResult conjugate_gradient_ascend(const Objective& objective, const RealVector& initial,
                                             const OptimizerConfig& cfg) {
  cfg.validate();
  if (!objective.evaluate) throw ConfigError("objective has no evaluation callback");
  Runner runner(objective, cfg);
  return runner.run(initial);
}

OptimizationResult perturb_and_retry(const OptimizationResult& result, const Objective& objective,
                                     const OptimizerConfig& cfg, std::mt19937_64& rng) {
  OptimizationResult best = result;
  if (best.best_value >= cfg.fidelity_goal) {
    best.termination = Termination::kGoalReached;
    return best;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t restarts = 0;
  while (restarts < cfg.max_restarts) {
    const double norm = best.best.norm();
    const double magnitude = cfg.perturbation * (norm > 0.0 ? norm : 1.0);
    RealVector direction(best.best.size());
    for (Eigen::Index i = 0; i < direction.size(); ++i) direction[i] = normal(rng);
    const double dn = direction.norm();
    RealVector start = best.best;
    if (dn > 0.0) start += (magnitude / dn) * direction;

    OptimizationResult candidate = conjugate_gradient_ascend(objective, start, cfg);
    ++restarts;
    best.trace.insert(best.trace.end(), candidate.trace.begin(), candidate.trace.end());
    best.iterations += candidate.iterations;
    best.evaluations += candidate.evaluations;
    if (candidate.best_value > best.best_value) {
      best.best = std::move(candidate.best);
      best.best_value = candidate.best_value;
      best.termination = candidate.termination;
    }
    if (best.best_value >= cfg.fidelity_goal) {
      best.termination = Termination::kGoalReached;
      break;
    }
  }
  best.restarts = result.restarts + restarts;
  if (best.termination != Termination::kGoalReached && restarts > 0) {
    best.termination = Termination::kRestartsExhausted;
  }
  return best;
}

ControlSequence seed_sequence(const SeedSpec& spec, std::mt19937_64& rng) {
  if (spec.n_steps == 0) throw ConfigError("seed sequence needs at least one step");
  if (!(spec.amplitude_bound > 0.0)) throw ConfigError("seed amplitude bound must be positive");
  if (!(spec.dt_s >= 0.0)) throw ConfigError("seed step duration must be non-negative");

  const std::size_t n_controls = 2 * spec.channels;
  std::vector<std::vector<double>> values(n_controls, std::vector<double>(spec.n_steps, 0.0));
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  for (std::size_t k = 0; k < n_controls; ++k) {
    for (std::size_t h = 1; h <= spec.n_harmonics; ++h) {
      const double a = amp(rng);
      const double phi = phase(rng);
      for (std::size_t j = 0; j < spec.n_steps; ++j) {
        values[k][j] += a * std::sin(kTwoPi * static_cast<double>(h * j) / static_cast<double>(spec.n_steps) + phi);
      }
    }
  }

  double peak = 0.0;
  for (std::size_t c = 0; c < spec.channels; ++c) {
    for (std::size_t j = 0; j < spec.n_steps; ++j) {
      peak = std::max(peak, std::hypot(values[2 * c][j], values[2 * c + 1][j]));
    }
  }
  const double scale = peak > 0.0 ? spec.amplitude_bound / peak * (1.0 - 1e-15) : 0.0;

  ControlSequence seq;
  seq.steps.reserve(spec.n_steps);
  for (std::size_t j = 0; j < spec.n_steps; ++j) {
    PulseStep p;
    p.duration_s = spec.dt_s;
    p.amplitudes.resize(n_controls);
    for (std::size_t k = 0; k < n_controls; ++k) p.amplitudes[k] = scale * values[k][j];
    seq.steps.emplace_back(std::move(p));
  }
  seq.metadata.provenance = "sinusoid seed";
  return seq;
}

ControlSequence coarsen(const ControlSequence& sequence) {
  if (sequence.empty()) throw ConfigError("cannot coarsen an empty sequence");
  if (sequence.size() % 2 != 0) {
    throw ConfigError("cannot coarsen a sequence with an odd number of steps (" +
                      std::to_string(sequence.size()) + ")");
  }
  if (sequence.num_delay_steps() != 0) throw ConfigError("cannot coarsen a sequence containing delay steps");
  const auto& first = std::get<PulseStep>(sequence.steps.front());
  for (const auto& s : sequence.steps) {
    const auto& p = std::get<PulseStep>(s);
    if (p.duration_s != first.duration_s) throw ConfigError("cannot coarsen a sequence with non-uniform step durations");
    if (p.amplitudes.size() != first.amplitudes.size()) throw ConfigError("inconsistent amplitude counts");
  }

  ControlSequence out;
  out.metadata = sequence.metadata;
  out.metadata.provenance = "coarsened from " + std::to_string(sequence.size()) + " steps";
  for (std::size_t j = 0; j < sequence.size(); j += 2) {
    const auto& a = std::get<PulseStep>(sequence.steps[j]);
    const auto& b = std::get<PulseStep>(sequence.steps[j + 1]);
    PulseStep merged;
    merged.duration_s = 2.0 * first.duration_s;
    merged.amplitudes.resize(a.amplitudes.size());
    for (std::size_t k = 0; k < a.amplitudes.size(); ++k) {
      merged.amplitudes[k] = 0.5 * (a.amplitudes[k] + b.amplitudes[k]);
    }
    out.steps.emplace_back(std::move(merged));
  }
  return out;
}

std::vector<CoarseningLevel> coarsening_study(const ControlSequence& sequence,
                                              const ObjectiveFactory& factory,
                                              const OptimizerConfig& cfg, std::size_t depth,
                                              std::size_t min_steps) {
  std::vector<CoarseningLevel> ladder;
  {
    const Objective obj = factory(sequence);
    CoarseningLevel row;
    row.n_steps = sequence.size();
    row.fidelity = obj.evaluate(to_parameters(sequence)).value;
    row.sequence = sequence;
    ladder.push_back(std::move(row));
  }
  for (std::size_t level = 0; level < depth; ++level) {
    const ControlSequence& previous = ladder.back().sequence;
    if (previous.size() % 2 != 0 || previous.size() / 2 < std::max<std::size_t>(min_steps, 1)) break;
    const ControlSequence coarse = coarsen(previous);
    const Objective obj = factory(coarse);
    const OptimizationResult r = conjugate_gradient_ascend(obj, to_parameters(coarse), cfg);
    CoarseningLevel row;
    row.n_steps = coarse.size();
    row.fidelity = r.best_value;
    row.sequence = from_parameters(coarse, r.best);
    row.termination = r.termination;
    ladder.push_back(std::move(row));
  }
  return ladder;
}

}  // namespace grape

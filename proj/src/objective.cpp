#include "grape/objective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace grape {

namespace {

/// tr(A^dagger B) without forming the product.
Complex trace_inner(const Matrix& a, const Matrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum();
}

/// tr(A B) without forming the product.
Complex trace_product(const Matrix& a, const Matrix& b) {
  return (a.cwiseProduct(b.transpose())).sum();
}

}  // namespace

double fidelity(const Matrix& target, const Matrix& final) {
  if (target.rows() != final.rows() || target.cols() != final.cols()) {
    throw ConfigError("fidelity: target is " + std::to_string(target.rows()) + "x" +
                      std::to_string(target.cols()) + " but propagator is " +
                      std::to_string(final.rows()) + "x" + std::to_string(final.cols()));
  }
  const double n = static_cast<double>(target.rows());
  const double phi = std::norm(trace_inner(target, final)) / (n * n);
  if (!(phi >= 0.0) || phi > 1.0 + 1e-9) {
    std::ostringstream os;
    os << "fidelity " << phi << " outside [0, 1]; propagators are not unitary";
    throw NumericalError(os.str());
  }
  return std::min(phi, 1.0);
}

double fidelity(const TargetGate& target, const Matrix& final) { return fidelity(target.unitary, final); }

RealVector gradient(const PropagatorCache& cache, const HamiltonianSet& hams,
                    const ControlSequence& sequence, GradientMode mode) {
  if (cache.sequence_hash != sequence_hash(sequence) || cache.num_steps() != sequence.size()) {
    throw std::logic_error("stale propagator cache: built for a different sequence");
  }
  const double n = static_cast<double>(hams.dimension());
  const Complex overlap = trace_inner(cache.target, cache.final);
  const double scale = 2.0 / (n * n);

  RealVector grad(static_cast<Eigen::Index>(parameter_count(sequence)));
  Eigen::Index out = 0;
  for (std::size_t j = 1; j <= sequence.size(); ++j) {
    const Step& step = sequence.steps[j - 1];
    const Matrix& x_j = cache.forward[j];
    const Matrix& p_j = cache.backward[j];

    if (const auto* pulse = std::get_if<PulseStep>(&step)) {
      const double dt = pulse->duration_s;
      if (mode == GradientMode::kFirstOrder || dt == 0.0) {
        // tr(P_j^dag (-i dt H_k) X_j) = -i dt tr(H_k X_j P_j^dag)
        const Matrix m = x_j * p_j.adjoint();
        for (const auto& hk : hams.controls) {
          const Complex d = Complex(0.0, -dt) * trace_product(hk, m);
          grad[out++] = scale * std::real(std::conj(overlap) * d);
        }
      } else {
        const Eigensystem& es = cache.eigensystems[j - 1];
        const Eigen::Index dim = es.values.size();
        Matrix divided(dim, dim);
        for (Eigen::Index a = 0; a < dim; ++a) {
          for (Eigen::Index b = 0; b < dim; ++b) {
            const double half = 0.5 * dt * (es.values[a] - es.values[b]);
            const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
            divided(a, b) = Complex(0.0, -dt) * std::polar(1.0, -0.5 * dt * (es.values[a] + es.values[b])) * sinc;
          }
        }
        const Matrix b = es.vectors.adjoint() * cache.forward[j - 1] * p_j.adjoint() * es.vectors;
        for (const auto& hk : hams.controls) {
          const Matrix rotated = es.vectors.adjoint() * hk * es.vectors;
          const Complex d = trace_product(divided.cwiseProduct(rotated), b);
          grad[out++] = scale * std::real(std::conj(overlap) * d);
        }
      }
    } else {
      // dU/dt = -i h0 U, exact.
      const Complex d = Complex(0.0, -1.0) * trace_product(hams.h0, x_j * p_j.adjoint());
      grad[out++] = scale * std::real(std::conj(overlap) * d);
    }
  }
  return grad;
}

HamiltonianSet apply_error_models(const HamiltonianSet& hams, const std::vector<ErrorModel>& models) {
  HamiltonianSet out = hams;
  for (const auto& m : models) {
    out = std::visit([&](const auto& e) { return apply_error_model(out, e); }, m);
  }
  return out;
}

EnsembleSpec EnsembleSpec::nominal() {
  EnsembleSpec e;
  e.members.push_back({{}, 1.0});
  return e;
}

EnsembleSpec EnsembleSpec::from_ple_scales(const std::vector<double>& scales) {
  EnsembleSpec e;
  for (double s : scales) e.members.push_back({{PulseLengthError{s}}, 1.0});
  return e;
}

EnsembleSpec EnsembleSpec::default_ple() { return from_ple_scales({0.7, 0.85, 1.0, 1.12, 1.3}); }

std::vector<double> EnsembleSpec::normalized_weights() const {
  double sum = 0.0;
  for (const auto& m : members) sum += m.weight;
  std::vector<double> w;
  for (const auto& m : members) w.push_back(m.weight / sum);
  return w;
}

namespace {

bool is_arithmetic_progression(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.size() < 3) return false;
  const double step = values[1] - values[0];
  const double tol = 1e-9 * std::max(1.0, std::abs(values.back() - values.front()));
  for (std::size_t i = 2; i < values.size(); ++i) {
    if (std::abs(values[i] - values[i - 1] - step) > tol) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> EnsembleSpec::validate() const {
  if (members.empty()) throw ConfigError("ensemble has no members");
  double sum = 0.0;
  std::vector<double> ple, ore;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& m = members[i];
    if (!(m.weight >= 0.0)) throw ConfigError("ensemble member " + std::to_string(i) + " has negative weight");
    sum += m.weight;
    for (const auto& e : m.errors) {
      if (const auto* p = std::get_if<PulseLengthError>(&e)) {
        if (!(p->scale > 0.0)) {
          throw ConfigError("ensemble member " + std::to_string(i) + " has non-positive PLE scale");
        }
        ple.push_back(p->scale);
      } else {
        ore.push_back(std::get<OffResonanceError>(e).offset_hz);
      }
    }
  }
  if (!(sum > 0.0)) throw ConfigError("ensemble weights sum to zero");
  if (!(contaminant_weight >= 0.0 && contaminant_weight <= 1.0)) {
    throw ConfigError("contaminant_weight must lie in [0, 1]");
  }
  std::vector<std::string> warnings;
  if (is_arithmetic_progression(ple)) {
    warnings.emplace_back("PLE values are evenly spaced; consider a non-periodic grid");
  }
  if (is_arithmetic_progression(ore)) {
    warnings.emplace_back("ORE values are evenly spaced; consider a non-periodic grid");
  }
  return warnings;
}

PenaltyValue power_penalty(const ControlSequence& sequence, double u_max, double lambda) {
  if (!(u_max > 0.0)) throw ConfigError("penalty u_max must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("penalty lambda must be non-negative");
  PenaltyValue out;
  out.gradient = RealVector::Zero(static_cast<Eigen::Index>(parameter_count(sequence)));
  Eigen::Index i = 0;
  for (const auto& step : sequence.steps) {
    const auto* p = std::get_if<PulseStep>(&step);
    if (p == nullptr) {
      ++i;
      continue;
    }
    for (std::size_t c = 0; c < p->amplitudes.size(); c += 2) {
      const double ux = p->amplitudes[c];
      const double uy = c + 1 < p->amplitudes.size() ? p->amplitudes[c + 1] : 0.0;
      const double r = std::hypot(ux, uy);
      const double excess = r - u_max;
      if (excess > 0.0) {
        out.value += lambda * excess * excess;
        out.gradient[i + static_cast<Eigen::Index>(c)] = 2.0 * lambda * excess * ux / r;
        if (c + 1 < p->amplitudes.size()) {
          out.gradient[i + static_cast<Eigen::Index>(c) + 1] = 2.0 * lambda * excess * uy / r;
        }
      }
    }
    i += static_cast<Eigen::Index>(p->amplitudes.size());
  }
  return out;
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("GRAPE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

CompositeObjective::CompositeObjective(const SpinSystem& system, TargetGate target,
                                       EnsembleSpec ensemble, PenaltyConfig penalty, GradientMode mode)
    : target_(std::move(target)),
      ensemble_(std::move(ensemble)),
      penalty_(penalty),
      mode_(mode),
      nominal_(build_hamiltonians(system)),
      contaminant_target_{Matrix::Identity(2, 2), "identity"},
      threads_(default_thread_count()) {
  target_.validate();
  if (target_.dimension() != nominal_.dimension()) {
    throw ConfigError("target '" + target_.label + "' has dimension " +
                      std::to_string(target_.dimension()) + " but the spin system has dimension " +
                      std::to_string(nominal_.dimension()));
  }
  warnings_ = ensemble_.validate();
  if (penalty_.enabled && !(penalty_.u_max > 0.0)) throw ConfigError("penalty u_max must be positive");
  weights_ = ensemble_.normalized_weights();
  const auto contaminants = build_contaminant_hamiltonians(system);
  for (const auto& member : ensemble_.members) {
    member_hams_.push_back(apply_error_models(nominal_, member.errors));
    std::vector<HamiltonianSet> cs;
    for (const auto& c : contaminants) cs.push_back(apply_error_models(c, member.errors));
    member_contaminants_.push_back(std::move(cs));
  }
}

CompositeObjective::MemberResult CompositeObjective::evaluate_member(std::size_t m,
                                                                     const ControlSequence& seq,
                                                                     bool with_gradient) const {
  MemberResult r;
  const auto& hams = member_hams_[m];
  const PropagatorCache cache = build_cache(hams, seq, target_);
  r.fidelity = fidelity(target_, cache.final);
  if (with_gradient) r.gradient = gradient(cache, hams, seq, mode_);
  for (const auto& ch : member_contaminants_[m]) {
    const PropagatorCache cc = build_cache(ch, seq, contaminant_target_);
    r.contaminant_fidelities.push_back(fidelity(contaminant_target_, cc.final));
    if (with_gradient) r.contaminant_gradients.push_back(gradient(cc, ch, seq, mode_));
  }
  return r;
}

ObjectiveReport CompositeObjective::evaluate(const ControlSequence& sequence, bool with_gradient) const {
  sequence.validate(num_controls());
  const std::size_t members = member_hams_.size();
  std::vector<MemberResult> results(members);

  const std::size_t workers = std::min(threads_, members);
  if (workers <= 1) {
    for (std::size_t m = 0; m < members; ++m) results[m] = evaluate_member(m, sequence, with_gradient);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t m = w; m < members; m += workers) {
            results[m] = evaluate_member(m, sequence, with_gradient);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  ObjectiveReport report;
  const std::size_t n_params = parameter_count(sequence);
  const bool has_contaminants = !member_contaminants_.empty() && !member_contaminants_[0].empty();
  const double wc = has_contaminants ? ensemble_.contaminant_weight : 0.0;

  RealVector gate_grad = RealVector::Zero(static_cast<Eigen::Index>(n_params));
  RealVector cont_grad = RealVector::Zero(static_cast<Eigen::Index>(n_params));
  report.gate_fidelity = 0.0;
  report.contaminant_fidelity = has_contaminants ? 0.0 : 1.0;
  for (std::size_t m = 0; m < members; ++m) {
    const auto& r = results[m];
    const double w = weights_[m];
    report.member_fidelities.push_back(r.fidelity);
    report.contaminant_fidelities.push_back(r.contaminant_fidelities);
    report.gate_fidelity += w * r.fidelity;
    if (with_gradient) gate_grad += w * r.gradient;
    if (has_contaminants) {
      const double share = w / static_cast<double>(r.contaminant_fidelities.size());
      for (std::size_t c = 0; c < r.contaminant_fidelities.size(); ++c) {
        report.contaminant_fidelity += share * r.contaminant_fidelities[c];
        if (with_gradient) cont_grad += share * r.contaminant_gradients[c];
      }
    }
  }

  double total = (1.0 - wc) * report.gate_fidelity + wc * report.contaminant_fidelity;
  if (with_gradient) report.gradient = (1.0 - wc) * gate_grad + wc * cont_grad;
  if (penalty_.enabled) {
    const auto p = power_penalty(sequence, penalty_.u_max, penalty_.lambda);
    report.penalty = p.value;
    total -= p.value;
    if (with_gradient) report.gradient -= p.gradient;
  }
  report.total = total;
  return report;
}

ObjectiveReport composite_objective(const SpinSystem& system, const ControlSequence& sequence,
                                    const TargetGate& target, const EnsembleSpec& ensemble,
                                    const PenaltyConfig& penalty, GradientMode mode) {
  return CompositeObjective(system, target, ensemble, penalty, mode).evaluate(sequence);
}

}  // namespace grape

#include "grape/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace grape {

void TargetGate::validate() const {
  if (unitary.rows() == 0 || unitary.rows() != unitary.cols()) {
    throw ConfigError("target '" + label + "' is not a square matrix");
  }
  const double dev = unitarity_deviation(unitary);
  if (dev > 1e-10) {
    std::ostringstream os;
    os << "target '" << label << "' is not unitary (max |U^dag U - 1| = " << dev << ")";
    throw ConfigError(os.str());
  }
}

GradientMode parse_gradient_mode(const std::string& text) {
  if (text == "first_order") return GradientMode::kFirstOrder;
  if (text == "exact") return GradientMode::kExact;
  throw ConfigError("invalid gradient mode '" + text + "' (expected first_order or exact)");
}

std::string to_string(GradientMode mode) {
  return mode == GradientMode::kFirstOrder ? "first_order" : "exact";
}

namespace {

void require_hermitian(const Matrix& h) {
  if (h.rows() != h.cols()) throw NumericalError("generator is not square");
  if (h.size() == 0) return;
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  const double dev = hermitian_deviation(h);
  if (dev > 1e-12 * scale) {
    std::ostringstream os;
    os << "generator is not Hermitian (max |H - H^dag| = " << dev << ")";
    throw NumericalError(os.str());
  }
}

}  // namespace

Eigensystem hermitian_eigensystem(const Matrix& h) {
  require_hermitian(h);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix exponential_from_eigensystem(const Eigensystem& es, double t) {
  Eigen::VectorXcd phases(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    phases[i] = std::polar(1.0, -t * es.values[i]);
  }
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

Matrix matrix_exponential_hermitian_generator(const Matrix& h, double t) {
  return exponential_from_eigensystem(hermitian_eigensystem(h), t);
}

Matrix step_generator(const HamiltonianSet& hams, const Step& step) {
  Matrix h = hams.h0;
  if (const auto* p = std::get_if<PulseStep>(&step)) {
    if (p->amplitudes.size() != hams.controls.size()) {
      throw ConfigError("pulse step has " + std::to_string(p->amplitudes.size()) +
                        " amplitudes but the system has " + std::to_string(hams.controls.size()) +
                        " controls");
    }
    for (std::size_t k = 0; k < hams.controls.size(); ++k) {
      if (p->amplitudes[k] != 0.0) h += p->amplitudes[k] * hams.controls[k];
    }
  }
  return h;
}

Matrix pulse_propagator(const HamiltonianSet& hams, const PulseStep& step) {
  return matrix_exponential_hermitian_generator(step_generator(hams, Step{step}), step.duration_s);
}

Matrix delay_propagator(const HamiltonianSet& hams, double t) {
  if (!(t >= 0.0)) throw ConfigError("delay duration must be non-negative");
  return matrix_exponential_hermitian_generator(hams.h0, t);
}

Matrix step_propagator(const HamiltonianSet& hams, const Step& step) {
  if (const auto* p = std::get_if<PulseStep>(&step)) return pulse_propagator(hams, *p);
  return delay_propagator(hams, std::get<DelayStep>(step).duration_s);
}

Matrix exponential_frechet_derivative(const Eigensystem& es, double t, const Matrix& direction) {
  const Eigen::Index n = es.values.size();
  Matrix m = es.vectors.adjoint() * direction * es.vectors;
  // Divided differences of exp(-i t w), written as -i t e^{-i t (wa+wb)/2} sinc(t (wa-wb)/2)
  // so that nearly degenerate pairs stay accurate.
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double half = 0.5 * t * (es.values[a] - es.values[b]);
      const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
      const Complex f = Complex(0.0, -t) * std::polar(1.0, -0.5 * t * (es.values[a] + es.values[b])) * sinc;
      m(a, b) *= f;
    }
  }
  return es.vectors * m * es.vectors.adjoint();
}

Matrix propagator_derivative(const HamiltonianSet& hams, const Step& step, std::size_t k,
                             GradientMode mode) {
  if (const auto* p = std::get_if<PulseStep>(&step)) {
    if (k >= hams.controls.size()) {
      throw ConfigError("control index " + std::to_string(k) + " out of range");
    }
    const double dt = p->duration_s;
    if (dt == 0.0) return Matrix::Zero(hams.h0.rows(), hams.h0.cols());
    if (mode == GradientMode::kFirstOrder) {
      return Complex(0.0, -dt) * hams.controls[k] * pulse_propagator(hams, *p);
    }
    return exponential_frechet_derivative(hermitian_eigensystem(step_generator(hams, step)), dt,
                                          hams.controls[k]);
  }
  if (k != 0) throw ConfigError("delay steps have a single parameter (index 0)");
  const double t = std::get<DelayStep>(step).duration_s;
  return Complex(0.0, -1.0) * hams.h0 * delay_propagator(hams, t);
}

PropagatorCache build_cache(const HamiltonianSet& hams, const ControlSequence& sequence,
                            const TargetGate& target) {
  if (sequence.empty()) throw ConfigError("cannot build a propagator cache for an empty sequence");
  if (target.dimension() != hams.dimension()) {
    throw ConfigError("target dimension " + std::to_string(target.dimension()) +
                      " does not match system dimension " + std::to_string(hams.dimension()));
  }
  sequence.validate(hams.controls.size());

  const std::size_t n = sequence.size();
  const auto dim = static_cast<Eigen::Index>(hams.dimension());
  PropagatorCache cache;
  cache.step_props.reserve(n);
  cache.eigensystems.reserve(n);
  for (const auto& step : sequence.steps) {
    cache.eigensystems.push_back(hermitian_eigensystem(step_generator(hams, step)));
    cache.step_props.push_back(exponential_from_eigensystem(cache.eigensystems.back(), step_duration(step)));
  }

  cache.forward.resize(n + 1);
  cache.forward[0] = Matrix::Identity(dim, dim);
  for (std::size_t j = 1; j <= n; ++j) cache.forward[j] = cache.step_props[j - 1] * cache.forward[j - 1];

  cache.backward.resize(n + 1);
  cache.backward[n] = target.unitary;
  for (std::size_t j = n; j-- > 0;) {
    cache.backward[j] = cache.step_props[j].adjoint() * cache.backward[j + 1];
  }

  cache.final = cache.forward[n];
  cache.target = target.unitary;
  cache.sequence_hash = sequence_hash(sequence);
  return cache;
}

}  // namespace grape

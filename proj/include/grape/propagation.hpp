#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "grape/sequence.hpp"
#include "grape/spin_system.hpp"
#include "grape/target.hpp"
#include "grape/types.hpp"

namespace grape {

enum class GradientMode {
  kFirstOrder,  ///< dU/du = -i dt H_k U, accurate while dt*|H| is small
  kExact,       ///< spectral Frechet derivative of the step exponential
};

GradientMode parse_gradient_mode(const std::string& text);
std::string to_string(GradientMode mode);

/// Spectral decomposition H = V diag(w) V^dagger.
struct Eigensystem {
  RealVector values;
  Matrix vectors;
};

Eigensystem hermitian_eigensystem(const Matrix& h);

/// exp(-i t H) for Hermitian H, via eigendecomposition. Rejects H whose
/// anti-Hermitian part exceeds 1e-12 relative to its largest element.
Matrix matrix_exponential_hermitian_generator(const Matrix& h, double t);
Matrix exponential_from_eigensystem(const Eigensystem& es, double t);

/// Generator of a step: h0 + sum_k u_k H_k for pulses, h0 for delays.
Matrix step_generator(const HamiltonianSet& hams, const Step& step);

Matrix pulse_propagator(const HamiltonianSet& hams, const PulseStep& step);
Matrix delay_propagator(const HamiltonianSet& hams, double t);
Matrix step_propagator(const HamiltonianSet& hams, const Step& step);

/// dU_j/du_kj for pulses (k indexes the control matrix) or dU/dt for delays
/// (k must be 0). Delays are exact in both modes.
Matrix propagator_derivative(const HamiltonianSet& hams, const Step& step, std::size_t k,
                             GradientMode mode);

/// Frechet derivative of exp(-i t H) in direction E, given the eigensystem of H.
Matrix exponential_frechet_derivative(const Eigensystem& es, double t, const Matrix& direction);

/// Stored subpropagators, forward products and backward products.
/// forward[j] = U_j...U_1 with forward[0] = 1; backward[j] = U_{j+1}^dag...U_n^dag U_t
/// with backward[n] = U_t. Step j (1-based) lives at step_props[j-1].
struct PropagatorCache {
  std::vector<Matrix> step_props;
  std::vector<Eigensystem> eigensystems;
  std::vector<Matrix> forward;
  std::vector<Matrix> backward;
  Matrix final;
  Matrix target;
  std::uint64_t sequence_hash = 0;

  std::size_t num_steps() const { return step_props.size(); }
};

PropagatorCache build_cache(const HamiltonianSet& hams, const ControlSequence& sequence,
                            const TargetGate& target);

}  // namespace grape

#include "grape/gates.hpp"

#include <cmath>

#include "grape/propagation.hpp"
#include "grape/spin_system.hpp"

namespace grape {

namespace {

void check_spin(std::size_t spin, std::size_t num_spins) {
  if (spin >= num_spins) {
    throw ConfigError("gate addresses spin " + std::to_string(spin) + " of a " +
                      std::to_string(num_spins) + "-spin system");
  }
}

}  // namespace

TargetGate identity_gate(std::size_t num_spins) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << num_spins);
  return {Matrix::Identity(dim, dim), "identity"};
}

TargetGate rotation_gate(double angle_rad, double phase_rad, std::size_t spin, std::size_t num_spins) {
  check_spin(spin, num_spins);
  const Matrix h = std::cos(phase_rad) * spin_x() + std::sin(phase_rad) * spin_y();
  const Matrix single = matrix_exponential_hermitian_generator(h, angle_rad);
  return {embed(single, spin, num_spins), "rotation"};
}

TargetGate z_rotation_gate(double angle_rad, std::size_t spin, std::size_t num_spins) {
  check_spin(spin, num_spins);
  Matrix single = Matrix::Zero(2, 2);
  single(0, 0) = std::polar(1.0, -0.5 * angle_rad);
  single(1, 1) = std::polar(1.0, 0.5 * angle_rad);
  return {embed(single, spin, num_spins), "z_rotation"};
}

TargetGate controlled_phase_gate(double theta, std::size_t a, std::size_t b, std::size_t num_spins) {
  check_spin(a, num_spins);
  check_spin(b, num_spins);
  if (a == b) throw ConfigError("controlled-phase needs two distinct spins");
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << num_spins);
  Matrix u = Matrix::Identity(dim, dim);
  const std::size_t bit_a = std::size_t{1} << (num_spins - 1 - a);
  const std::size_t bit_b = std::size_t{1} << (num_spins - 1 - b);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if ((idx & bit_a) && (idx & bit_b)) u(i, i) = std::polar(1.0, theta);
  }
  return {u, "controlled_phase"};
}

TargetGate controlled_not_gate(std::size_t control, std::size_t target, std::size_t num_spins) {
  check_spin(control, num_spins);
  check_spin(target, num_spins);
  if (control == target) throw ConfigError("controlled-not needs two distinct spins");
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << num_spins);
  Matrix u = Matrix::Zero(dim, dim);
  const std::size_t bit_c = std::size_t{1} << (num_spins - 1 - control);
  const std::size_t bit_t = std::size_t{1} << (num_spins - 1 - target);
  for (std::size_t i = 0; i < static_cast<std::size_t>(dim); ++i) {
    const std::size_t j = (i & bit_c) ? (i ^ bit_t) : i;
    u(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return {u, "controlled_not"};
}

double bb1_phase(double theta) { return std::acos(-theta / (4.0 * std::numbers::pi)); }

namespace {

PulseStep rotation_step(double theta, double phase, double rabi_rad) {
  PulseStep p;
  p.duration_s = theta / rabi_rad;
  p.amplitudes = {rabi_rad * std::cos(phase), rabi_rad * std::sin(phase)};
  return p;
}

void check_rotation(double theta, double rabi_hz) {
  if (!(theta > 0.0 && theta <= kTwoPi)) throw ConfigError("rotation angle must lie in (0, 2 pi]");
  if (!(rabi_hz > 0.0)) throw ConfigError("hard pulse amplitude must be positive");
}

}  // namespace

ControlSequence bb1_sequence(double theta, double axis_phase, double rabi_hz) {
  check_rotation(theta, rabi_hz);
  const double rabi = hz_to_rad(rabi_hz);
  const double phi = bb1_phase(theta);
  const double pi = std::numbers::pi;
  ControlSequence seq;
  seq.steps.emplace_back(rotation_step(pi, axis_phase + phi, rabi));
  seq.steps.emplace_back(rotation_step(2.0 * pi, axis_phase + 3.0 * phi, rabi));
  seq.steps.emplace_back(rotation_step(pi, axis_phase + phi, rabi));
  seq.steps.emplace_back(rotation_step(theta, axis_phase, rabi));
  seq.metadata.label = "bb1";
  seq.metadata.provenance = "bb1 reference";
  return seq;
}

ControlSequence hard_pulse(double theta, double axis_phase, double rabi_hz) {
  check_rotation(theta, rabi_hz);
  ControlSequence seq;
  seq.steps.emplace_back(rotation_step(theta, axis_phase, hz_to_rad(rabi_hz)));
  seq.metadata.label = "hard";
  seq.metadata.provenance = "hard pulse reference";
  return seq;
}

}  // namespace grape

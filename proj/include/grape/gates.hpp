#pragma once

#include <cstddef>
#include <string>

#include "grape/sequence.hpp"
#include "grape/target.hpp"

namespace grape {

TargetGate identity_gate(std::size_t num_spins);

/// exp(-i angle (cos(phase) Ix + sin(phase) Iy)) on one spin.
TargetGate rotation_gate(double angle_rad, double phase_rad, std::size_t spin, std::size_t num_spins);
/// exp(-i angle Iz) on one spin.
TargetGate z_rotation_gate(double angle_rad, std::size_t spin, std::size_t num_spins);
/// diag(1, 1, 1, e^{i theta}) on the (a, b) pair.
TargetGate controlled_phase_gate(double theta, std::size_t a, std::size_t b, std::size_t num_spins);
TargetGate controlled_not_gate(std::size_t control, std::size_t target, std::size_t num_spins);

/// Wimperis phase for BB1: arccos(-theta / (4 pi)).
double bb1_phase(double theta);

/// BB1 as hard pulses on a single channel: pi(phi), 2pi(3 phi), pi(phi), then
/// theta about `axis_phase`; correction phases are relative to `axis_phase`.
/// Each element is one constant-amplitude step at `rabi_hz`.
ControlSequence bb1_sequence(double theta, double axis_phase, double rabi_hz);

/// One constant-amplitude step rotating by theta about `axis_phase`.
ControlSequence hard_pulse(double theta, double axis_phase, double rabi_hz);

}  // namespace grape

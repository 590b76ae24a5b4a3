#pragma once

#include "grape/objective.hpp"
#include "grape/sequence.hpp"
#include "grape/spin_system.hpp"
#include "grape/target.hpp"

namespace grape {

/// Representable amplitudes are k * max / (levels - 1), k = 0..levels-1;
/// representable phases are multiples of the phase resolution.
struct QuantizationSpec {
  std::size_t amplitude_levels = 1024;
  double phase_resolution_deg = 360.0 / 1024.0;
  double max_amplitude_hz = 0.0;

  void validate() const;
  /// 2^bits amplitude levels and 360/2^bits degree phase steps.
  static QuantizationSpec bits(unsigned bits, double max_amplitude_hz);
};

/// Rounds each channel's (u_x, u_y) in amplitude/phase form to the grid,
/// half away from zero. Idempotent. Delay steps pass through unchanged.
ControlSequence quantize(const ControlSequence& sequence, const QuantizationSpec& spec);

struct RoundingImpact {
  double exact = 0.0;
  double quantized = 0.0;
  double delta() const { return exact - quantized; }
};

RoundingImpact rounding_impact(const CompositeObjective& objective, const ControlSequence& sequence,
                               const QuantizationSpec& spec);
RoundingImpact rounding_impact(const SpinSystem& system, const ControlSequence& sequence,
                               const TargetGate& target, const EnsembleSpec& ensemble,
                               const QuantizationSpec& spec);

struct DelayPad {
  double pre_s = 0.0;
  double post_s = 0.0;

  void validate() const;
};

/// U_t' = D_post^dag U_t D_pre^dag with D = exp(-i t h0), so that a sequence
/// implementing U_t' between the hardware delays implements U_t overall.
TargetGate adjust_target(const TargetGate& target, const HamiltonianSet& hams, const DelayPad& pad);
TargetGate adjust_target(const TargetGate& target, const SpinSystem& system, const DelayPad& pad);

/// The sequence with the pads inserted as delay steps (zero-length pads omitted).
ControlSequence pad_sequence(const ControlSequence& sequence, const DelayPad& pad);

}  // namespace grape

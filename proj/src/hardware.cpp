#include "grape/hardware.hpp"

#include <cmath>
#include <sstream>

#include "grape/propagation.hpp"

namespace grape {

void QuantizationSpec::validate() const {
  if (amplitude_levels < 2) throw ConfigError("quantization needs at least 2 amplitude levels");
  if (!(phase_resolution_deg > 0.0)) throw ConfigError("phase resolution must be positive");
  if (!(max_amplitude_hz > 0.0)) throw ConfigError("quantization max amplitude must be positive");
}

QuantizationSpec QuantizationSpec::bits(unsigned bits, double max_amplitude_hz) {
  QuantizationSpec spec;
  spec.amplitude_levels = std::size_t{1} << bits;
  spec.phase_resolution_deg = 360.0 / static_cast<double>(spec.amplitude_levels);
  spec.max_amplitude_hz = max_amplitude_hz;
  return spec;
}

ControlSequence quantize(const ControlSequence& sequence, const QuantizationSpec& spec) {
  spec.validate();
  const double max_rad = hz_to_rad(spec.max_amplitude_hz);
  const double amp_step = max_rad / static_cast<double>(spec.amplitude_levels - 1);
  const double phase_step = spec.phase_resolution_deg * std::numbers::pi / 180.0;
  const auto phase_slots = static_cast<long long>(std::llround(360.0 / spec.phase_resolution_deg));
  const bool phase_wraps = std::abs(360.0 / spec.phase_resolution_deg - static_cast<double>(phase_slots)) < 1e-9;

  ControlSequence out = sequence;
  for (std::size_t j = 0; j < out.steps.size(); ++j) {
    auto* p = std::get_if<PulseStep>(&out.steps[j]);
    if (p == nullptr) continue;
    for (std::size_t c = 0; c < p->amplitudes.size(); c += 2) {
      const double ux = p->amplitudes[c];
      const double uy = c + 1 < p->amplitudes.size() ? p->amplitudes[c + 1] : 0.0;
      const double r = std::hypot(ux, uy);
      if (r > max_rad * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "step " << j << " channel " << c / 2 << " amplitude " << rad_to_hz(r)
           << " Hz exceeds the quantization maximum " << spec.max_amplitude_hz << " Hz";
        throw ConfigError(os.str());
      }
      const long long level = std::min<long long>(std::llround(r / amp_step),
                                                  static_cast<long long>(spec.amplitude_levels - 1));
      double phi = std::atan2(uy, ux);
      if (phi < 0.0) phi += kTwoPi;
      long long slot = std::llround(phi / phase_step);
      if (phase_wraps && slot >= phase_slots) slot -= phase_slots;
      const double amplitude = static_cast<double>(level) * amp_step;
      const double phase = static_cast<double>(slot) * phase_step;
      p->amplitudes[c] = level == 0 ? 0.0 : amplitude * std::cos(phase);
      if (c + 1 < p->amplitudes.size()) p->amplitudes[c + 1] = level == 0 ? 0.0 : amplitude * std::sin(phase);
    }
  }
  return out;
}

RoundingImpact rounding_impact(const CompositeObjective& objective, const ControlSequence& sequence,
                               const QuantizationSpec& spec) {
  RoundingImpact out;
  out.exact = objective.evaluate(sequence, false).total;
  out.quantized = objective.evaluate(quantize(sequence, spec), false).total;
  return out;
}

RoundingImpact rounding_impact(const SpinSystem& system, const ControlSequence& sequence,
                               const TargetGate& target, const EnsembleSpec& ensemble,
                               const QuantizationSpec& spec) {
  return rounding_impact(CompositeObjective(system, target, ensemble), sequence, spec);
}

void DelayPad::validate() const {
  if (!(pre_s >= 0.0) || !(post_s >= 0.0)) throw ConfigError("hardware delays must be non-negative");
}

TargetGate adjust_target(const TargetGate& target, const HamiltonianSet& hams, const DelayPad& pad) {
  pad.validate();
  const Matrix pre = delay_propagator(hams, pad.pre_s);
  const Matrix post = delay_propagator(hams, pad.post_s);
  TargetGate out;
  out.unitary = post.adjoint() * target.unitary * pre.adjoint();
  out.label = target.label;
  return out;
}

TargetGate adjust_target(const TargetGate& target, const SpinSystem& system, const DelayPad& pad) {
  return adjust_target(target, build_hamiltonians(system), pad);
}

ControlSequence pad_sequence(const ControlSequence& sequence, const DelayPad& pad) {
  pad.validate();
  ControlSequence out;
  out.metadata = sequence.metadata;
  if (pad.pre_s > 0.0) out.steps.emplace_back(DelayStep{pad.pre_s});
  out.steps.insert(out.steps.end(), sequence.steps.begin(), sequence.steps.end());
  if (pad.post_s > 0.0) out.steps.emplace_back(DelayStep{pad.post_s});
  return out;
}

}  // namespace grape

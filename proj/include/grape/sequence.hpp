#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "grape/types.hpp"

namespace grape {

/// Fixed-duration step with constant amplitudes, one per control matrix (rad/s).
struct PulseStep {
  double duration_s = 0.0;
  std::vector<double> amplitudes;

  bool operator==(const PulseStep&) const = default;
};

/// Free evolution under the drift Hamiltonian; its duration is a parameter.
struct DelayStep {
  double duration_s = 0.0;

  bool operator==(const DelayStep&) const = default;
};

using Step = std::variant<PulseStep, DelayStep>;

struct SequenceMetadata {
  std::string label;
  std::uint64_t seed = 0;
  std::string provenance;

  bool operator==(const SequenceMetadata&) const = default;
};

struct ControlSequence {
  std::vector<Step> steps;
  SequenceMetadata metadata;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  double total_duration() const;
  std::size_t num_pulse_steps() const;
  std::size_t num_delay_steps() const;

  /// Checks durations are non-negative and every pulse carries `num_controls` amplitudes.
  void validate(std::size_t num_controls) const;

  bool operator==(const ControlSequence&) const = default;
};

inline double step_duration(const Step& s) {
  return std::visit([](const auto& v) { return v.duration_s; }, s);
}

/// Optimizer parameter layout: pulse amplitudes and delay durations in step order.
std::size_t parameter_count(const ControlSequence& seq);
RealVector to_parameters(const ControlSequence& seq);
/// Writes `params` back into a copy of `layout`. Delay durations are clamped at 0.
ControlSequence from_parameters(const ControlSequence& layout, const RealVector& params);
/// Indices of the parameters that are delay durations.
std::vector<std::size_t> delay_parameter_indices(const ControlSequence& seq);

/// FNV-1a over the step kinds, durations and amplitudes.
std::uint64_t sequence_hash(const ControlSequence& seq);

}  // namespace grape

#include "grape/sequence.hpp"

#include <algorithm>
#include <bit>

namespace grape {

double ControlSequence::total_duration() const {
  double t = 0.0;
  for (const auto& s : steps) t += step_duration(s);
  return t;
}

std::size_t ControlSequence::num_pulse_steps() const {
  return static_cast<std::size_t>(std::count_if(
      steps.begin(), steps.end(), [](const Step& s) { return std::holds_alternative<PulseStep>(s); }));
}

std::size_t ControlSequence::num_delay_steps() const { return steps.size() - num_pulse_steps(); }

void ControlSequence::validate(std::size_t num_controls) const {
  for (std::size_t j = 0; j < steps.size(); ++j) {
    const double d = step_duration(steps[j]);
    if (!(d >= 0.0)) throw ConfigError("step " + std::to_string(j) + " has negative duration");
    if (const auto* p = std::get_if<PulseStep>(&steps[j])) {
      if (p->amplitudes.size() != num_controls) {
        throw ConfigError("pulse step " + std::to_string(j) + " has " +
                          std::to_string(p->amplitudes.size()) + " amplitudes, expected " +
                          std::to_string(num_controls));
      }
    }
  }
}

std::size_t parameter_count(const ControlSequence& seq) {
  std::size_t n = 0;
  for (const auto& s : seq.steps) {
    if (const auto* p = std::get_if<PulseStep>(&s)) {
      n += p->amplitudes.size();
    } else {
      n += 1;
    }
  }
  return n;
}

RealVector to_parameters(const ControlSequence& seq) {
  RealVector x(static_cast<Eigen::Index>(parameter_count(seq)));
  Eigen::Index i = 0;
  for (const auto& s : seq.steps) {
    if (const auto* p = std::get_if<PulseStep>(&s)) {
      for (double a : p->amplitudes) x[i++] = a;
    } else {
      x[i++] = std::get<DelayStep>(s).duration_s;
    }
  }
  return x;
}

ControlSequence from_parameters(const ControlSequence& layout, const RealVector& params) {
  if (static_cast<std::size_t>(params.size()) != parameter_count(layout)) {
    throw ConfigError("parameter vector length does not match sequence layout");
  }
  ControlSequence out = layout;
  Eigen::Index i = 0;
  for (auto& s : out.steps) {
    if (auto* p = std::get_if<PulseStep>(&s)) {
      for (double& a : p->amplitudes) a = params[i++];
    } else {
      std::get<DelayStep>(s).duration_s = std::max(0.0, params[i++]);
    }
  }
  return out;
}

std::vector<std::size_t> delay_parameter_indices(const ControlSequence& seq) {
  std::vector<std::size_t> out;
  std::size_t i = 0;
  for (const auto& s : seq.steps) {
    if (const auto* p = std::get_if<PulseStep>(&s)) {
      i += p->amplitudes.size();
    } else {
      out.push_back(i++);
    }
  }
  return out;
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void mix(std::uint64_t& h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffU;
    h *= kFnvPrime;
  }
}

}  // namespace

std::uint64_t sequence_hash(const ControlSequence& seq) {
  std::uint64_t h = kFnvOffset;
  for (const auto& s : seq.steps) {
    mix(h, s.index());
    mix(h, std::bit_cast<std::uint64_t>(step_duration(s)));
    if (const auto* p = std::get_if<PulseStep>(&s)) {
      mix(h, p->amplitudes.size());
      for (double a : p->amplitudes) mix(h, std::bit_cast<std::uint64_t>(a));
    }
  }
  return h;
}

}  // namespace grape

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "grape/hardware.hpp"
#include "grape/sequence.hpp"

namespace grape {

/// Native sequence text. Metadata as leading `# key: value` lines, then a
/// header row and one row per step:
///   kind,duration_s,ch0_ux_hz,ch0_uy_hz,...
/// kind is P or D; amplitudes are in Hz with 15 significant digits. Delay rows
/// carry zero amplitudes.
void write_sequence(std::ostream& out, const ControlSequence& seq);
ControlSequence read_sequence(std::istream& in, const std::string& source = "<stream>");

void save_sequence(const std::filesystem::path& path, const ControlSequence& seq);
ControlSequence load_sequence(const std::filesystem::path& path);

struct AmpPhaseOptions {
  bool delays_as_zero = false;  ///< otherwise delay steps are an error
  const QuantizationSpec* quantization = nullptr;
};

/// duration_s,ch0_amplitude_hz,ch0_phase_deg,... with phase in [0, 360)
/// measured counterclockwise from +x.
void write_amp_phase(std::ostream& out, const ControlSequence& seq, const AmpPhaseOptions& options);

/// Amplitude (Hz) and phase (degrees in [0, 360)) of a Cartesian pair in rad/s.
std::pair<double, double> to_amp_phase(double ux, double uy);

/// N rows of whitespace- or comma-separated "re im" pairs.
Matrix load_matrix(const std::filesystem::path& path);

/// Shortest round-trippable formatting at 15 significant digits.
std::string format_number(double v);

}  // namespace grape

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "grape/types.hpp"

namespace grape {

enum class CouplingMode { kWeak, kStrong };

CouplingMode parse_coupling_mode(const std::string& text);
std::string to_string(CouplingMode mode);

struct Coupling {
  std::size_t a = 0;
  std::size_t b = 0;
  double j_hz = 0.0;
  CouplingMode mode = CouplingMode::kWeak;
};

/// One RF channel. It drives every addressed spin with the same x/y field.
struct Channel {
  std::vector<std::size_t> spins;
  double max_amplitude_hz = 0.0;
};

/// Offsets and couplings are in Hz relative to the transmitter; contaminants are
/// isolated impurity spins that share the control field but couple to nothing.
struct SpinSystem {
  std::vector<double> offsets_hz;
  std::vector<Coupling> couplings;
  std::vector<double> contaminant_offsets_hz;
  std::vector<Channel> channels;
  std::size_t max_spins = 6;

  std::size_t num_spins() const { return offsets_hz.size(); }
  std::size_t dimension() const { return std::size_t{1} << num_spins(); }
  std::size_t num_controls() const { return 2 * channels.size(); }

  /// Throws ConfigError on out-of-range indices, self or duplicate couplings,
  /// channels addressing unknown spins, or too many spins.
  void validate() const;
};

/// Drift h0 and control matrices in rad/s. controls[2c] is the x and
/// controls[2c+1] the y component of channel c.
struct HamiltonianSet {
  Matrix h0;
  std::vector<Matrix> controls;

  std::size_t dimension() const { return static_cast<std::size_t>(h0.rows()); }
};

/// Single-spin operators (one half Pauli).
Matrix spin_x();
Matrix spin_y();
Matrix spin_z();

/// Embeds a single-spin operator on `spin` of an n-spin register. Spin 0 is the
/// leftmost (most significant) tensor factor.
Matrix embed(const Matrix& op, std::size_t spin, std::size_t num_spins);

HamiltonianSet build_hamiltonians(const SpinSystem& system);

struct PulseLengthError {
  double scale = 1.0;
};
struct OffResonanceError {
  double offset_hz = 0.0;
};

/// PLE scales every control matrix; ORE shifts every spin by the same offset.
HamiltonianSet apply_error_model(const HamiltonianSet& hams, const PulseLengthError& ple);
HamiltonianSet apply_error_model(const HamiltonianSet& hams, const OffResonanceError& ore);

/// One 2x2 set per contaminant spin, seeing the same channels as the main system.
std::vector<HamiltonianSet> build_contaminant_hamiltonians(const SpinSystem& system);

}  // namespace grape

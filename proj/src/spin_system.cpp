#include "grape/spin_system.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace grape {

double hermitian_deviation(const Matrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  if (h.size() == 0) return 0.0;
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_deviation(const Matrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  if (u.size() == 0) return 0.0;
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

CouplingMode parse_coupling_mode(const std::string& text) {
  if (text == "weak") return CouplingMode::kWeak;
  if (text == "strong") return CouplingMode::kStrong;
  throw ConfigError("invalid coupling mode '" + text + "' (expected weak or strong)");
}

std::string to_string(CouplingMode mode) {
  return mode == CouplingMode::kWeak ? "weak" : "strong";
}

void SpinSystem::validate() const {
  if (offsets_hz.empty()) throw ConfigError("spin system has no spins");
  if (num_spins() > max_spins) {
    throw ConfigError("spin system has " + std::to_string(num_spins()) +
                      " spins, more than the configured maximum of " + std::to_string(max_spins));
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& c : couplings) {
    if (c.a >= num_spins() || c.b >= num_spins()) {
      throw ConfigError("coupling (" + std::to_string(c.a) + ", " + std::to_string(c.b) +
                        ") references a spin that does not exist");
    }
    if (c.a == c.b) throw ConfigError("coupling of spin " + std::to_string(c.a) + " with itself");
    auto key = std::minmax(c.a, c.b);
    if (!seen.insert(key).second) {
      throw ConfigError("duplicate coupling (" + std::to_string(key.first) + ", " +
                        std::to_string(key.second) + ")");
    }
  }
  for (std::size_t c = 0; c < channels.size(); ++c) {
    for (auto s : channels[c].spins) {
      if (s >= num_spins()) {
        throw ConfigError("channel " + std::to_string(c) + " addresses unknown spin " +
                          std::to_string(s));
      }
    }
    if (channels[c].max_amplitude_hz < 0.0) {
      throw ConfigError("channel " + std::to_string(c) + " has negative max amplitude");
    }
  }
}

Matrix spin_x() {
  Matrix m(2, 2);
  m << 0.0, 0.5, 0.5, 0.0;
  return m;
}

Matrix spin_y() {
  Matrix m(2, 2);
  m << 0.0, Complex(0.0, -0.5), Complex(0.0, 0.5), 0.0;
  return m;
}

Matrix spin_z() {
  Matrix m(2, 2);
  m << 0.5, 0.0, 0.0, -0.5;
  return m;
}

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

Matrix embed(const Matrix& op, std::size_t spin, std::size_t num_spins) {
  Matrix out = Matrix::Identity(1, 1);
  const Matrix id = Matrix::Identity(2, 2);
  for (std::size_t s = 0; s < num_spins; ++s) out = kron(out, s == spin ? op : id);
  return out;
}

HamiltonianSet build_hamiltonians(const SpinSystem& system) {
  system.validate();
  const std::size_t n = system.num_spins();
  const auto dim = static_cast<Eigen::Index>(system.dimension());

  std::vector<Matrix> ix, iy, iz;
  for (std::size_t s = 0; s < n; ++s) {
    ix.push_back(embed(spin_x(), s, n));
    iy.push_back(embed(spin_y(), s, n));
    iz.push_back(embed(spin_z(), s, n));
  }

  HamiltonianSet hams;
  hams.h0 = Matrix::Zero(dim, dim);
  for (std::size_t s = 0; s < n; ++s) hams.h0 += hz_to_rad(system.offsets_hz[s]) * iz[s];
  for (const auto& c : system.couplings) {
    const double w = hz_to_rad(c.j_hz);
    hams.h0 += w * (iz[c.a] * iz[c.b]);
    if (c.mode == CouplingMode::kStrong) {
      hams.h0 += w * (ix[c.a] * ix[c.b] + iy[c.a] * iy[c.b]);
    }
  }

  for (const auto& ch : system.channels) {
    Matrix cx = Matrix::Zero(dim, dim);
    Matrix cy = Matrix::Zero(dim, dim);
    for (auto s : ch.spins) {
      cx += ix[s];
      cy += iy[s];
    }
    hams.controls.push_back(std::move(cx));
    hams.controls.push_back(std::move(cy));
  }
  return hams;
}

HamiltonianSet apply_error_model(const HamiltonianSet& hams, const PulseLengthError& ple) {
  if (!(ple.scale > 0.0)) throw ConfigError("pulse length error scale must be positive");
  HamiltonianSet out = hams;
  if (ple.scale == 1.0) return out;
  for (auto& c : out.controls) c *= ple.scale;
  return out;
}

HamiltonianSet apply_error_model(const HamiltonianSet& hams, const OffResonanceError& ore) {
  HamiltonianSet out = hams;
  if (ore.offset_hz == 0.0) return out;
  const std::size_t dim = hams.dimension();
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  const double w = hz_to_rad(ore.offset_hz);
  for (std::size_t s = 0; s < n; ++s) out.h0 += w * embed(spin_z(), s, n);
  return out;
}

std::vector<HamiltonianSet> build_contaminant_hamiltonians(const SpinSystem& system) {
  std::vector<HamiltonianSet> out;
  for (double offset : system.contaminant_offsets_hz) {
    HamiltonianSet h;
    h.h0 = hz_to_rad(offset) * spin_z();
    for (std::size_t c = 0; c < system.channels.size(); ++c) {
      h.controls.push_back(spin_x());
      h.controls.push_back(spin_y());
    }
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace grape

#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace grape {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Bad user input: malformed configuration, invalid indices, failed preconditions.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical contract violated (non-Hermitian generator, non-unitary result, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double hz_to_rad(double hz) { return kTwoPi * hz; }
inline double rad_to_hz(double rad_per_s) { return rad_per_s / kTwoPi; }

/// max |H - H^dagger| over all elements.
double hermitian_deviation(const Matrix& h);
/// max |U^dagger U - 1| over all elements.
double unitarity_deviation(const Matrix& u);

}  // namespace grape

#pragma once

#include <string>

#include "grape/types.hpp"

namespace grape {

struct TargetGate {
  Matrix unitary;
  std::string label;

  std::size_t dimension() const { return static_cast<std::size_t>(unitary.rows()); }
  /// Throws ConfigError unless the matrix is square and unitary to 1e-10.
  void validate() const;
};

}  // namespace grape

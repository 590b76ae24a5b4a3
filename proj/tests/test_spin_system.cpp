#include <doctest.h>

#include <random>

#include "grape/spin_system.hpp"
#include "oracles.hpp"

using namespace grape;

namespace {

SpinSystem two_spin(CouplingMode mode, double j = 7.0) {
  SpinSystem s;
  s.offsets_hz = {350.0, -350.0};
  s.couplings = {{0, 1, j, mode}};
  s.channels = {{{0, 1}, 5000.0}};
  return s;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("single spin on resonance has a zero drift") {
  SpinSystem s;
  s.offsets_hz = {0.0};
  s.channels = {{{0}, 1000.0}};
  const auto h = build_hamiltonians(s);
  CHECK(h.h0.rows() == 2);
  CHECK(max_abs(h.h0) == 0.0);
  REQUIRE(h.controls.size() == 2);
  CHECK(max_abs(h.controls[0] - spin_x()) == 0.0);
  CHECK(max_abs(h.controls[1] - spin_y()) == 0.0);
}

TEST_CASE("weak coupling drift matches the elementwise oracle and is diagonal") {
  const auto sys = two_spin(CouplingMode::kWeak);
  const auto h = build_hamiltonians(sys);
  CHECK(max_abs(h.h0 - oracle::drift_elementwise(sys)) < 1e-12);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      if (i != j) CHECK(h.h0(i, j) == Complex(0.0));
    }
  }
  // |00>: 2 pi (350/2 - 350/2 + 7/4)
  CHECK(h.h0(0, 0).real() == doctest::Approx(kTwoPi * 7.0 / 4.0).epsilon(1e-14));
  // |01>: 2 pi (350/2 + 350/2 - 7/4)
  CHECK(h.h0(1, 1).real() == doctest::Approx(kTwoPi * (350.0 - 7.0 / 4.0)).epsilon(1e-14));
}

TEST_CASE("strong coupling adds exactly the flip-flop block") {
  const auto weak = build_hamiltonians(two_spin(CouplingMode::kWeak));
  const auto strong = build_hamiltonians(two_spin(CouplingMode::kStrong));
  const Matrix diff = strong.h0 - weak.h0;
  const Matrix ixix = embed(spin_x(), 0, 2) * embed(spin_x(), 1, 2);
  const Matrix iyiy = embed(spin_y(), 0, 2) * embed(spin_y(), 1, 2);
  CHECK(max_abs(diff - kTwoPi * 7.0 * (ixix + iyiy)) < 1e-12);
  // Only the |01>,|10> block is populated, with 2 pi J / 2.
  CHECK(std::abs(diff(1, 2) - Complex(kTwoPi * 3.5)) < 1e-12);
  CHECK(std::abs(diff(2, 1) - Complex(kTwoPi * 3.5)) < 1e-12);
  CHECK(std::abs(diff(0, 3)) == 0.0);
  CHECK(max_abs(strong.h0 - oracle::drift_elementwise(two_spin(CouplingMode::kStrong))) < 1e-12);
}

TEST_CASE("random systems: Hermitian, traceless controls, matching oracles") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> off(-1000.0, 1000.0);
  std::uniform_int_distribution<int> count(1, 4);
  for (int trial = 0; trial < 30; ++trial) {
    SpinSystem s;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) s.offsets_hz.push_back(off(rng));
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (rng() % 2) s.couplings.push_back({std::size_t(a), std::size_t(b), off(rng) / 50.0,
                                              rng() % 2 ? CouplingMode::kWeak : CouplingMode::kStrong});
      }
    }
    Channel ch;
    for (int i = 0; i < n; ++i) {
      if (rng() % 3 != 0 || i == 0) ch.spins.push_back(std::size_t(i));
    }
    s.channels = {ch};
    const auto h = build_hamiltonians(s);
    CHECK(hermitian_deviation(h.h0) < 1e-12);
    CHECK(max_abs(h.h0 - oracle::drift_elementwise(s)) < 1e-9);
    REQUIRE(h.controls.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(hermitian_deviation(h.controls[k]) < 1e-12);
      CHECK(std::abs(h.controls[k].trace()) < 1e-12);
      CHECK(max_abs(h.controls[k] - oracle::control_elementwise(ch.spins, std::size_t(n), k == 1)) < 1e-14);
    }
    bool weak_only = std::all_of(s.couplings.begin(), s.couplings.end(),
                                 [](const Coupling& c) { return c.mode == CouplingMode::kWeak; });
    if (weak_only) CHECK(max_abs(Matrix(h.h0.diagonal().asDiagonal()) - h.h0) == 0.0);
  }
}

TEST_CASE("error models") {
  const auto h = build_hamiltonians(two_spin(CouplingMode::kStrong));

  SUBCASE("unit PLE and zero ORE are identities") {
    const auto a = apply_error_model(h, PulseLengthError{1.0});
    const auto b = apply_error_model(h, OffResonanceError{0.0});
    CHECK(max_abs(a.h0 - h.h0) == 0.0);
    CHECK(max_abs(b.h0 - h.h0) == 0.0);
    for (std::size_t k = 0; k < h.controls.size(); ++k) {
      CHECK(max_abs(a.controls[k] - h.controls[k]) == 0.0);
      CHECK(max_abs(b.controls[k] - h.controls[k]) == 0.0);
    }
  }
  SUBCASE("PLE endpoints of the 70-130% inhomogeneity range scale the controls") {
    for (double s : {0.7, 1.3}) {
      const auto e = apply_error_model(h, PulseLengthError{s});
      CHECK(max_abs(e.h0 - h.h0) == 0.0);
      for (std::size_t k = 0; k < h.controls.size(); ++k) CHECK(max_abs(e.controls[k] - s * h.controls[k]) < 1e-15);
    }
  }
  SUBCASE("ORE shifts every spin uniformly") {
    const auto e = apply_error_model(h, OffResonanceError{25.0});
    const Matrix shift = kTwoPi * 25.0 * (embed(spin_z(), 0, 2) + embed(spin_z(), 1, 2));
    CHECK(max_abs(e.h0 - h.h0 - shift) < 1e-12);
  }
  SUBCASE("non-positive PLE scale is rejected") {
    CHECK_THROWS_AS(apply_error_model(h, PulseLengthError{0.0}), ConfigError);
    CHECK_THROWS_AS(apply_error_model(h, PulseLengthError{-1.0}), ConfigError);
  }
}

TEST_CASE("contaminant Hamiltonians") {
  SpinSystem s = two_spin(CouplingMode::kWeak);
  CHECK(build_contaminant_hamiltonians(s).empty());

  s.contaminant_offsets_hz = {0.0, 100.0};
  const auto cs = build_contaminant_hamiltonians(s);
  REQUIRE(cs.size() == 2);
  CHECK(max_abs(cs[0].h0) == 0.0);
  CHECK(std::abs(cs[1].h0(0, 0) - Complex(std::numbers::pi * 100.0)) < 1e-12);
  CHECK(std::abs(cs[1].h0(1, 1) - Complex(-std::numbers::pi * 100.0)) < 1e-12);
  REQUIRE(cs[1].controls.size() == 2);
  CHECK(max_abs(cs[1].controls[0] - spin_x()) == 0.0);
  CHECK(max_abs(cs[1].controls[1] - spin_y()) == 0.0);
}

TEST_CASE("system validation") {
  SpinSystem s = two_spin(CouplingMode::kWeak);
  SUBCASE("duplicate pair") {
    s.couplings.push_back({1, 0, 3.0, CouplingMode::kWeak});
    CHECK_THROWS_AS(build_hamiltonians(s), ConfigError);
  }
  SUBCASE("self coupling") {
    s.couplings = {{1, 1, 3.0, CouplingMode::kWeak}};
    CHECK_THROWS_AS(build_hamiltonians(s), ConfigError);
  }
  SUBCASE("unknown spin") {
    s.couplings = {{0, 2, 3.0, CouplingMode::kWeak}};
    CHECK_THROWS_AS(build_hamiltonians(s), ConfigError);
  }
  SUBCASE("dimension guard") {
    s.offsets_hz.assign(7, 0.0);
    CHECK_THROWS_AS(build_hamiltonians(s), ConfigError);
    s.max_spins = 7;
    s.channels = {{{0}, 1.0}};
    CHECK(build_hamiltonians(s).dimension() == 128);
  }
  SUBCASE("invalid mode text") { CHECK_THROWS_AS(parse_coupling_mode("medium"), ConfigError); }
}

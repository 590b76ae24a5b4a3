#include <doctest.h>

#include <cmath>
#include <random>

#include "grape/propagation.hpp"
#include "oracles.hpp"

using namespace grape;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }
double rel_err(const Matrix& a, const Matrix& b) { return max_abs(a - b) / max_abs(b); }

HamiltonianSet single_spin(double offset_hz = 0.0) {
  SpinSystem s;
  s.offsets_hz = {offset_hz};
  s.channels = {{{0}, 1000.0}};
  return build_hamiltonians(s);
}

HamiltonianSet two_spin(double j_hz, double offset_hz = 0.0, CouplingMode mode = CouplingMode::kWeak) {
  SpinSystem s;
  s.offsets_hz = {offset_hz, -offset_hz};
  s.couplings = {{0, 1, j_hz, mode}};
  s.channels = {{{0, 1}, 5000.0}};
  return build_hamiltonians(s);
}

ControlSequence random_sequence(std::size_t steps, std::size_t controls, double dt, double amp,
                                std::mt19937_64& rng, bool with_delays = false) {
  std::uniform_real_distribution<double> u(-amp, amp);
  ControlSequence seq;
  for (std::size_t j = 0; j < steps; ++j) {
    if (with_delays && j % 4 == 3) {
      seq.steps.emplace_back(DelayStep{dt * (1.0 + 0.5 * std::abs(u(rng)) / amp)});
      continue;
    }
    PulseStep p;
    p.duration_s = dt;
    for (std::size_t k = 0; k < controls; ++k) p.amplitudes.push_back(u(rng));
    seq.steps.emplace_back(std::move(p));
  }
  return seq;
}

}  // namespace

TEST_CASE("matrix exponential") {
  SUBCASE("zero generator gives identity") {
    const Matrix u = matrix_exponential_hermitian_generator(Matrix::Zero(4, 4), 3.7);
    CHECK(max_abs(u - Matrix::Identity(4, 4)) < 1e-15);
  }
  SUBCASE("diagonal generator") {
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = 3.0;
    h(1, 1) = -1.25;
    const double t = 0.4;
    const Matrix u = matrix_exponential_hermitian_generator(h, t);
    CHECK(std::abs(u(0, 0) - std::polar(1.0, -3.0 * t)) < 1e-15);
    CHECK(std::abs(u(1, 1) - std::polar(1.0, 1.25 * t)) < 1e-15);
    CHECK(std::abs(u(0, 1)) < 1e-15);
  }
  SUBCASE("random Hermitian matches the Taylor oracle") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix h = oracle::random_hermitian(4, rng, 2000.0);
      const Matrix a = matrix_exponential_hermitian_generator(h, 1e-3);
      const Matrix b = oracle::taylor_expm(h, 1e-3);
      CHECK(max_abs(a - b) < 1e-10);
      CHECK(unitarity_deviation(a) < 1e-10);
    }
  }
  SUBCASE("time reversal") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix h = oracle::random_hermitian(8, rng, 500.0);
      const Matrix u = matrix_exponential_hermitian_generator(h, 2e-3) * matrix_exponential_hermitian_generator(h, -2e-3);
      CHECK(max_abs(u - Matrix::Identity(8, 8)) < 1e-10);
    }
  }
  SUBCASE("non-Hermitian generator is rejected") {
    Matrix h = Matrix::Zero(2, 2);
    h(0, 1) = 1.0;
    CHECK_THROWS_AS(matrix_exponential_hermitian_generator(h, 1.0), NumericalError);
  }
}

TEST_CASE("pulse propagator") {
  const auto h = single_spin();
  SUBCASE("zero controls and drift give identity") {
    const Matrix u = pulse_propagator(h, {1e-5, {0.0, 0.0}});
    CHECK(max_abs(u - Matrix::Identity(2, 2)) < 1e-15);
  }
  SUBCASE("90 degree x rotation") {
    const double dt = 1e-5;
    const Matrix u = pulse_propagator(h, {dt, {0.5 * std::numbers::pi / dt, 0.0}});
    const double c = std::sqrt(0.5);
    Matrix expected(2, 2);
    expected << c, Complex(0.0, -c), Complex(0.0, -c), c;
    CHECK(max_abs(u - expected) < 1e-12);
  }
  SUBCASE("weak coupling evolution for 1/(2J) is a diagonal phase gate") {
    const double j = 7.0;
    const auto h2 = two_spin(j);
    const Matrix u = pulse_propagator(h2, {1.0 / (2.0 * j), {0.0, 0.0}});
    const Complex minus = std::polar(1.0, -std::numbers::pi / 4.0);
    const Complex plus = std::polar(1.0, std::numbers::pi / 4.0);
    CHECK(std::abs(u(0, 0) - minus) < 1e-12);
    CHECK(std::abs(u(1, 1) - plus) < 1e-12);
    CHECK(std::abs(u(2, 2) - plus) < 1e-12);
    CHECK(std::abs(u(3, 3) - minus) < 1e-12);
    CHECK(max_abs(Matrix(u.diagonal().asDiagonal()) - u) < 1e-12);
  }
  SUBCASE("amplitude count mismatch") { CHECK_THROWS_AS(pulse_propagator(h, {1e-5, {1.0}}), ConfigError); }
}

TEST_CASE("delay propagator") {
  const auto h = two_spin(7.0, 350.0);
  CHECK(max_abs(delay_propagator(h, 0.0) - Matrix::Identity(4, 4)) < 1e-15);
  const double t = 1e-3;
  const Matrix u = delay_propagator(h, t);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::abs(u(i, i) - std::polar(1.0, -t * h.h0(i, i).real())) < 1e-12);
  CHECK(max_abs(u - pulse_propagator(h, {t, {0.0, 0.0}})) < 1e-15);
  CHECK_THROWS_AS(delay_propagator(h, -1e-6), ConfigError);
}

TEST_CASE("propagator derivatives") {
  const auto h = two_spin(7.0, 350.0, CouplingMode::kStrong);

  SUBCASE("zero duration gives zero derivative") {
    const Step s = PulseStep{0.0, {1000.0, -300.0}};
    for (auto mode : {GradientMode::kFirstOrder, GradientMode::kExact}) {
      CHECK(max_abs(propagator_derivative(h, s, 0, mode)) == 0.0);
    }
  }

  SUBCASE("delay derivative matches a central difference") {
    const double t = 1e-3, step = 1e-9;
    const Matrix fd = (delay_propagator(h, t + step) - delay_propagator(h, t - step)) / (2.0 * step);
    for (auto mode : {GradientMode::kFirstOrder, GradientMode::kExact}) {
      const Matrix d = propagator_derivative(h, Step{DelayStep{t}}, 0, mode);
      CHECK(rel_err(d, fd) < 1e-5);
    }
    CHECK_THROWS_AS(propagator_derivative(h, Step{DelayStep{t}}, 1, GradientMode::kExact), ConfigError);
  }

  SUBCASE("exact mode on a single spin matches a central difference") {
    const auto h1 = single_spin(120.0);
    const double dt = 2e-4;
    const PulseStep p{dt, {3000.0, 1700.0}};
    for (std::size_t k = 0; k < 2; ++k) {
      const double step = 1e-3;
      PulseStep plus = p, minus = p;
      plus.amplitudes[k] += step;
      minus.amplitudes[k] -= step;
      const Matrix fd = (pulse_propagator(h1, plus) - pulse_propagator(h1, minus)) / (2.0 * step);
      CHECK(rel_err(propagator_derivative(h1, Step{p}, k, GradientMode::kExact), fd) < 1e-7);
    }
  }

  SUBCASE("exact mode agrees with central differences over two decades of step size") {
    std::mt19937_64 rng(8);
    const double dt = 5e-5;
    const PulseStep p{dt, {4000.0, -2500.0}};
    for (std::size_t k = 0; k < 2; ++k) {
      const Matrix exact = propagator_derivative(h, Step{p}, k, GradientMode::kExact);
      for (double step : {1e-2, 1e-1, 1.0}) {
        PulseStep plus = p, minus = p;
        plus.amplitudes[k] += step;
        minus.amplitudes[k] -= step;
        const Matrix fd = (pulse_propagator(h, plus) - pulse_propagator(h, minus)) / (2.0 * step);
        CHECK(rel_err(exact, fd) < 1e-6);
      }
    }
  }

  SUBCASE("first-order derivative converges to exact with slope two") {
    std::vector<double> dts = {1e-6, 1e-5, 1e-4};
    std::vector<double> errs;
    for (double dt : dts) {
      const Step s = PulseStep{dt, {3000.0, 1000.0}};
      const Matrix a = propagator_derivative(h, s, 0, GradientMode::kFirstOrder);
      const Matrix b = propagator_derivative(h, s, 0, GradientMode::kExact);
      errs.push_back(max_abs(a - b));
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
      const double slope = std::log10(errs[i + 1] / errs[i]) / std::log10(dts[i + 1] / dts[i]);
      CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
    }
  }

  SUBCASE("invalid control index") {
    CHECK_THROWS_AS(propagator_derivative(h, Step{PulseStep{1e-5, {0.0, 0.0}}}, 2, GradientMode::kFirstOrder),
                    ConfigError);
  }
}

TEST_CASE("propagator cache") {
  const auto h = two_spin(7.0, 350.0, CouplingMode::kStrong);
  std::mt19937_64 rng(21);
  const TargetGate target{oracle::random_unitary(4, rng), "random"};

  SUBCASE("single step") {
    ControlSequence seq;
    seq.steps.emplace_back(PulseStep{1e-5, {2000.0, 300.0}});
    const auto cache = build_cache(h, seq, target);
    CHECK(max_abs(cache.forward[1] - cache.step_props[0]) == 0.0);
    CHECK(max_abs(cache.backward[1] - target.unitary) == 0.0);
    CHECK(max_abs(cache.final - cache.step_props[0]) == 0.0);
  }

  SUBCASE("forward product and position-independent overlap") {
    const auto seq = random_sequence(12, 2, 2e-5, 6000.0, rng, true);
    const auto cache = build_cache(h, seq, target);
    Matrix direct = Matrix::Identity(4, 4);
    for (const auto& s : seq.steps) direct = oracle::taylor_expm(step_generator(h, s), step_duration(s)) * direct;
    CHECK(max_abs(cache.final - direct) < 1e-10);

    const Complex reference = (target.unitary.adjoint() * cache.final).trace();
    for (std::size_t j = 0; j <= seq.size(); ++j) {
      CHECK(std::abs((cache.backward[j].adjoint() * cache.forward[j]).trace() - reference) < 1e-10);
      if (j > 0) {
        const Complex split = (cache.backward[j].adjoint() * cache.step_props[j - 1] * cache.forward[j - 1]).trace();
        CHECK(std::abs(split - reference) < 1e-10);
      }
      CHECK(unitarity_deviation(cache.forward[j]) < 1e-10);
      CHECK(unitarity_deviation(cache.backward[j]) < 1e-10);
    }
    CHECK(cache.sequence_hash == sequence_hash(seq));
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(build_cache(h, ControlSequence{}, target), ConfigError);
    ControlSequence seq;
    seq.steps.emplace_back(PulseStep{1e-5, {1.0, 2.0}});
    CHECK_THROWS_AS(build_cache(h, seq, TargetGate{Matrix::Identity(2, 2), "small"}), ConfigError);
  }
}

TEST_CASE("parameter layout round trip") {
  std::mt19937_64 rng(5);
  const auto seq = random_sequence(9, 4, 1e-5, 1000.0, rng, true);
  const RealVector x = to_parameters(seq);
  CHECK(static_cast<std::size_t>(x.size()) == parameter_count(seq));
  CHECK(from_parameters(seq, x) == seq);
  CHECK(delay_parameter_indices(seq) == std::vector<std::size_t>{12, 25});
  RealVector neg = x;
  neg[12] = -1.0;
  CHECK(std::get<DelayStep>(from_parameters(seq, neg).steps[3]).duration_s == 0.0);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "grape/objective.hpp"
#include "oracles.hpp"

using namespace grape;

namespace {

SpinSystem strong_pair() {
  SpinSystem s;
  s.offsets_hz = {350.0, -350.0};
  s.couplings = {{0, 1, 7.0, CouplingMode::kStrong}};
  s.channels = {{{0, 1}, 5000.0}};
  return s;
}

double spectral_norm(const Matrix& h) { return hermitian_eigensystem(h).values.cwiseAbs().maxCoeff(); }

// Random amplitudes, then every step length set so that dt * ||H_j|| equals `angle`.
ControlSequence scaled_sequence(const HamiltonianSet& hams, std::size_t steps, double angle, double amp,
                                std::mt19937_64& rng, bool with_delays) {
  std::uniform_real_distribution<double> u(-amp, amp);
  ControlSequence seq;
  double norm = spectral_norm(hams.h0);
  std::vector<std::vector<double>> amps;
  for (std::size_t j = 0; j < steps; ++j) {
    std::vector<double> a;
    for (std::size_t k = 0; k < hams.controls.size(); ++k) a.push_back(u(rng));
    Matrix h = hams.h0;
    for (std::size_t k = 0; k < a.size(); ++k) h += a[k] * hams.controls[k];
    norm = std::max(norm, spectral_norm(h));
    amps.push_back(std::move(a));
  }
  const double dt = angle / norm;
  for (std::size_t j = 0; j < steps; ++j) {
    if (with_delays && j % 4 == 3) {
      seq.steps.emplace_back(DelayStep{dt});
    } else {
      seq.steps.emplace_back(PulseStep{dt, amps[j]});
    }
  }
  return seq;
}

// Largest entry-wise relative error; entries tiny compared with the largest
// entry of the same kind (amplitude or duration) are compared against that scale.
double worst_relative(const RealVector& g, const RealVector& fd, const std::vector<std::size_t>& delays) {
  std::vector<bool> is_delay(static_cast<std::size_t>(g.size()), false);
  for (auto i : delays) is_delay[i] = true;
  double amp_scale = 0.0, delay_scale = 0.0;
  for (Eigen::Index i = 0; i < fd.size(); ++i) {
    double& s = is_delay[static_cast<std::size_t>(i)] ? delay_scale : amp_scale;
    s = std::max(s, std::abs(fd[i]));
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < fd.size(); ++i) {
    const double s = is_delay[static_cast<std::size_t>(i)] ? delay_scale : amp_scale;
    worst = std::max(worst, std::abs(g[i] - fd[i]) / std::max(std::abs(fd[i]), 1e-3 * s));
  }
  return worst;
}

// Finite-difference steps of 1e-6 of each parameter's natural scale: 1/dt for
// amplitudes (one radian per step) and 1/||H|| for durations.
RealVector natural_steps(const ControlSequence& seq, double norm) {
  RealVector h(static_cast<Eigen::Index>(parameter_count(seq)));
  Eigen::Index i = 0;
  for (const auto& s : seq.steps) {
    if (const auto* p = std::get_if<PulseStep>(&s)) {
      for (std::size_t k = 0; k < p->amplitudes.size(); ++k) h[i++] = 1e-6 / p->duration_s;
    } else {
      h[i++] = 1e-6 / norm;
    }
  }
  return h;
}

}  // namespace

TEST_CASE("fidelity") {
  std::mt19937_64 rng(11);
  const Matrix u = oracle::random_unitary(4, rng);
  SUBCASE("identical unitaries") { CHECK(fidelity(u, u) == doctest::Approx(1.0).epsilon(1e-14)); }
  SUBCASE("global phase 0.7 rad") {
    CHECK(fidelity(u, std::polar(1.0, 0.7) * u) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("quarter-turn x rotation against identity") {
    const Matrix rx = matrix_exponential_hermitian_generator(spin_x(), M_PI / 2.0);
    CHECK(fidelity(Matrix::Identity(2, 2), rx) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(fidelity(Matrix::Identity(2, 2), u), std::invalid_argument);
  }
  SUBCASE("symmetric and phase invariant") {
    const Matrix v = oracle::random_unitary(4, rng);
    const double base = fidelity(u, v);
    CHECK(base >= 0.0);
    CHECK(base <= 1.0);
    CHECK(fidelity(v, u) == doctest::Approx(base).epsilon(1e-14));
    std::uniform_real_distribution<double> theta(0.0, kTwoPi);
    for (int i = 0; i < 20; ++i) {
      CHECK(std::abs(fidelity(std::polar(1.0, theta(rng)) * u, v) - base) <= 1e-14);
    }
  }
}

TEST_CASE("fidelity gradient against finite differences") {
  std::mt19937_64 rng(5);
  const SpinSystem sys = strong_pair();
  const HamiltonianSet hams = build_hamiltonians(sys);
  const TargetGate target{oracle::random_unitary(4, rng), "random"};

  auto check = [&](double angle, bool delays, GradientMode mode, double tol) {
    const ControlSequence seq = scaled_sequence(hams, delays ? 16 : 8, angle, kTwoPi * 1000.0, rng, delays);
    const PropagatorCache cache = build_cache(hams, seq, target);
    const RealVector g = gradient(cache, hams, seq, mode);
    double norm = 0.0;
    for (const auto& s : seq.steps) norm = std::max(norm, spectral_norm(step_generator(hams, s)));
    auto f = [&](const RealVector& x) {
      const ControlSequence s = from_parameters(seq, x);
      return fidelity(target, build_cache(hams, s, target).final);
    };
    const RealVector fd = oracle::central_difference(f, to_parameters(seq), natural_steps(seq, norm));
    CHECK(worst_relative(g, fd, delay_parameter_indices(seq)) < tol);
  };

  SUBCASE("first order, 8 pulse steps") { check(2e-5, false, GradientMode::kFirstOrder, 1e-4); }
  SUBCASE("first order, pulses and delays") { check(2e-5, true, GradientMode::kFirstOrder, 1e-4); }
  SUBCASE("exact, long steps") { check(0.05, true, GradientMode::kExact, 1e-6); }
  SUBCASE("exact, very long steps") { check(2.0, true, GradientMode::kExact, 1e-6); }
  SUBCASE("first order degrades with step length") {
    // The neglected commutator term grows linearly with dt * ||H||.
    const ControlSequence seq = scaled_sequence(hams, 8, 0.05, kTwoPi * 1000.0, rng, false);
    const PropagatorCache cache = build_cache(hams, seq, target);
    const RealVector a = gradient(cache, hams, seq, GradientMode::kFirstOrder);
    const RealVector b = gradient(cache, hams, seq, GradientMode::kExact);
    const double rel = (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
    CHECK(rel > 1e-4);
    CHECK(rel < 0.1);
  }
}

TEST_CASE("single-spin gradient closed form") {
  SpinSystem s;
  s.offsets_hz = {0.0};
  s.channels = {{{0}, 1000.0}};
  const HamiltonianSet hams = build_hamiltonians(s);
  const TargetGate id{Matrix::Identity(2, 2), "identity"};
  const double dt = 1e-5;
  for (auto mode : {GradientMode::kFirstOrder, GradientMode::kExact}) {
    ControlSequence seq;
    seq.steps.emplace_back(PulseStep{dt, {0.0, 0.0}});
    RealVector g = gradient(build_cache(hams, seq, id), hams, seq, mode);
    CHECK(std::abs(g[0]) < 1e-18);
    CHECK(std::abs(g[1]) < 1e-18);

    // Single step: X_j commutes with H, so the first-order form is exact too.
    seq.steps[0] = PulseStep{dt, {M_PI / 2.0 / dt, 0.0}};
    g = gradient(build_cache(hams, seq, id), hams, seq, mode);
    CHECK(g[0] == doctest::Approx(-dt / 2.0).epsilon(1e-12));
    CHECK(std::abs(g[1]) < 1e-18);
  }
}

TEST_CASE("stale cache is rejected") {
  const HamiltonianSet hams = build_hamiltonians(strong_pair());
  const TargetGate id{Matrix::Identity(4, 4), "identity"};
  ControlSequence seq;
  seq.steps.emplace_back(PulseStep{1e-5, {100.0, 0.0}});
  const PropagatorCache cache = build_cache(hams, seq, id);
  std::get<PulseStep>(seq.steps[0]).amplitudes[0] = 101.0;
  CHECK_THROWS_AS(gradient(cache, hams, seq, GradientMode::kFirstOrder), std::logic_error);
}

TEST_CASE("composite objective") {
  std::mt19937_64 rng(3);
  const SpinSystem sys = strong_pair();
  const HamiltonianSet hams = build_hamiltonians(sys);
  const TargetGate target{oracle::random_unitary(4, rng), "random"};
  const ControlSequence seq = scaled_sequence(hams, 12, 0.05, kTwoPi * 800.0, rng, true);

  SUBCASE("ensemble of one reproduces the plain objective") {
    const ObjectiveReport r = composite_objective(sys, seq, target, EnsembleSpec::nominal());
    const PropagatorCache cache = build_cache(hams, seq, target);
    CHECK(r.total == fidelity(target, cache.final));
    const RealVector g = gradient(cache, hams, seq, GradientMode::kFirstOrder);
    CHECK((r.gradient - g).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("two identical half-weight members") {
    EnsembleSpec e;
    e.members = {{{}, 0.5}, {{}, 0.5}};
    const ObjectiveReport one = composite_objective(sys, seq, target, EnsembleSpec::nominal());
    const ObjectiveReport two = composite_objective(sys, seq, target, e);
    CHECK(two.total == one.total);
    CHECK((two.gradient - one.gradient).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("pulse-length ensemble is the mean of single evaluations") {
    const std::vector<double> scales{0.7, 0.85, 1.0, 1.12, 1.3};
    const ObjectiveReport r = composite_objective(sys, seq, target, EnsembleSpec::default_ple(), {},
                                                  GradientMode::kExact);
    double mean = 0.0;
    RealVector g = RealVector::Zero(r.gradient.size());
    for (std::size_t i = 0; i < scales.size(); ++i) {
      const HamiltonianSet h = apply_error_model(hams, PulseLengthError{scales[i]});
      const PropagatorCache cache = build_cache(h, seq, target);
      const double phi = fidelity(target, cache.final);
      CHECK(r.member_fidelities[i] == doctest::Approx(phi).epsilon(1e-14));
      mean += phi / 5.0;
      g += gradient(cache, h, seq, GradientMode::kExact) / 5.0;
    }
    CHECK(r.total == doctest::Approx(mean).epsilon(1e-13));
    CHECK((r.gradient - g).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff()));
  }

  SUBCASE("thread count does not change the result") {
    CompositeObjective obj(sys, target, EnsembleSpec::default_ple());
    obj.set_threads(1);
    const ObjectiveReport a = obj.evaluate(seq);
    obj.set_threads(4);
    const ObjectiveReport b = obj.evaluate(seq);
    CHECK(a.total == b.total);
    CHECK((a.gradient - b.gradient).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("composite gradient matches finite differences") {
    SpinSystem with_impurity = sys;
    with_impurity.contaminant_offsets_hz = {120.0};
    EnsembleSpec e = EnsembleSpec::from_ple_scales({0.9, 1.1});
    e.members.push_back({{OffResonanceError{40.0}}, 2.0});
    PenaltyConfig pen;
    pen.enabled = true;
    pen.u_max = kTwoPi * 500.0;
    pen.lambda = 1e-9;
    CompositeObjective obj(with_impurity, target, e, pen, GradientMode::kExact);
    const ObjectiveReport r = obj.evaluate(seq);
    CHECK(r.penalty > 0.0);
    double norm = 0.0;
    for (const auto& s : seq.steps) norm = std::max(norm, spectral_norm(step_generator(hams, s)));
    auto f = [&](const RealVector& x) { return obj.evaluate(from_parameters(seq, x), false).total; };
    const RealVector fd = oracle::central_difference(f, to_parameters(seq), natural_steps(seq, norm));
    CHECK(worst_relative(r.gradient, fd, delay_parameter_indices(seq)) < 1e-6);
  }
}

TEST_CASE("contaminant fidelity") {
  SpinSystem sys = strong_pair();
  sys.contaminant_offsets_hz = {0.0};
  const TargetGate id{Matrix::Identity(4, 4), "identity"};
  ControlSequence seq;
  for (int j = 0; j < 5; ++j) seq.steps.emplace_back(PulseStep{1e-5, {0.0, 0.0}});
  seq.steps.emplace_back(DelayStep{3e-5});
  const ObjectiveReport r = composite_objective(sys, seq, id, EnsembleSpec::nominal());
  CHECK(r.contaminant_fidelities[0][0] == 1.0);

  // A pi pulse on the shared channel flips the impurity: its identity fidelity vanishes.
  ControlSequence flip;
  flip.steps.emplace_back(PulseStep{1e-5, {M_PI / 1e-5, 0.0}});
  sys.contaminant_offsets_hz = {0.0};
  const ObjectiveReport f = composite_objective(sys, flip, id, EnsembleSpec::nominal());
  CHECK(f.contaminant_fidelities[0][0] < 1e-20);
  const double wc = EnsembleSpec::nominal().contaminant_weight;
  CHECK(f.total == doctest::Approx((1.0 - wc) * f.gate_fidelity).epsilon(1e-14));
}

TEST_CASE("power penalty") {
  const double u_max = kTwoPi * 1000.0;
  ControlSequence seq;
  seq.steps.emplace_back(PulseStep{1e-5, {0.3 * u_max, -0.4 * u_max}});
  seq.steps.emplace_back(DelayStep{1e-5});
  seq.steps.emplace_back(PulseStep{1e-5, {0.9 * u_max, 0.0}});

  SUBCASE("inactive below the limit") {
    const PenaltyValue p = power_penalty(seq, u_max, 10.0);
    CHECK(p.value == 0.0);
    CHECK(p.gradient.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("hinge value") {
    std::get<PulseStep>(seq.steps[2]).amplitudes = {0.0, 1.1 * u_max};
    const PenaltyValue p = power_penalty(seq, u_max, 1.0);
    CHECK(p.value == doctest::Approx(std::pow(0.1 * u_max, 2)).epsilon(1e-12));
  }
  SUBCASE("gradient against finite differences") {
    std::get<PulseStep>(seq.steps[0]).amplitudes = {0.9 * u_max, -0.8 * u_max};
    std::get<PulseStep>(seq.steps[2]).amplitudes = {1.3 * u_max, 0.2 * u_max};
    const PenaltyValue p = power_penalty(seq, u_max, 2.0);
    auto f = [&](const RealVector& x) { return power_penalty(from_parameters(seq, x), u_max, 2.0).value; };
    const RealVector x = to_parameters(seq);
    const RealVector fd = oracle::central_difference(f, x, RealVector::Constant(x.size(), 1e-4 * u_max));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      CHECK(std::abs(p.gradient[i] - fd[i]) <= 1e-6 * std::max(std::abs(fd[i]), 1e-3 * fd.cwiseAbs().maxCoeff()));
    }
  }
  SUBCASE("bad parameters") {
    CHECK_THROWS_AS(power_penalty(seq, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(power_penalty(seq, u_max, -1.0), ConfigError);
  }
}

TEST_CASE("ensemble validation") {
  CHECK(EnsembleSpec::default_ple().validate().empty());
  CHECK_FALSE(EnsembleSpec::from_ple_scales({0.8, 0.9, 1.0, 1.1, 1.2}).validate().empty());
  EnsembleSpec bad = EnsembleSpec::nominal();
  bad.members[0].weight = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(EnsembleSpec{}.validate(), ConfigError);
  const auto w = EnsembleSpec::from_ple_scales({0.9, 1.1}).normalized_weights();
  CHECK(w[0] == 0.5);
  CHECK(w[1] == 0.5);
}

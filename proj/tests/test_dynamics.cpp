#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mflab/dynamics/dynamics.hpp"

using namespace mflab;

TEST_CASE("rotation matrix of the builtin system") {
  const auto a = rotation_tanh_matrix();
  CHECK(a[0] == doctest::Approx(0.875).epsilon(1e-15));
  CHECK(a[3] == doctest::Approx(0.625).epsilon(1e-15));
  // P D P^T with P the rotation by -30 degrees: off-diagonal -sqrt(3)/8.
  CHECK(a[1] == doctest::Approx(-std::sqrt(3.0) / 8).epsilon(1e-15));
  CHECK(a[2] == a[1]);
  // Eigenvalues 1 and 1/2.
  const double tr = a[0] + a[3];
  const double det = a[0] * a[3] - a[1] * a[2];
  CHECK(tr == doctest::Approx(1.5));
  CHECK(det == doctest::Approx(0.5));
}

TEST_CASE("null dynamics stays at zero") {
  const auto spec = make_null_dynamics();
  Rng rng(1);
  DataState s{{0.3}, -0.2, 0.0, 0};
  for (int k = 0; k < 5; ++k) {
    s = step_data(s, spec, rng);
    CHECK(s.x[0] == 0.0);
    CHECK(s.z == 0.0);
    CHECK(s.y == 0.0);
  }
  CHECK(s.k == 5);
}

TEST_CASE("builtin system without noise") {
  BuiltinOptions o;
  o.eta_halfwidth = 0.0;
  const auto spec = make_builtin_rotation_tanh(o);
  CHECK(spec.d == 1);
  Rng rng(2);
  DataState origin{{0.0}, 0.0, 0.0, 0};
  for (int k = 0; k < 20; ++k) {
    origin = step_data(origin, spec, rng);
  }
  CHECK(origin.x[0] == 0.0);
  CHECK(origin.z == 0.0);

  DataState s{{0.5}, 0.5, 0.0, 0};
  for (int k = 0; k < 10000; ++k) {
    s = step_data(s, spec, rng);
    REQUIRE(s.state_norm() <= 1.0);
  }
  CHECK(s.state_norm() < 1e-12);

  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int r = 0; r < 100; ++r) {
    DataState t{{u(rng) * 0.7}, u(rng) * 0.7, 0.0, 0};
    for (int k = 0; k < 200; ++k) {
      t = step_data(t, spec, rng);
    }
    CHECK(t.state_norm() < 1e-10);
  }
}

TEST_CASE("builtin trajectories respect the state and output bounds") {
  BuiltinOptions o;
  o.eps_halfwidth = 0.25;
  const auto spec = make_builtin_rotation_tanh(o);
  Rng rng(3);
  DataState s = initial_state(spec, rng);
  CHECK(s.state_norm() <= 1.0);
  for (int k = 0; k < 100000; ++k) {
    s = step_data(s, spec, rng);
    REQUIRE(s.state_norm() <= 1.0);
    REQUIRE(std::abs(s.y) <= spec.c_y());
  }
}

TEST_CASE("noise-free trajectories contract at rate L") {
  BuiltinOptions o;
  o.eta_halfwidth = 0.0;
  const auto spec = make_builtin_rotation_tanh(o);
  Rng r1(5), r2(5);
  DataState a{{0.6}, 0.1, 0.0, 0};
  DataState b{{-0.2}, 0.5, 0.0, 0};
  const double gap0 = std::hypot(a.x[0] - b.x[0], a.z - b.z);
  double Lk = 1.0;
  for (int k = 1; k <= 30; ++k) {
    a = step_data(a, spec, r1);
    b = step_data(b, spec, r2);
    Lk *= 0.5; // Lipschitz bound of the state map alone
    CHECK(std::hypot(a.x[0] - b.x[0], a.z - b.z) <= Lk * gap0 * (1 + 1e-12));
  }
}

TEST_CASE("data paths are reproducible") {
  const auto spec = make_builtin_rotation_tanh({0.25, 0.05, 0.25, {}});
  Rng r1(9), r2(9);
  DataState a = initial_state(spec, r1);
  DataState b = initial_state(spec, r2);
  for (int k = 0; k < 100; ++k) {
    a = step_data(a, spec, r1);
    b = step_data(b, spec, r2);
    CHECK(a.x == b.x);
    CHECK(a.z == b.z);
    CHECK(a.y == b.y);
  }
}

TEST_CASE("misconfigured dynamics is refused") {
  auto spec = make_null_dynamics();
  spec.g = [](std::span<const double>, std::span<double> out) {
    out[0] = 2.0;
    out[1] = 0.0;
  };
  Rng rng(1);
  DataState s{{0.0}, 0.0, 0.0, 0};
  CHECK_THROWS_AS(step_data(s, spec, rng), ConfigError);
}

TEST_CASE("assumption report") {
  const auto act = Activation::standard();
  auto spec = make_builtin_rotation_tanh({0.25, 0.05, 0.0, 0.5});
  const auto ok = validate_assumptions(spec, act);
  CHECK(ok.q0 == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
  CHECK(ok.passes());

  spec.L = 0.9;
  const auto bad = validate_assumptions(spec, act);
  CHECK_FALSE(bad.activation_ok);
  CHECK_FALSE(bad.passes());

  CHECK(contraction_q0(0.0, 0.0) == 0.0);

  const auto builtin = make_builtin_rotation_tanh();
  CHECK(builtin.L == doctest::Approx(std::sqrt(0.25 + 0.125)));
  CHECK(validate_assumptions(builtin, act).passes());

  const auto window = validate_assumptions(builtin, act, ScalingWindow{0.75, 0.2});
  CHECK_FALSE(window.window_ok);

  auto noisy = make_builtin_rotation_tanh({0.25, 0.05, 0.4, {}});
  CHECK_FALSE(validate_assumptions(noisy, act).noise_ok);
}

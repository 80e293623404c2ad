#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "mflab/core/activation.hpp"
#include "mflab/core/clip.hpp"
#include "mflab/core/func_h.hpp"
#include "mflab/core/measure.hpp"
#include "mflab/core/rate_fit.hpp"

using namespace mflab;

TEST_CASE("logistic values and derivatives") {
  const auto a = Activation::standard();
  const auto e0 = a.eval(0.0);
  CHECK(e0.value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(e0.d1 == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(std::abs(e0.d2) < 1e-15);

  const auto e1 = a.eval(1.0);
  CHECK(e1.value == doctest::Approx(0.7310585786300049).epsilon(1e-14));
  CHECK(e1.d1 == doctest::Approx(e1.value * (1 - e1.value)).epsilon(1e-14));
  CHECK(e1.d1 == doctest::Approx(0.19661193324148185).epsilon(1e-12));

  const auto big = a.eval(60.0);
  CHECK(big.value == doctest::Approx(1.0));
  CHECK(big.d1 < 1e-20);
  CHECK_THROWS_AS(a.eval(std::nan("")), std::domain_error);
  CHECK(a.c_sigma() == 0.25);
}

TEST_CASE("activation derivatives match central differences") {
  for (const auto& act : {Activation::standard(), Activation::scaled(0.5)}) {
    for (double z = -10.0; z <= 10.0; z += 0.37) {
      const double h = 1e-5;
      const auto e = act.eval(z);
      const double fd1 = (act.value(z + h) - act.value(z - h)) / (2 * h);
      const double fd2 = (act.d1(z + h) - act.d1(z - h)) / (2 * h);
      CHECK(std::abs(fd1 - e.d1) <= 1e-6 * std::max(1e-3, std::abs(e.d1)));
      CHECK(std::abs(fd2 - e.d2) <= 1e-6 * std::max(1e-3, std::abs(e.d2)) + 1e-10);
      CHECK(e.value >= 0.0);
      CHECK(e.value <= 1.0);
      CHECK(std::abs(e.d1) <= act.c_sigma());
      CHECK(std::abs(e.d2) <= act.c_sigma());
    }
  }
  CHECK_THROWS(Activation::scaled(1.5));
  CHECK_THROWS(Activation::scaled(0.0));
}

TEST_CASE("smooth clipping fixed points") {
  const ClipSpec spec(1000, 0.1);
  const double t = spec.threshold();
  CHECK(t == doctest::Approx(std::pow(1000.0, 0.1)));
  CHECK(clip_eval(0.0, spec) == 0.0);
  CHECK(clip_eval(t, spec) == doctest::Approx(t).epsilon(1e-15));
  CHECK(clip_eval(0.3 * t, spec) == 0.3 * t);
  const double v3 = clip_eval(3 * t, spec);
  CHECK(v3 > t);
  CHECK(v3 <= 2 * t);
  CHECK(v3 == doctest::Approx(1.5 * t).epsilon(1e-12));
  CHECK(clip_deriv(0.0, spec) == 1.0);
  CHECK(clip_deriv(2.5 * t, spec) == 0.0);
  const double mid = clip_deriv(1.5 * t, spec);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  CHECK_THROWS(ClipSpec(10, 0.3));
  CHECK_THROWS(ClipSpec(10, 0.0));
  CHECK_THROWS(clip_eval(INFINITY, spec));
}

TEST_CASE("clipping against brute-force quadrature of the plateau") {
  const ClipSpec spec(50, 0.2);
  const double t = spec.threshold();
  for (double x : {1.2 * t, 1.5 * t, 1.9 * t, 3.0 * t}) {
    // Midpoint rule with step N^gamma / 10^4.
    const double h = t / 1e4;
    double acc = 0.0;
    for (double y = 0.5 * h; y < x; y += h) {
      acc += clip_deriv(y, spec) * std::min(h, x - (y - 0.5 * h));
    }
    CHECK(clip_eval(x, spec) == doctest::Approx(acc).epsilon(1e-6));
  }
}

TEST_CASE("clipping properties on random cases") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> g(0.01, 0.24);
  std::uniform_int_distribution<int> n(1, 100000);
  for (int i = 0; i < 300; ++i) {
    const ClipSpec spec(static_cast<std::uint64_t>(n(rng)), g(rng));
    const double t = spec.threshold();
    std::uniform_real_distribution<double> xs(-4 * t, 4 * t);
    const double x = xs(rng);
    const double v = clip_eval(x, spec);
    CHECK(clip_eval(-x, spec) == -v);
    CHECK(std::abs(v) <= std::abs(x) + 1e-15);
    CHECK(std::abs(v) <= 2 * t);
    if (std::abs(x) <= t) {
      CHECK(v == x);
    }
    const double y = xs(rng);
    CHECK(std::abs(clip_eval(y, spec) - v) <= std::abs(y - x) * (1 + 1e-12) + 1e-15);
  }
}

TEST_CASE("smooth step") {
  CHECK(smooth_step(0.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
  for (double v = 0.05; v < 1.0; v += 0.1) {
    CHECK(smooth_step(v) + smooth_step(1 - v) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("lambda samples") {
  const auto one = sample_lambda(1, 1, 3);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(one.entries.c[0]) <= 1.0);
  CHECK(std::abs(one.entries.b[0]) <= 1.0);

  const std::size_t M = 100000;
  const auto big = sample_lambda(M, 1, 11);
  double mc = 0.0;
  for (double c : big.entries.c) {
    mc += c;
  }
  mc /= M;
  CHECK(std::abs(mc) < 3 * (1 / std::sqrt(3.0)) / std::sqrt(double(M)));

  const auto again = sample_lambda(M, 1, 11);
  CHECK(again.entries.c == big.entries.c);
  CHECK(again.entries.w == big.entries.w);
  CHECK(again.entries.b == big.entries.b);
  CHECK_THROWS(sample_lambda(0, 1, 1));
}

TEST_CASE("feedback integral") {
  const auto act = Activation::standard();
  auto lam = sample_lambda(1000000, 1, 5);
  const std::vector<double> x0{0.0};
  CHECK(feedback_integral(x0, 0.0, lam, act) == doctest::Approx(0.25).epsilon(0.005));
  CHECK(std::abs(feedback_integral(x0, -800.0, lam, act)) < 1e-300);

  auto zero_b = sample_lambda(1000, 1, 5);
  std::fill(zero_b.entries.b.begin(), zero_b.entries.b.end(), 0.0);
  CHECK(feedback_integral(std::vector<double>{0.7}, 0.3, zero_b, act) == 0.0);

  MeasureSample empty;
  CHECK_THROWS_AS(feedback_integral(x0, 0.0, empty, act), std::domain_error);
}

TEST_CASE("H1 distances") {
  const auto act = Activation::standard();
  const auto lam = sample_lambda(20000, 1, 9);
  const auto h = FuncH::logistic({0.6}, 0.2);
  const auto k = FuncH::logistic({-0.3}, -0.5);
  CHECK(h1_distance_sq(h, h, lam, act) == 0.0);
  CHECK(h1_distance_sq(FuncH{}, FuncH{}, lam, act) == 0.0);
  const double hz = h1_distance_sq(h, FuncH{}, lam, act);
  CHECK(hz > 0.0);
  CHECK(hz <= 1 + act.c_sigma() * act.c_sigma());
  CHECK(h1_distance_sq(h, k, lam, act) == h1_distance_sq(k, h, lam, act));
  CHECK_THROWS(FuncH::logistic({1.5}, 0.0));
}

TEST_CASE("ridge function evaluation") {
  const auto act = Activation::standard();
  const auto h = FuncH::logistic({0.5, -0.5}, 0.1);
  const std::vector<double> w{0.2, 0.4};
  const double z = 0.5 * 0.2 - 0.5 * 0.4 + 0.1;
  CHECK(h.value(w, act) == doctest::Approx(act.value(z)));
  std::vector<double> g(2);
  h.gradient(w, act, g);
  CHECK(g[0] == doctest::Approx(0.5 * act.d1(z)));
  CHECK(g[1] == doctest::Approx(-0.5 * act.d1(z)));
  const std::vector<double> x{1.0, 2.0};
  CHECK(h.directional(w, x, act) == doctest::Approx(g[0] + 2 * g[1]));
  CHECK(FuncH{}.value(w, act) == 0.0);

  const auto tests = default_test_functions(1);
  CHECK(tests.size() == 8);
  for (const auto& t : tests) {
    CHECK(std::abs(t.a()[0]) == doctest::Approx(0.9));
  }
  const auto tests3 = default_test_functions(3);
  CHECK(tests3.size() == 8);
  double norm = 0.0;
  for (double v : tests3[0].a()) {
    norm += v * v;
  }
  CHECK(std::sqrt(norm) == doctest::Approx(0.9));
}

TEST_CASE("rate fits") {
  const RatePoint exact[] = {{10, 1}, {100, 0.1}, {1000, 0.01}};
  const auto f = fit_rate(exact);
  CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));

  const RatePoint flat[] = {{10, 3}, {100, 3}, {1000, 3}};
  CHECK(fit_rate(flat).slope == doctest::Approx(0.0));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  std::vector<RatePoint> noisy;
  for (double n : {10.0, 30.0, 100.0, 300.0, 1000.0}) {
    noisy.push_back({n, (1 + noise(rng)) / n});
  }
  const auto fn = fit_rate(noisy);
  CHECK(fn.slope >= -1.05);
  CHECK(fn.slope <= -0.95);

  const RatePoint bad[] = {{10, 1}, {100, 0}, {1000, 1}};
  CHECK_THROWS_AS(fit_rate(bad), std::domain_error);
  const RatePoint two[] = {{10, 1}, {100, 2}};
  CHECK_THROWS_AS(fit_rate(two), std::domain_error);
}

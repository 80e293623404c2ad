#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "mflab/meanfield/meanfield.hpp"
#include "mflab/network/train_log.hpp"

using namespace mflab;

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

ModelConfig cfg_n(std::size_t N, std::uint64_t seed) {
  ModelConfig c;
  c.N = N;
  c.seed = seed;
  return c;
}

DynamicsSpec noisy_builtin() { return make_builtin_rotation_tanh({0.25, 0.05, 0.25, {}}); }

} // namespace

TEST_CASE("varsigma") {
  const auto act = Activation::standard();
  const auto lam = sample_lambda(1000, 1, 1);
  DataState d{{0.4}, 0.0, 0.0, 0};
  const auto h = varsigma(d, FuncH{}, lam, act);
  CHECK(h.b() == 0.0);
  CHECK(h.a()[0] == 0.4);
  DataState zero{{0.0}, 0.0, 0.0, 0};
  const auto c = varsigma(zero, FuncH{}, lam, act);
  CHECK(c.value(std::vector<double>{3.0}, act) == 0.5);
  const auto h2 = varsigma(d, h, lam, act);
  CHECK(h2.b() == doctest::Approx(feedback_integral(std::vector<double>{0.4}, 0.0, lam, act)));
}

TEST_CASE("limit memory chain") {
  const auto act = Activation::standard();
  const auto lam = sample_lambda(1000000, 1, 2);
  auto st = MemoryChainState::start(ProcessTag::H);
  CHECK(st.m == 0.0);
  CHECK(st.fn.is_zero());
  st = step_h(st, std::vector<double>{0.0}, lam, act);
  CHECK(st.m == doctest::Approx(0.25).epsilon(0.005));
  CHECK(st.k == 1);

  auto zero_b = sample_lambda(100, 1, 2);
  std::fill(zero_b.entries.b.begin(), zero_b.entries.b.end(), 0.0);
  auto z = MemoryChainState::start(ProcessTag::H);
  for (int k = 0; k < 10; ++k) {
    z = step_h(z, std::vector<double>{0.3}, zero_b, act);
    CHECK(z.m == 0.0);
  }
}

TEST_CASE("finite-sample memory chain") {
  const auto act = Activation::standard();
  Triples one(1, 1);
  one.b = {1.0};
  auto st = step_hN(MemoryChainState::start(ProcessTag::HN), std::vector<double>{0.0}, one, act);
  CHECK(st.m == 0.5);
}

TEST_CASE("chains stay bounded and represent their recursion exactly") {
  const auto act = Activation::standard();
  const auto spec = noisy_builtin();
  const auto lam = sample_lambda(5000, 1, 3);
  const auto p = init_params(cfg_n(64, 3));
  Rng rng(3);
  DataState data = initial_state(spec, rng);
  auto h = MemoryChainState::start(ProcessTag::H);
  auto hn = MemoryChainState::start(ProcessTag::HN);
  std::mt19937_64 wr(1);
  std::normal_distribution<double> nw(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const double prev_h = h.m;
    const auto x = data.x;
    h = step_h(h, x, lam, act);
    hn = step_hN(hn, x, p.live, act);
    CHECK(std::abs(h.m) <= 1.0);
    CHECK(std::abs(hn.m) <= 1.0);
    for (int r = 0; r < 5; ++r) {
      const double w = nw(wr);
      CHECK(std::abs(h.fn.value(std::vector<double>{w}, act) - logistic(w * x[0] + prev_h)) <
            1e-14);
    }
    data = step_data(data, spec, rng);
  }
}

TEST_CASE("v chain length mismatch") {
  const auto act = Activation::standard();
  Triples w(3, 1);
  std::vector<double> b(2, 0.5);
  CHECK_THROWS_AS(step_v(MemoryChainState::start(ProcessTag::V), std::vector<double>{0.1}, b, w,
                         act),
                  std::domain_error);
}

TEST_CASE("untrained memory equals the finite-sample chain") {
  const auto act = Activation::standard();
  const auto spec = noisy_builtin();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto p = init_params(cfg_n(50, seed));
    Rng rng(seed);
    DataState data = initial_state(spec, rng);
    HiddenState s = HiddenState::zeros(50);
    auto hn = MemoryChainState::start(ProcessTag::HN);
    auto v = MemoryChainState::start(ProcessTag::V);
    for (int k = 0; k < 200; ++k) {
      s = memory_step(p.live, s, data.x, act);
      hn = step_hN(hn, data.x, p.init, act);
      v = step_v(v, data.x, p.live.b, p.live, act);
      CHECK(std::abs(v.m - hn.m) <= 1e-15);
      for (std::size_t i = 0; i < 50; ++i) {
        REQUIRE(std::abs(hn.fn.value(std::vector<double>{p.init.w[i]}, act) - s.S[i]) < 1e-12);
      }
      data = step_data(data, spec, rng);
    }
  }
}

TEST_CASE("trained memory equals the v chain") {
  const auto act = Activation::standard();
  const auto spec = noisy_builtin();
  const auto cfg = cfg_n(50, 8);
  ParamSet p = init_params(cfg);
  HiddenState s = HiddenState::zeros(50);
  StepWorkspace ws;
  Rng rng(8);
  DataState data = initial_state(spec, rng);
  auto v = MemoryChainState::start(ProcessTag::V);
  ChainStepper stepper;
  for (int k = 0; k < 300; ++k) {
    const Triples w_prev = p.live;
    sgd_tbptt_step_inplace(p, s, data, cfg, act, ws);
    const auto next = stepper.step_v(v, data.x, p.live.b, w_prev, act);
    // s.S now holds S_{k+1}, generated from W_k and the v feedback at k.
    for (std::size_t i = 0; i < 50; ++i) {
      REQUIRE(std::abs(next.fn.value(std::vector<double>{w_prev.w[i]}, act) - s.S[i]) < 1e-12);
    }
    CHECK(next.m == feedback_scalar(p.live, s.S));
    v = next;
    data = step_data(data, spec, rng);
  }
}

TEST_CASE("error diagnostics") {
  const auto act = Activation::standard();
  const auto lam = sample_lambda(20000, 1, 4);
  const auto spec = noisy_builtin();
  const auto p = init_params(cfg_n(100, 4));
  auto h = MemoryChainState::start(ProcessTag::H);
  auto hn = MemoryChainState::start(ProcessTag::HN);
  auto v = MemoryChainState::start(ProcessTag::V);
  const auto d0 = error_diag(v, hn, h, lam, p.init, act);
  CHECK(d0.e1 == 0.0);
  CHECK(d0.e2 == 0.0);
  CHECK(d0.gamma1_h1 == 0.0);

  Rng rng(4);
  DataState data = initial_state(spec, rng);
  double e1_prev = 0.0;
  for (int k = 0; k < 50; ++k) {
    h = step_h(h, data.x, lam, act);
    hn = step_hN(hn, data.x, p.init, act);
    v = step_v(v, data.x, p.live.b, p.live, act);
    const auto d = error_diag(v, hn, h, lam, p.init, act);
    CHECK(d.e1 == hn.m - h.m);
    CHECK(std::abs(d.e2) <= 1e-15);
    CHECK(d.gamma1_h1 >= 0.0);
    for (std::size_t i = 0; i < 100; ++i) {
      const std::vector<double> w{p.init.w[i]};
      const double g1 = hn.fn.value(w, act) - h.fn.value(w, act);
      CHECK(std::abs(g1) <= act.c_sigma() * std::abs(e1_prev) * (1 + 1e-12) + 1e-16);
      CHECK(d.gamma_at_w[i] == doctest::Approx(v.fn.value(w, act) - h.fn.value(w, act)));
    }
    e1_prev = d.e1;
    data = step_data(data, spec, rng);
  }
}

TEST_CASE("the limit chain") {
  const auto act = Activation::standard();
  const auto spec = noisy_builtin();
  const auto lam = sample_lambda(2000, 1, 5);
  Rng rng(5);
  ChainStepper stepper;
  ChainH st = chain_start(spec, rng);
  CHECK(st.h.is_zero());
  CHECK(st.m == 0.0);
  for (int k = 0; k < 100; ++k) {
    const auto x = st.data.x;
    const double m_prev = st.m;
    advance_chain(st, spec, lam, act, rng, stepper);
    CHECK(st.h.a()[0] == x[0]);
    CHECK(st.h.b() == m_prev);
    CHECK(st.m == doctest::Approx(feedback_of(st.h, lam, act)).epsilon(1e-13));
    CHECK(std::abs(st.m) <= 1.0);
    CHECK(st.data.state_norm() <= 1.0);
  }
}

TEST_CASE("kernels") {
  const auto act = Activation::standard();
  const auto lam = sample_lambda(5000, 1, 6);
  const auto h = FuncH::logistic({0.5}, -0.2);
  CHECK(kernel_K(std::vector<double>{0.3}, 0.1, FuncH{}, lam, act) == 0.0);

  // x = 0: only <sigma(m) h(w), lambda> survives.
  double ref = 0.0;
  for (std::size_t l = 0; l < lam.size(); ++l) {
    ref += logistic(0.1) * logistic(0.5 * lam.entries.w[l] - 0.2);
  }
  ref /= lam.size();
  CHECK(kernel_K(std::vector<double>{0.0}, 0.1, h, lam, act) == doctest::Approx(ref).epsilon(1e-13));
  CHECK(std::abs(kernel_K(std::vector<double>{0.9}, 0.3, h, lam, act)) <= 1 + act.c_sigma());

  ChainH a{{{0.4}, 0.1, 0.0, 0}, FuncH{}, 0.2};
  ChainH b{{{-0.7}, 0.3, 0.0, 0}, FuncH{}, -0.4};
  CHECK(kernel_tilde(a, b, lam, act) == kernel_tilde(b, a, lam, act));
  CHECK(kernel_tilde(a, a, lam, act) >= 0.0);
  // Consistency with K through varsigma.
  const auto sa = FuncH::logistic(a.data.x, a.m);
  CHECK(kernel_tilde(a, b, lam, act) ==
        doctest::Approx(kernel_K(b.data.x, b.m, sa, lam, act)).epsilon(1e-12));

  const double kaa = kernel_tilde(a, a, lam, act);
  const double kbb = kernel_tilde(b, b, lam, act);
  const double kab = kernel_tilde(a, b, lam, act);
  const double tr = kaa + kbb;
  const double det = kaa * kbb - kab * kab;
  const double lmin = 0.5 * (tr - std::sqrt(tr * tr - 4 * det));
  CHECK(lmin >= -1e-10);

  ChainH dead{{{0.0}, 0.0, 0.0, 0}, FuncH{}, -800.0};
  CHECK(std::abs(kernel_tilde(a, dead, lam, act)) < 1e-300);
}

TEST_CASE("first-order increment against a straight-line oracle") {
  const auto act = Activation::standard();
  ModelConfig cfg = cfg_n(4, 1);
  cfg.alpha = 0.9;
  ParamSet p = params_from([] {
    Triples t(4, 1);
    t.c = {0.5, -0.3, 0.8, -0.6};
    t.w = {0.2, -0.9, 1.3, 0.4};
    t.b = {0.1, 0.7, 0.3, 0.9};
    return t;
  }());
  HiddenState s{{0.2, 0.6, 0.5, 0.9}, 0};
  DataState data{{0.7}, 0.0, -0.2, 0};
  const auto h = FuncH::logistic({0.8}, -0.3);
  const Triples before = p.live;
  StepWorkspace ws;
  const auto ctx = training_step_with_context(p, s, data, cfg, act, ws);

  const double N = 4.0;
  const double m = (0.1 * 0.2 + 0.7 * 0.6 + 0.3 * 0.5 + 0.9 * 0.9) / N;
  double yhat = 0.0;
  double Sn[4], dS[4];
  for (int i = 0; i < 4; ++i) {
    Sn[i] = logistic(before.w[i] * 0.7 + m);
    dS[i] = Sn[i] * (1 - Sn[i]);
    yhat += before.c[i] * Sn[i];
  }
  yhat *= std::pow(N, -0.75);
  const double r = yhat + 0.2;
  CHECK(ctx.residual == doctest::Approx(r).epsilon(1e-13));
  double sum = 0.0, g_before = 0.0, g_after = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double hw = logistic(0.8 * before.w[i] - 0.3);
    const double grad = 0.8 * hw * (1 - hw);
    sum += Sn[i] * hw + before.c[i] * before.c[i] * dS[i] * grad * 0.7;
    g_before += before.c[i] * hw;
    const double ha = logistic(0.8 * p.live.w[i] - 0.3);
    g_after += p.live.c[i] * ha;
  }
  const double predicted = -(0.9 / (N * N)) * r * sum;
  const double actual = std::pow(N, -0.75) * (g_after - g_before);
  const auto pr = increment_delta1(before, p.live, ctx, h, cfg, act);
  CHECK(std::abs(pr.predicted - predicted) < 1e-12);
  CHECK(std::abs(pr.actual - actual) < 1e-12);
}

TEST_CASE("zero residual gives zero increments") {
  const auto act = Activation::standard();
  ModelConfig cfg = cfg_n(30, 2);
  ParamSet p = init_params(cfg);
  HiddenState s = HiddenState::zeros(30);
  DataState data{{0.2}, 0.0, 0.0, 0};
  const auto nx = memory_step(p.live, s, data.x, act);
  data.y = predict(p.live, nx.S, cfg);
  const Triples before = p.live;
  StepWorkspace ws;
  const auto ctx = training_step_with_context(p, s, data, cfg, act, ws);
  for (const auto& h : default_test_functions(1)) {
    const auto pr = increment_delta1(before, p.live, ctx, h, cfg, act);
    CHECK(pr.actual == 0.0);
    CHECK(pr.predicted == 0.0);
  }
}

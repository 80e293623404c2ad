#include "mflab/dynamics/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mflab {

double NoiseSpec::sample(Rng& rng) const {
  switch (kind) {
  case Kind::None:
    return 0.0;
  case Kind::Uniform:
    return std::uniform_real_distribution<double>(-halfwidth, halfwidth)(rng);
  case Kind::Rademacher:
    return std::bernoulli_distribution(0.5)(rng) ? halfwidth : -halfwidth;
  }
  return 0.0;
}

double DynamicsSpec::eps_bound() const {
  return state_noise.bound() * std::sqrt(static_cast<double>(d + 1));
}

double DataState::state_norm() const {
  double s = z * z;
  for (double v : x) {
    s += v * v;
  }
  return std::sqrt(s);
}

std::array<double, 4> rotation_tanh_matrix() {
  const double c = std::sqrt(3.0) / 2.0;
  const double s = 0.5;
  // P = [[c, s], [-s, c]], orthogonal so P^{-1} = P^T.
  const double p[2][2] = {{c, s}, {-s, c}};
  const double diag[2] = {1.0, 0.5};
  std::array<double, 4> a{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 2; ++k) {
        acc += p[i][k] * diag[k] * p[j][k];
      }
      a[2 * i + j] = acc;
    }
  }
  return a;
}

DynamicsSpec make_builtin_rotation_tanh(const BuiltinOptions& opts) {
  DynamicsSpec spec;
  spec.name = "rotation_tanh";
  spec.d = 1;
  const auto a = rotation_tanh_matrix();
  spec.g = [a](std::span<const double> xz, std::span<double> out) {
    const double u = a[0] * xz[0] + a[1] * xz[1];
    const double v = a[2] * xz[0] + a[3] * xz[1];
    out[0] = 0.5 * std::tanh(u);
    out[1] = 0.5 * std::tanh(v);
  };
  const double scale = opts.output_scale;
  spec.f = [scale](std::span<const double> xz) { return scale * (xz[0] + xz[1]); };

  // ||A||_2 = 1 (eigenvalues 1 and 1/2) and tanh is 1-Lipschitz, so g is
  // 1/2-Lipschitz and |g(v)| <= |v|/2 on the unit ball.
  const double lip_g = 0.5;
  const double lip_f = std::abs(scale) * std::sqrt(2.0);
  spec.L = opts.L.value_or(std::sqrt(lip_g * lip_g + lip_f * lip_f));
  spec.g_sup = 0.5;
  spec.f_sup = std::abs(scale) * std::sqrt(2.0);
  if (opts.eps_halfwidth > 0.0) {
    spec.state_noise = {NoiseSpec::Kind::Uniform, opts.eps_halfwidth};
  }
  if (opts.eta_halfwidth > 0.0) {
    spec.output_noise = {NoiseSpec::Kind::Uniform, opts.eta_halfwidth};
  }
  spec.init = DynamicsSpec::Init::UnitSquare;
  return spec;
}

DynamicsSpec make_null_dynamics(std::size_t d) {
  DynamicsSpec spec;
  spec.name = "null";
  spec.d = d;
  spec.g = [](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  spec.f = [](std::span<const double>) { return 0.0; };
  spec.L = 0.0;
  spec.init = DynamicsSpec::Init::Origin;
  return spec;
}

namespace {

void check_state(const DataState& s, const DynamicsSpec& spec) {
  constexpr double kSlack = 1e-12;
  if (!(s.state_norm() <= 1.0 + kSlack)) {
    std::ostringstream os;
    os << spec.name << ": |(x,z)| = " << s.state_norm() << " exceeds 1 at step " << s.k;
    throw ConfigError(os.str());
  }
  if (!(std::abs(s.y) <= spec.c_y() + kSlack)) {
    std::ostringstream os;
    os << spec.name << ": |y| = " << std::abs(s.y) << " exceeds C_y = " << spec.c_y();
    throw ConfigError(os.str());
  }
}

double output(const DataState& s, const DynamicsSpec& spec, Rng& rng) {
  std::vector<double> xz(s.x);
  xz.push_back(s.z);
  return spec.f(xz) + spec.output_noise.sample(rng);
}

} // namespace

DataState initial_state(const DynamicsSpec& spec, Rng& rng) {
  DataState s;
  s.x.assign(spec.d, 0.0);
  if (spec.init == DynamicsSpec::Init::UnitSquare) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (auto& v : s.x) {
      v = unif(rng);
    }
    s.z = unif(rng);
    // Radial projection onto the unit ball keeps |(x,z)| <= 1 from k = 0.
    const double norm = s.state_norm();
    if (norm > 1.0) {
      for (auto& v : s.x) {
        v /= norm;
      }
      s.z /= norm;
    }
  }
  s.k = 0;
  s.y = output(s, spec, rng);
  check_state(s, spec);
  return s;
}

DataState step_data(const DataState& state, const DynamicsSpec& spec, Rng& rng) {
  std::vector<double> xz(state.x);
  xz.push_back(state.z);
  std::vector<double> next(spec.d + 1);
  spec.g(xz, next);
  for (auto& v : next) {
    v += spec.state_noise.sample(rng);
  }
  DataState out;
  out.x.assign(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(spec.d));
  out.z = next[spec.d];
  out.k = state.k + 1;
  out.y = output(out, spec, rng);
  check_state(out, spec);
  return out;
}

double contraction_q0(double L, double c_sigma) {
  return std::sqrt(L * L + 8.0 * c_sigma * c_sigma);
}

AssumptionReport validate_assumptions(const DynamicsSpec& spec, const Activation& act,
                                      std::optional<ScalingWindow> window) {
  AssumptionReport r;
  r.L = spec.L;
  r.c_sigma = act.c_sigma();
  r.q0 = contraction_q0(r.L, r.c_sigma);
  r.lipschitz_ok = r.L < 1.0;
  const double cs2 = r.c_sigma * r.c_sigma;
  r.activation_ok = cs2 < std::min(0.5, (1.0 - r.L * r.L) / 8.0);
  r.contraction_ok = r.q0 < 1.0;
  r.noise_ok = std::max(spec.g_sup, spec.eps_bound()) <= 0.5;
  if (window) {
    const double beta = window->beta;
    const double gamma = window->gamma;
    r.window_ok = beta > 0.5 && beta < 1.0 && gamma > 0.0 && gamma < (1.0 - beta) / 2.0 &&
                  beta + 2.0 * gamma < 1.0;
  }
  return r;
}

std::string AssumptionReport::summary() const {
  std::ostringstream os;
  os << "L=" << L << " C_sigma=" << c_sigma << " q0=" << q0
     << " lipschitz=" << (lipschitz_ok ? "ok" : "FAIL")
     << " activation=" << (activation_ok ? "ok" : "FAIL")
     << " contraction=" << (contraction_ok ? "ok" : "FAIL")
     << " noise=" << (noise_ok ? "ok" : "FAIL") << " window=" << (window_ok ? "ok" : "FAIL");
  return os.str();
}

} // namespace mflab

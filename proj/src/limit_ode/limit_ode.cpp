#include "mflab/limit_ode/limit_ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mflab/simd/kernels.hpp"

namespace mflab {

std::uint64_t min_burn_in(double tol, double q0) {
  if (!(tol > 0.0 && tol < 1.0) || !(q0 > 0.0 && q0 < 1.0)) {
    throw ConfigError("min_burn_in needs tol and q0 in (0,1)");
  }
  return static_cast<std::uint64_t>(std::ceil(std::log(tol) / std::log(q0)));
}

StationarySample sample_mu(const DynamicsSpec& spec, const MeasureSample& lambda,
                           const Activation& act, const MuSampling& opts) {
  const double q0 = contraction_q0(spec.L, act.c_sigma());
  if (!(q0 < 1.0)) {
    throw ConfigError("chain is not contractive (q0 = " + std::to_string(q0) + ")");
  }
  const auto need = min_burn_in(opts.tol, q0);
  if (opts.burn_in < need) {
    throw ConfigError("burn_in " + std::to_string(opts.burn_in) + " below required " +
                      std::to_string(need));
  }
  if (opts.M == 0 || opts.stride == 0) {
    throw ConfigError("sample_mu needs M >= 1 and stride >= 1");
  }

  StationarySample out;
  out.burn_in = opts.burn_in;
  out.stride = opts.stride;
  out.seed = opts.seed;
  out.entries.reserve(opts.M);
  ChainStepper stepper;

  if (opts.harvest == Harvest::SingleChain) {
    Rng rng = make_rng(opts.seed, {0x5a3c});
    ChainH st = chain_start(spec, rng);
    for (std::uint64_t k = 0; k < opts.burn_in; ++k) {
      advance_chain(st, spec, lambda, act, rng, stepper);
    }
    for (std::size_t i = 0; i < opts.M; ++i) {
      out.entries.push_back(st);
      for (std::uint64_t k = 0; k < opts.stride; ++k) {
        advance_chain(st, spec, lambda, act, rng, stepper);
      }
    }
  } else {
    for (std::size_t i = 0; i < opts.M; ++i) {
      Rng rng = make_rng(opts.seed, {0x5a3d, i});
      ChainH st = chain_start(spec, rng);
      for (std::uint64_t k = 0; k < opts.burn_in; ++k) {
        advance_chain(st, spec, lambda, act, rng, stepper);
      }
      out.entries.push_back(std::move(st));
    }
  }
  return out;
}

KernelGram build_gram(const StationarySample& s, const MeasureSample& lambda,
                      const Activation& act) {
  const std::size_t M = s.size();
  const Triples& t = lambda.entries;
  const std::size_t L = t.size();
  if (M == 0) {
    throw std::domain_error("build_gram needs at least one sample");
  }
  if (L == 0) {
    throw std::domain_error("build_gram over an empty measure");
  }
  const std::size_t d = s.entries.front().data.x.size();

  Eigen::MatrixXd X(M, d);
  Eigen::VectorXd y(M);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      X(i, j) = s.entries[i].data.x[j];
    }
    y(i) = s.entries[i].data.y;
  }
  const Eigen::MatrixXd XX = X * X.transpose();

  constexpr std::size_t chunk = 4096;
  Eigen::MatrixXd SS = Eigen::MatrixXd::Zero(M, M);
  Eigen::MatrixXd DD = Eigen::MatrixXd::Zero(M, M);
  Eigen::MatrixXd S(M, chunk), D(M, chunk);
  std::vector<double> pre(chunk), val(chunk), der(chunk);
  Triples part(0, d);

  for (std::size_t lo = 0; lo < L; lo += chunk) {
    const std::size_t n = std::min(chunk, L - lo);
    part.c.assign(t.c.begin() + lo, t.c.begin() + lo + n);
    part.b.assign(t.b.begin() + lo, t.b.begin() + lo + n);
    part.w.resize(n * d);
    for (std::size_t j = 0; j < d; ++j) {
      std::copy_n(t.w.begin() + j * L + lo, n, part.w.begin() + j * n);
    }
    S.resize(M, n);
    D.resize(M, n);
    for (std::size_t i = 0; i < M; ++i) {
      const auto& h = s.entries[i];
      part.project(h.data.x, std::span<double>(pre.data(), n));
      simd::sigmoid_eval(std::span<const double>(pre.data(), n), h.m, act.scale(),
                         std::span<double>(val.data(), n), std::span<double>(der.data(), n));
      for (std::size_t l = 0; l < n; ++l) {
        S(i, l) = val[l];
        D(i, l) = part.c[l] * der[l];
      }
    }
    SS.noalias() += S * S.transpose();
    DD.noalias() += D * D.transpose();
  }

  KernelGram g;
  g.K = (SS + XX.cwiseProduct(DD)) / static_cast<double>(L);
  g.K = 0.5 * (g.K + g.K.transpose()).eval();
  g.y = std::move(y);
  g.sample_seed = s.seed;
  return g;
}

double stable_dt(const KernelGram& g, double alpha) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.K, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigensolver failed");
  }
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmax > 0.0) || alpha <= 0.0) {
    return 1.0;
  }
  return 0.1 / (alpha * lmax / static_cast<double>(g.size()));
}

LimitTrajectory integrate(const KernelGram& g, double alpha, double T, double dt,
                          std::size_t record_every) {
  if (!(T >= 0.0) || !(dt > 0.0) || record_every == 0) {
    throw std::invalid_argument("integrate needs T >= 0, dt > 0, record_every >= 1");
  }
  if (dt > stable_dt(g, alpha) * (1.0 + 1e-12)) {
    throw NumericError("step size " + std::to_string(dt) + " violates the stability guard");
  }
  const auto M = static_cast<Eigen::Index>(g.size());
  const double rate = alpha / static_cast<double>(M);
  const auto steps = static_cast<std::uint64_t>(std::ceil(T / dt - 1e-9));

  auto rhs = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return -rate * (g.K * (u - g.y));
  };

  std::vector<double> times{0.0};
  std::vector<Eigen::VectorXd> rows{Eigen::VectorXd::Zero(M)};
  Eigen::VectorXd u = Eigen::VectorXd::Zero(M);
  double t = 0.0;
  for (std::uint64_t n = 1; n <= steps; ++n) {
    const double h = std::min(dt, T - t);
    const Eigen::VectorXd k1 = rhs(u);
    const Eigen::VectorXd k2 = rhs(u + 0.5 * h * k1);
    const Eigen::VectorXd k3 = rhs(u + 0.5 * h * k2);
    const Eigen::VectorXd k4 = rhs(u + h * k3);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = (n == steps) ? T : static_cast<double>(n) * dt;
    if (n % record_every == 0 || n == steps) {
      times.push_back(t);
      rows.push_back(u);
    }
  }

  LimitTrajectory out;
  out.method = LimitMethod::Rk4;
  out.alpha = alpha;
  out.times = std::move(times);
  out.u.resize(static_cast<Eigen::Index>(rows.size()), M);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.u.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  }
  return out;
}

ClosedForm::ClosedForm(const KernelGram& g, double alpha)
    : rate_(alpha / static_cast<double>(g.size())) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.K);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigensolver failed");
  }
  Q_ = es.eigenvectors();
  evals_ = es.eigenvalues();
  qty_ = Q_.transpose() * g.y;
}

Eigen::VectorXd ClosedForm::at(double t) const {
  Eigen::VectorXd coef(evals_.size());
  for (Eigen::Index i = 0; i < evals_.size(); ++i) {
    coef(i) = -std::expm1(-rate_ * evals_(i) * t) * qty_(i);
  }
  return Q_ * coef;
}

LimitTrajectory ClosedForm::on_grid(const std::vector<double>& times) const {
  LimitTrajectory out;
  out.method = LimitMethod::EigenClosedForm;
  out.alpha = rate_ * static_cast<double>(evals_.size());
  out.times = times;
  out.u.resize(static_cast<Eigen::Index>(times.size()), evals_.size());
  for (std::size_t r = 0; r < times.size(); ++r) {
    out.u.row(static_cast<Eigen::Index>(r)) = at(times[r]).transpose();
  }
  return out;
}

Eigen::VectorXd closed_form(const KernelGram& g, double alpha, double t) {
  return ClosedForm(g, alpha).at(t);
}

std::vector<double> kernel_column(const StationarySample& s, const FuncH& h_test,
                                  const MeasureSample& lambda, const Activation& act) {
  std::vector<double> col(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    col[j] = kernel_K(s.entries[j].data.x, s.entries[j].m, h_test, lambda, act);
  }
  return col;
}

double g_limit_eval_column(const LimitTrajectory& traj, const KernelGram& g,
                           const std::vector<double>& column, double t) {
  if (traj.times.empty() || t < 0.0 || t > traj.T() * (1.0 + 1e-12)) {
    throw std::domain_error("g_limit_eval outside the trajectory's time range");
  }
  const auto M = static_cast<Eigen::Index>(g.size());
  if (static_cast<Eigen::Index>(column.size()) != M || traj.u.cols() != M) {
    throw std::domain_error("kernel column does not match the sample");
  }
  const Eigen::Map<const Eigen::VectorXd> col(column.data(), M);
  auto integrand = [&](const Eigen::VectorXd& u) {
    return (u - g.y).dot(col) / static_cast<double>(M);
  };
  double acc = 0.0;
  double prev = integrand(traj.u.row(0).transpose());
  for (std::size_t r = 1; r < traj.times.size(); ++r) {
    const double t0 = traj.times[r - 1];
    const double t1 = traj.times[r];
    if (t0 >= t) {
      break;
    }
    Eigen::VectorXd u1 = traj.u.row(static_cast<Eigen::Index>(r)).transpose();
    double end = t1;
    if (t1 > t) {
      const double w = (t - t0) / (t1 - t0);
      u1 = (1.0 - w) * traj.u.row(static_cast<Eigen::Index>(r - 1)).transpose() + w * u1;
      end = t;
    }
    const double cur = integrand(u1);
    acc += 0.5 * (end - t0) * (prev + cur);
    prev = cur;
  }
  return -traj.alpha * acc;
}

double g_limit_eval(const LimitTrajectory& traj, const StationarySample& s, const KernelGram& g,
                    const FuncH& h_test, const MeasureSample& lambda, const Activation& act,
                    double t) {
  return g_limit_eval_column(traj, g, kernel_column(s, h_test, lambda, act), t);
}

std::vector<LossPoint> loss_curve(const LimitTrajectory& traj, const KernelGram& g) {
  std::vector<LossPoint> out;
  out.reserve(traj.times.size());
  const double m = static_cast<double>(g.size());
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    const double sq = (traj.u.row(static_cast<Eigen::Index>(r)).transpose() - g.y).squaredNorm();
    out.push_back({traj.times[r], sq / (2.0 * m)});
  }
  return out;
}

bool loss_monotone(const std::vector<LossPoint>& curve, double rel_tol) {
  if (curve.empty()) {
    return true;
  }
  const double slack = rel_tol * curve.front().loss;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].loss > curve[i - 1].loss + slack) {
      return false;
    }
  }
  return true;
}

double max_abs_difference(const LimitTrajectory& a, const LimitTrajectory& b) {
  if (a.u.rows() != b.u.rows() || a.u.cols() != b.u.cols()) {
    throw std::invalid_argument("trajectories have different shapes");
  }
  return (a.u - b.u).cwiseAbs().maxCoeff();
}

std::string method_name(LimitMethod m) {
  return m == LimitMethod::Rk4 ? "rk4" : "eigen-closed-form";
}

} // namespace mflab

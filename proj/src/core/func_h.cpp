#include "mflab/core/func_h.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mflab/simd/kernels.hpp"

namespace mflab {

FuncH FuncH::logistic(std::vector<double> a, double b) {
  double norm_sq = 0.0;
  for (double v : a) {
    norm_sq += v * v;
  }
  if (a.empty() || norm_sq > 1.0 + 1e-12 || !std::isfinite(b)) {
    throw std::domain_error("H elements require |a| <= 1 and finite b");
  }
  FuncH h;
  h.zero_ = false;
  h.a_ = std::move(a);
  h.b_ = b;
  return h;
}

double FuncH::value(std::span<const double> w, const Activation& act) const {
  if (zero_) {
    return 0.0;
  }
  double z = b_;
  for (std::size_t j = 0; j < a_.size(); ++j) {
    z += w[j] * a_[j];
  }
  return act.value(z);
}

void FuncH::gradient(std::span<const double> w, const Activation& act,
                     std::span<double> grad) const {
  if (zero_) {
    std::fill(grad.begin(), grad.end(), 0.0);
    return;
  }
  double z = b_;
  for (std::size_t j = 0; j < a_.size(); ++j) {
    z += w[j] * a_[j];
  }
  const double d1 = act.d1(z);
  for (std::size_t j = 0; j < a_.size(); ++j) {
    grad[j] = d1 * a_[j];
  }
}

double FuncH::directional(std::span<const double> w, std::span<const double> x,
                          const Activation& act) const {
  if (zero_) {
    return 0.0;
  }
  double z = b_;
  double ax = 0.0;
  for (std::size_t j = 0; j < a_.size(); ++j) {
    z += w[j] * a_[j];
    ax += a_[j] * x[j];
  }
  return act.d1(z) * ax;
}

void FuncH::evaluate_on(const Triples& points, std::span<const double> x, const Activation& act,
                        std::span<double> value, std::span<double> directional) const {
  const std::size_t n = points.size();
  if (zero_) {
    std::fill(value.begin(), value.begin() + n, 0.0);
    std::fill(directional.begin(), directional.begin() + n, 0.0);
    return;
  }
  std::vector<double> pre(n);
  points.project(a_, pre);
  simd::sigmoid_eval(pre, b_, act.scale(), value, directional);
  double ax = 0.0;
  for (std::size_t j = 0; j < a_.size(); ++j) {
    ax += a_[j] * x[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    directional[i] *= ax;
  }
}

double h1_distance_sq(const FuncH& ha, const FuncH& hb, const MeasureSample& measure,
                      const Activation& act) {
  const std::size_t n = measure.size();
  if (n == 0) {
    throw std::domain_error("H1 distance over an empty measure");
  }
  const std::size_t d = measure.entries.d;
  std::vector<double> va(n, 0.0), da(n, 0.0), vb(n, 0.0), db(n, 0.0), pre(n);
  auto fill = [&](const FuncH& h, std::vector<double>& v, std::vector<double>& dv) {
    if (h.is_zero()) {
      return;
    }
    if (h.a().size() != d) {
      throw std::domain_error("H element dimension does not match the measure");
    }
    measure.entries.project(h.a(), pre);
    simd::sigmoid_eval(pre, h.b(), act.scale(), v, dv);
  };
  fill(ha, va, da);
  fill(hb, vb, db);

  const std::vector<double> zero_a(d, 0.0);
  const auto& aa = ha.is_zero() ? zero_a : ha.a();
  const auto& ab = hb.is_zero() ? zero_a : hb.a();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dv = va[i] - vb[i];
    double term = dv * dv;
    for (std::size_t j = 0; j < d; ++j) {
      const double dg = da[i] * aa[j] - db[i] * ab[j];
      term += dg * dg;
    }
    acc += term;
  }
  return acc / static_cast<double>(n);
}

} // namespace mflab

#include "mflab/core/rng.hpp"

namespace mflab {

std::vector<FuncH> default_test_functions(std::size_t d, std::uint64_t seed) {
  std::vector<std::vector<double>> dirs;
  if (d == 1) {
    dirs = {{0.9}, {-0.9}};
  } else {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < 2; ++k) {
      std::vector<double> a(d);
      double norm = 0.0;
      for (auto& v : a) {
        v = normal(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (auto& v : a) {
        v *= 0.9 / norm;
      }
      dirs.push_back(std::move(a));
    }
  }
  std::vector<FuncH> out;
  for (const auto& a : dirs) {
    for (double b : {-1.0, -0.25, 0.25, 1.0}) {
      out.push_back(FuncH::logistic(a, b));
    }
  }
  return out;
}

} // namespace mflab

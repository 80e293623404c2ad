#include "mflab/core/measure.hpp"

#include <cmath>
#include <stdexcept>

#include "mflab/core/rng.hpp"
#include "mflab/simd/kernels.hpp"

namespace mflab {

Triples::Triples(std::size_t count, std::size_t dim)
    : d(dim), c(count, 0.0), w(count * dim, 0.0), b(count, 0.0) {
  if (dim == 0) {
    throw std::domain_error("input dimension must be positive");
  }
}

void Triples::project(std::span<const double> x, std::span<double> out) const {
  if (x.size() != d || out.size() != size()) {
    throw std::domain_error("projection size mismatch");
  }
  const std::size_t n = size();
  const double* col = w.data();
  const double x0 = x[0];
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = col[i] * x0;
  }
  for (std::size_t j = 1; j < d; ++j) {
    col = w.data() + j * n;
    const double xj = x[j];
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += col[i] * xj;
    }
  }
}

Triples draw_lambda(std::size_t count, std::size_t d, std::uint64_t seed) {
  Triples t(count, d);
  Rng rng(seed);
  std::uniform_real_distribution<double> unif_c(-1.0, 1.0);
  std::uniform_real_distribution<double> unif_b(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  // Entry-major draw order keeps a prefix of a larger sample identical to a
  // smaller sample with the same seed.
  for (std::size_t i = 0; i < count; ++i) {
    t.c[i] = unif_c(rng);
    for (std::size_t j = 0; j < d; ++j) {
      t.w_at(i, j) = normal(rng);
    }
    t.b[i] = unif_b(rng);
  }
  return t;
}

MeasureSample sample_lambda(std::size_t count, std::size_t d, std::uint64_t seed) {
  if (count == 0) {
    throw std::domain_error("measure sample size must be at least 1");
  }
  MeasureSample m;
  m.entries = draw_lambda(count, d, seed);
  m.source = MeasureSample::Source::Lambda;
  m.seed = seed;
  return m;
}

double feedback_integral(std::span<const double> x, double m, const MeasureSample& measure,
                         const Activation& act) {
  if (measure.size() == 0) {
    throw std::domain_error("feedback integral over an empty measure");
  }
  std::vector<double> pre(measure.size());
  measure.entries.project(x, pre);
  const auto sums = simd::sigmoid_sums(pre, measure.entries.b, m, act.scale());
  return sums.weighted / static_cast<double>(measure.size());
}

} // namespace mflab

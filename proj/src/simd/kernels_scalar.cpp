#include <cmath>

#include "mflab/simd/kernels.hpp"

namespace mflab::simd {

namespace {

inline double logistic(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

SigmoidSums sums_scalar(const double* z, const double* weights, std::size_t n, double shift,
                        double scale) {
  SigmoidSums out;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = logistic(scale * (z[i] + shift));
    out.weighted += weights[i] * s;
    out.plain += s;
    out.squares += s * s;
  }
  return out;
}

void eval_scalar(const double* z, std::size_t n, double shift, double scale, double* value,
                 double* d1) {
  for (std::size_t i = 0; i < n; ++i) {
    const double s = logistic(scale * (z[i] + shift));
    value[i] = s;
    if (d1 != nullptr) {
      d1[i] = scale * s * (1.0 - s);
    }
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

constexpr KernelTable kScalar{Backend::Scalar, &sums_scalar, &eval_scalar, &dot_scalar};

} // namespace

const KernelTable& scalar_table() { return kScalar; }

} // namespace mflab::simd

#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// where the host supports it, an AVX2+FMA version; the active table is chosen
// once at startup from CPUID (override with MFLAB_SIMD=scalar|avx2).
//
// All sigmoid kernels evaluate s_i = 1 / (1 + exp(-scale * (z_i + shift))).

#include <cstddef>
#include <span>
#include <string_view>

namespace mflab::simd {

enum class Backend { Scalar, Avx2 };

struct SigmoidSums {
  double weighted = 0.0; // sum_i weights_i * s_i
  double plain = 0.0;    // sum_i s_i
  double squares = 0.0;  // sum_i s_i^2
};

struct KernelTable {
  Backend backend;
  SigmoidSums (*sigmoid_sums)(const double* z, const double* weights, std::size_t n, double shift,
                              double scale);
  void (*sigmoid_eval)(const double* z, std::size_t n, double shift, double scale, double* value,
                       double* d1);
  double (*dot)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

bool backend_available(Backend b);
Backend active_backend();
/// Switches the process-wide table; throws std::runtime_error when unavailable.
void set_backend(Backend b);
std::string_view backend_name(Backend b);

const KernelTable& kernels();

inline SigmoidSums sigmoid_sums(std::span<const double> z, std::span<const double> weights,
                                double shift, double scale = 1.0) {
  return kernels().sigmoid_sums(z.data(), weights.data(), z.size(), shift, scale);
}

inline void sigmoid_eval(std::span<const double> z, double shift, double scale,
                         std::span<double> value, std::span<double> d1) {
  kernels().sigmoid_eval(z.data(), z.size(), shift, scale, value.data(), d1.data());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}

} // namespace mflab::simd

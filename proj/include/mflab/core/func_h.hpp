#pragma once

#include <span>
#include <vector>

#include "mflab/core/activation.hpp"
#include "mflab/core/measure.hpp"

namespace mflab {

/// An element of the ridge-function class H: either the zero function or
/// w -> sigma(w^T a + b) with |a| <= 1.
class FuncH {
public:
  FuncH() = default; // zero function
  static FuncH zero() { return FuncH{}; }
  /// Throws std::domain_error when |a| > 1 (beyond rounding).
  static FuncH logistic(std::vector<double> a, double b);

  bool is_zero() const { return zero_; }
  const std::vector<double>& a() const { return a_; }
  double b() const { return b_; }

  double value(std::span<const double> w, const Activation& act) const;
  /// Writes grad h(w) into `grad` (size d); zeros for the zero function.
  void gradient(std::span<const double> w, const Activation& act, std::span<double> grad) const;
  /// grad h(w)^T x without materializing the gradient.
  double directional(std::span<const double> w, std::span<const double> x,
                     const Activation& act) const;

  /// Evaluates h and grad h^T x at every entry of `points`.
  void evaluate_on(const Triples& points, std::span<const double> x, const Activation& act,
                   std::span<double> value, std::span<double> directional) const;

private:
  bool zero_ = true;
  std::vector<double> a_;
  double b_ = 0.0;
};

/// Monte-Carlo estimate of ||hA - hB||^2_{H^1(lambda)} over the w entries of
/// the measure. Throws std::domain_error on an empty measure.
double h1_distance_sq(const FuncH& ha, const FuncH& hb, const MeasureSample& measure,
                      const Activation& act);

} // namespace mflab

namespace mflab {

/// The experiment test set: two directions on the unit sphere scaled by 0.9
/// (for d = 1: a = +-0.9) crossed with b in {-1, -0.25, 0.25, 1}.
std::vector<FuncH> default_test_functions(std::size_t d, std::uint64_t seed = 2024);

} // namespace mflab

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mflab {

/// Exact W1 between two empirical distributions on the line: the integral of
/// |F_a - F_b|. Inputs need not be sorted. Throws std::domain_error on an
/// empty sample.
double wasserstein1(std::span<const double> a, std::span<const double> b);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
  std::size_t total = 0;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  /// counts / (total * width), integrating to one.
  double density(std::size_t bin) const;
};

/// Equal-width bins on [lo, hi]; the right edge belongs to the last bin and
/// values outside are clamped into the edge bins.
Histogram histogram(std::span<const double> values, std::size_t bins = 200, double lo = 0.0,
                    double hi = 1.0);

} // namespace mflab

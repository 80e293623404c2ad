#include "mflab/harness/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mflab {

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::domain_error("wasserstein1 of an empty sample");
  }
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());

  // Sweep the merged support, integrating |F_a - F_b| between breakpoints.
  std::size_t i = 0;
  std::size_t j = 0;
  double prev = std::min(sa.front(), sb.front());
  double acc = 0.0;
  while (i < sa.size() || j < sb.size()) {
    double x;
    if (j == sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      x = sa[i];
    } else {
      x = sb[j];
    }
    acc += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (x - prev);
    while (i < sa.size() && sa[i] == x) {
      ++i;
    }
    while (j < sb.size() && sb[j] == x) {
      ++j;
    }
    prev = x;
  }
  return acc;
}

double Histogram::density(std::size_t bin) const {
  if (total == 0) {
    return 0.0;
  }
  return static_cast<double>(counts.at(bin)) / (static_cast<double>(total) * bin_width());
}

Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  if (bins == 0 || !(hi > lo)) {
    throw std::invalid_argument("histogram needs bins >= 1 and hi > lo");
  }
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (double v : values) {
    auto k = static_cast<long long>(std::floor((v - lo) * scale));
    k = std::clamp<long long>(k, 0, static_cast<long long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(k)];
  }
  h.total = values.size();
  return h;
}

} // namespace mflab

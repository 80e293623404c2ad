#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mflab/core/activation.hpp"

namespace mflab {

/// Structure-of-arrays storage for (c, w, b) triples.
///
/// `w` is component-major: component j of entry i lives at w[j * size() + i],
/// so `w_component(j)` is a contiguous span over all entries.
struct Triples {
  std::size_t d = 1;
  std::vector<double> c;
  std::vector<double> w;
  std::vector<double> b;

  Triples() = default;
  Triples(std::size_t count, std::size_t dim);

  std::size_t size() const { return c.size(); }
  double& w_at(std::size_t i, std::size_t j) { return w[j * size() + i]; }
  double w_at(std::size_t i, std::size_t j) const { return w[j * size() + i]; }
  std::span<const double> w_component(std::size_t j) const {
    return {w.data() + j * size(), size()};
  }

  /// out[i] = W_i^T x for every entry.
  void project(std::span<const double> x, std::span<double> out) const;
};

/// Finite sample standing in for lambda (i.i.d. draws), lambda^N (network
/// initialization) or lambda^N_k (current parameters).
struct MeasureSample {
  enum class Source { Lambda, LambdaN, LambdaNk };

  Triples entries;
  Source source = Source::Lambda;
  std::uint64_t seed = 0;

  std::size_t size() const { return entries.size(); }
};

/// Default lambda: c ~ U[-1,1], b ~ U[0,1], w ~ Normal(0, I/d), independent.
Triples draw_lambda(std::size_t count, std::size_t d, std::uint64_t seed);

MeasureSample sample_lambda(std::size_t count, std::size_t d, std::uint64_t seed);

/// Sample average of b * sigma(w^T x + m). Throws std::domain_error when the
/// measure is empty or x has the wrong dimension.
double feedback_integral(std::span<const double> x, double m, const MeasureSample& measure,
                         const Activation& act);

} // namespace mflab

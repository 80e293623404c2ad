#include "mflab/core/activation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mflab {

namespace {

// sup |sigma''| of the standard logistic, attained at sigma = 1/2 +- 1/(2 sqrt 3).
constexpr double kLogisticD2Sup = 0.09622504486493763;

double logistic(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

} // namespace

Activation Activation::scaled(double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) {
    throw std::domain_error("scaled logistic requires scale in (0, 1]");
  }
  Activation a;
  a.kind_ = Kind::ScaledLogistic;
  a.scale_ = scale;
  return a;
}

double Activation::c_sigma() const {
  return std::max(scale_ / 4.0, scale_ * scale_ * kLogisticD2Sup);
}

Activation::Eval Activation::eval(double z) const {
  if (!std::isfinite(z)) {
    throw std::domain_error("activation input is not finite");
  }
  const double s = logistic(scale_ * z);
  const double p = s * (1.0 - s);
  return {s, scale_ * p, scale_ * scale_ * p * (1.0 - 2.0 * s)};
}

double Activation::value(double z) const { return eval(z).value; }

double Activation::d1(double z) const { return eval(z).d1; }

std::string Activation::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::StandardLogistic) {
    os << "logistic";
  } else {
    os << "logistic(scale=" << scale_ << ")";
  }
  return os.str();
}

} // namespace mflab

#pragma once

#include <string>

namespace mflab {

/// Logistic activation, optionally with its argument scaled: sigma(s * z).
///
/// Both variants map into [0,1]. `c_sigma()` bounds the first and second
/// derivatives simultaneously; for the standard logistic it equals 1/4.
class Activation {
public:
  enum class Kind { StandardLogistic, ScaledLogistic };

  struct Eval {
    double value;
    double d1;
    double d2;
  };

  Activation() = default;
  static Activation standard() { return Activation{}; }
  /// Requires scale in (0, 1].
  static Activation scaled(double scale);

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  double c_sigma() const;

  /// Value and exact first/second derivatives. Throws std::domain_error on
  /// non-finite input.
  Eval eval(double z) const;
  double value(double z) const;
  double d1(double z) const;

  std::string describe() const;

private:
  Kind kind_ = Kind::StandardLogistic;
  double scale_ = 1.0;
};

} // namespace mflab

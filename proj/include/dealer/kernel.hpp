#pragma once

#include <cmath>
#include <limits>

namespace dealer {

/// The composite rate that governs how fast aggregate inventory is passed to
/// the open market (units 1/time^2). Caches its square root.
class MeshRate {
 public:
  explicit MeshRate(double value);

  double value() const noexcept { return value_; }
  double sqrt() const noexcept { return sqrt_; }

  bool operator==(const MeshRate&) const = default;

 private:
  double value_;
  double sqrt_;
};

/// Elasticity that may be infinite (a frictionless common impact).
class Elasticity {
 public:
  constexpr explicit Elasticity(double v) : value_(v) {}
  static constexpr Elasticity infinite() { return Elasticity(std::numeric_limits<double>::infinity()); }

  constexpr bool is_infinite() const noexcept { return value_ == std::numeric_limits<double>::infinity(); }
  constexpr double value() const noexcept { return value_; }
  /// 1/eta, exactly zero when infinite.
  constexpr double inverse() const noexcept { return is_infinite() ? 0.0 : 1.0 / value_; }

 private:
  double value_;
};

/// Feedback rate F(t) = sqrt(D) tanh(sqrt(D)(T - t)). Requires 0 <= t <= T.
double feedback_rate(MeshRate d, double t, double T);

/// Transfer kernel k(t, s) = D cosh(sqrt(D)(T - s)) / cosh(sqrt(D)(T - t)) for
/// t <= s <= T, evaluated in exponentially rescaled form so that large
/// sqrt(D)T does not overflow.
double transfer_kernel(MeshRate d, double t, double s, double T);

/// Closed form of the integral of transfer_kernel(t, s) over s in [t, T].
double kernel_integral(MeshRate d, double t, double T);

/// D = eta * eta_bar / (rho_bar (eta + eta_bar)); continuous limit eta_bar/rho_bar
/// when eta is infinite.
MeshRate mesh_rate(double rho_bar, Elasticity eta, double eta_bar);

namespace hyperbolic {

// Ratios that appear throughout the closed forms, all overflow-free.

/// cosh(a x) / cosh(a y) for 0 <= x <= y.
double cosh_ratio(double a, double x, double y);
/// sinh(a x) / cosh(a y) for 0 <= x <= y.
double sinh_cosh_ratio(double a, double x, double y);
/// 1 / cosh(a x).
double sech(double a, double x);

}  // namespace hyperbolic

}  // namespace dealer

#include "dealer/kernel.hpp"

#include <string>

#include "dealer/errors.hpp"
#include "dealer/horizon.hpp"

namespace dealer {

Horizon::Horizon(std::vector<double> grid) : grid_(std::move(grid)) {
  if (grid_.size() < 2) throw DomainError("horizon grid needs at least two nodes");
  if (grid_.front() != 0.0) throw DomainError("horizon grid must start at 0");
  for (std::size_t i = 1; i < grid_.size(); ++i)
    if (!(grid_[i] > grid_[i - 1])) throw DomainError("horizon grid must be strictly increasing");
}

Horizon Horizon::uniform(double T, std::size_t steps) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon length must be positive");
  if (steps == 0) throw DomainError("horizon needs at least one step");
  std::vector<double> g(steps + 1);
  const double h = T / static_cast<double>(steps);
  for (std::size_t i = 0; i <= steps; ++i) g[i] = h * static_cast<double>(i);
  g.back() = T;
  return Horizon(std::move(g));
}

MeshRate::MeshRate(double value) : value_(value), sqrt_(std::sqrt(value)) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw DomainError("mesh rate must be positive and finite, got " + std::to_string(value));
}

namespace hyperbolic {

double cosh_ratio(double a, double x, double y) {
  // e^{-a(y-x)} (1 + e^{-2ax}) / (1 + e^{-2ay})
  return std::exp(-a * (y - x)) * (1.0 + std::exp(-2.0 * a * x)) / (1.0 + std::exp(-2.0 * a * y));
}

double sinh_cosh_ratio(double a, double x, double y) {
  return std::exp(-a * (y - x)) * (-std::expm1(-2.0 * a * x)) / (1.0 + std::exp(-2.0 * a * y));
}

double sech(double a, double x) {
  const double e = std::exp(-a * x);
  return 2.0 * e / (1.0 + e * e);
}

}  // namespace hyperbolic

namespace {

void check_time(double t, double T) {
  if (!(t >= 0.0) || !(t <= T)) throw DomainError("time outside [0, T]: t=" + std::to_string(t));
}

}  // namespace

double feedback_rate(MeshRate d, double t, double T) {
  check_time(t, T);
  return d.sqrt() * std::tanh(d.sqrt() * (T - t));
}

double transfer_kernel(MeshRate d, double t, double s, double T) {
  check_time(t, T);
  check_time(s, T);
  if (s < t) throw DomainError("transfer kernel requires s >= t");
  return d.value() * hyperbolic::cosh_ratio(d.sqrt(), T - s, T - t);
}

double kernel_integral(MeshRate d, double t, double T) { return feedback_rate(d, t, T); }

MeshRate mesh_rate(double rho_bar, Elasticity eta, double eta_bar) {
  if (!(rho_bar > 0.0)) throw DomainError("aggregate risk tolerance must be positive");
  if (!(eta_bar > 0.0)) throw DomainError("aggregate elasticity must be positive");
  if (!eta.is_infinite() && !(eta.value() > 0.0)) throw DomainError("common elasticity must be positive");
  if (eta.is_infinite()) return MeshRate(eta_bar / rho_bar);
  if (std::isinf(eta_bar)) return MeshRate(eta.value() / rho_bar);
  return MeshRate(eta.value() * eta_bar / (rho_bar * (eta.value() + eta_bar)));
}

}  // namespace dealer

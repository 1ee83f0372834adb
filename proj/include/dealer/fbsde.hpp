#pragma once

#include <span>
#include <vector>

#include "dealer/demand.hpp"
#include "dealer/horizon.hpp"
#include "dealer/kernel.hpp"
#include "dealer/sim_paths.hpp"

namespace dealer {

/// Markov state of a supported driver at time t: its level and, for smooth
/// rate demands, the current rate.
struct ProcessState {
  double level = 0.0;
  double rate = 0.0;
};

struct KernelIntegral {
  double value = 0.0;
  bool resonance = false;  // OU near-resonant series branch was used
};

/// Relative width of the OU near-resonance band |kappa^2 - D| < eps * D.
inline constexpr double kResonanceBand = 1e-6;

/// Conditional kernel integral G(t) = E_t[ int_t^T k(t,s) X_s ds ] given the
/// process state at t, in closed form for every kind except sampled demands
/// (those need the whole path; see ForwardSolver).
KernelIntegral conditional_kernel_integral(const DemandProcess& x, MeshRate d, double t, double T,
                                           ProcessState state);

/// Solution of the linear FBSDE  du = D(U - X)dt + dM, u_T = 0, dU = u dt,
/// U_0 = 0 along one realized driver path.
struct FbsdePath {
  std::vector<double> t;
  std::vector<double> u;
  std::vector<double> U;
  std::vector<double> X;
  bool deterministic = true;
};

/// Evaluates u = G - F U and integrates dU = u dt with Heun's method.
/// Construction precomputes all grid-dependent coefficients so solve() is
/// cheap and can run concurrently on independent paths.
class ForwardSolver {
 public:
  ForwardSolver(DemandProcess x, MeshRate d, Horizon grid);

  /// Deterministic drivers only.
  FbsdePath solve() const;
  FbsdePath solve(const RealizedPath& path) const;
  /// Same, reusing the storage of `out`.
  void solve(const RealizedPath& path, FbsdePath& out) const;

  /// G at every node of the realized path.
  std::vector<double> driver_integral(const RealizedPath& path) const;

  const Horizon& grid() const noexcept { return grid_; }
  MeshRate delta() const noexcept { return delta_; }
  std::span<const double> feedback() const noexcept { return feedback_; }
  bool used_resonance_branch() const noexcept { return resonance_; }

 private:
  // G_i = level_coef_i * X_i + rate_coef_i * r_i + offset_i
  DemandProcess x_;
  MeshRate delta_;
  Horizon grid_;
  std::vector<double> feedback_;
  std::vector<double> level_coef_;
  std::vector<double> rate_coef_;
  std::vector<double> offset_;
  bool deterministic_ = true;
  bool resonance_ = false;
  RealizedPath fixed_path_;  // realized path of a deterministic driver
};

FbsdePath solve_forward(const DemandProcess& x, MeshRate d, const Horizon& grid);
FbsdePath solve_forward(const DemandProcess& x, MeshRate d, const Horizon& grid, const RealizedPath& path);

/// G_i = int_{t_i}^T k(t_i, s) x(s) ds for a piecewise-linear deterministic
/// driver sampled on the grid, computed exactly by a backward recursion.
std::vector<double> sampled_kernel_integral(std::span<const double> samples, MeshRate d, const Horizon& grid);

struct FbsdeResidual {
  double max_drift = 0.0;  // max_i |D^{-1} (u_{i+1} - u_i)/h - (U_i - X_i)|
  double terminal = 0.0;   // |u_N|
};

/// Residual of the backward equation on a deterministic-driver path. Throws
/// DomainError for stochastic drivers, whose increments carry a martingale part.
FbsdeResidual fbsde_residual(const FbsdePath& path, MeshRate d);

}  // namespace dealer

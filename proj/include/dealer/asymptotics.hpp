#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dealer/demand.hpp"
#include "dealer/fbsde.hpp"
#include "dealer/market_model.hpp"
#include "dealer/parallel.hpp"

namespace dealer {

/// M identical dealers of mass 1/M with risk tolerance rho_d and no
/// idiosyncratic access cost, absorbing the noise demand K^N.
struct DealerPanel {
  unsigned M = 2;
  double rho_d = 0.1;
  double lambda = 0.1;
};

MarketParams panel_market(const DealerPanel& panel, const DemandProcess& noise, const Horizon& grid);

/// Mesh rate of the panel, obtained through the generic aggregation.
MeshRate panel_mesh_rate(const DealerPanel& panel);

/// Steps used for a panel: max(min_steps, ceil(50 sqrt(Delta) T)), capped at 1e6.
std::size_t panel_steps(const DealerPanel& panel, double T, std::size_t min_steps);

/// Noise traders' shortfall against the fundamental price, D-free:
///   -lambda (M+1)/M sum_i K^N_i (u_bar_{i+1} - u_bar_i).
double liquidity_cost(const DealerPanel& panel, std::span<const double> K_N, std::span<const double> u_bar);

/// Same cost through the drift route lambda (M+1)/M int mu^N u_bar dt
/// (trapezoid), for deterministic smooth demand with rate mu^N.
double liquidity_cost_direct(const DealerPanel& panel, std::span<const double> t, std::span<const double> rate,
                             std::span<const double> u_bar);

enum class DemandFamily { smooth, diffusive };

struct ScalingConfig {
  DemandFamily family = DemandFamily::diffusive;
  DemandProcess demand = BrownianDemand{0.0, 1.0};
  unsigned M = 2;
  double rho_d = 0.1;
  double T = 1.0;
  std::vector<double> lambdas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  std::size_t paths = 10000;
  std::size_t min_steps = 1000;
  std::uint64_t seed = 0;
};

struct LambdaEstimate {
  double lambda = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  std::size_t steps = 0;
};

struct LiquidityCostReport {
  std::string family;
  unsigned M = 0;
  double rho_d = 0.0;
  std::vector<LambdaEstimate> estimates;
  double slope = 0.0;
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  double prefactor = 0.0;  // cost / lambda or cost / sqrt(lambda) at the smallest lambda
  double prefactor_se = 0.0;
  double prefactor_theory = 0.0;
  std::vector<std::string> warnings;
};

/// E int (mu^N)^2 dt (smooth family) or E int (sigma^N)^2 dt (diffusive
/// family) for the supported demands, in closed form.
double demand_energy(DemandFamily family, const DemandProcess& demand, double T);

LiquidityCostReport scaling_study(const ScalingConfig& config, Execution exec = Execution::parallel);

/// Dealer-panel variant of a study: the M and rho_d fields of the config.
struct PanelChoice {
  unsigned M = 2;
  double rho_d = 0.1;
};

/// One report per panel, from shared paths: for each lambda every panel uses
/// the finest grid any of them needs, and each path's draws are generated
/// once and fed to all panels.
std::vector<LiquidityCostReport> scaling_studies(const ScalingConfig& config, const std::vector<PanelChoice>& panels,
                                                 Execution exec = Execution::parallel);

struct ConvergenceEstimate {
  double lambda = 0.0;
  double mean = 0.0;  // E int (K^N - U_bar)^2 dt
  double std_error = 0.0;
  std::size_t steps = 0;
};

struct MonotoneReport {
  std::vector<ConvergenceEstimate> estimates;
  bool decreasing = true;  // within two standard errors along the lambda grid
  double reduction = 0.0;  // first / last estimate
};

MonotoneReport convergence_check(const ScalingConfig& config, Execution exec = Execution::parallel);

/// Per-path statistic for a panel on a fixed grid; exposed for the benchmark
/// and for the serial-vs-parallel tests.
struct PathKernel {
  PathKernel(const DealerPanel& panel, const DemandProcess& demand, const Horizon& grid);

  /// `fresh = false` reuses the path this thread realized last (same demand,
  /// grid and key), which lets several panels share one draw.
  double cost(NoiseKey key, bool fresh = true) const;
  double tracking(NoiseKey key) const;  // int (K^N - U_bar)^2 dt

  DealerPanel panel;
  DemandProcess demand;
  ForwardSolver solver;
};

/// Mean and standard error with a fixed (pairwise) reduction order.
struct SampleMoments {
  double mean = 0.0;
  double std_error = 0.0;
};
SampleMoments sample_moments(std::span<const double> values);

}  // namespace dealer

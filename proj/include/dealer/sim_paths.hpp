#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dealer/demand.hpp"
#include "dealer/horizon.hpp"

namespace dealer {

/// Identifies one Monte Carlo path: every Gaussian draw is a pure function of
/// (seed, path, step), independent of generation order or thread count.
struct NoiseKey {
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
};

/// Standard normal for (key, step). Steps 2k and 2k+1 are the two outputs of
/// one polar-method draw, whose uniforms come from Philox blocks indexed by k.
double standard_normal(NoiseKey key, std::uint64_t step);

/// Fills out[i] = standard_normal(key, i) for i in [0, out.size()).
void fill_standard_normals(NoiseKey key, std::span<double> out);

/// Realized path of a demand process on the grid. `rate` is populated only for
/// smooth-rate demands (the rate process itself).
struct RealizedPath {
  std::vector<double> level;
  std::vector<double> rate;
};

/// Realized path driven by the Brownian increments of `key`. Deterministic
/// kinds ignore the key. Brownian: x0 + sigma W; OU: exact discretization on
/// the same Gaussian draws; smooth rate: trapezoidal running integral.
RealizedPath generate(const DemandProcess& demand, const Horizon& grid, NoiseKey key);

/// Same, with precomputed standard normals (one per step), for reuse across
/// several demands sharing the driver within a path.
RealizedPath generate(const DemandProcess& demand, const Horizon& grid, std::span<const double> normals);

/// Same, writing into `out` so hot loops can reuse its storage.
void generate(const DemandProcess& demand, const Horizon& grid, std::span<const double> normals, RealizedPath& out);

/// Brownian path W on the grid, W_0 = 0.
std::vector<double> brownian_path(const Horizon& grid, NoiseKey key);

enum class IntegralMode {
  against_increments,    // sum H_i (X_{i+1} - X_i), left endpoint (Ito)
  quadratic_covariation  // sum (H_{i+1} - H_i)(X_{i+1} - X_i)
};

/// Discrete stochastic integral / covariation of two paths on one grid.
double discrete_integral(std::span<const double> integrand, std::span<const double> integrator, IntegralMode mode);

}  // namespace dealer

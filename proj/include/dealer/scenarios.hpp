#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dealer/horizon.hpp"
#include "dealer/kernel.hpp"
#include "dealer/market_model.hpp"
#include "dealer/parallel.hpp"

namespace dealer {

/// Number of dealers (and of clients): a positive integer or the competitive
/// limit of infinitely many small ones.
class DealerCount {
 public:
  static DealerCount finite(unsigned m);
  static DealerCount infinite() { return DealerCount(0, true); }

  bool is_infinite() const noexcept { return infinite_; }
  unsigned value() const;  // DomainError when infinite
  std::string label() const;  // "1", "2", ..., "inf"

 private:
  DealerCount(unsigned m, bool inf) : m_(m), infinite_(inf) {}
  unsigned m_;
  bool infinite_;
};

/// Clients with constant target xi_c and no open-market access trade with M
/// dealers who reach the open market at the common cost only. Clients and
/// dealers each have total mass 1/2.
struct LiquidationScenario {
  double lambda = 0.1;
  double rho_c = 0.1;
  double rho_d = 0.1;
  double T = 1.0;
  double xi_c = -1.0;
  DealerCount M = DealerCount::finite(1);
};

void validate(const LiquidationScenario& s);

/// Delta_M; with `integrated` the clients also reach the open market, which
/// doubles the number of accessing agents (Delta_2M).
MeshRate liquidation_mesh_rate(const LiquidationScenario& s, bool integrated = false);

/// The scenario as a generic market on a uniform grid. M = inf is represented
/// by one dealer facing half the impact cost, which has the same mesh rate;
/// the integrated market needs finite M.
MarketParams liquidation_market(const LiquidationScenario& s, std::size_t steps, bool integrated = false);

struct LiquidationPaths {
  std::vector<double> t;
  std::vector<double> U_bar;
  std::vector<double> K_c;
  std::vector<double> price_dev;
};

LiquidationPaths liquidation_closed_form(const LiquidationScenario& s, const Horizon& grid);

/// Clients with Brownian target xi^c = sigma_xi W (started at zero).
struct DiffusiveScenario {
  double lambda = 0.1;
  double rho_c = 0.1;
  double rho_d = 0.1;
  double T = 1.0;
  double sigma_xi = 1.0;
  DealerCount M = DealerCount::finite(1);
  std::uint64_t seed = 0;
  std::size_t steps = 1000;
};

void validate(const DiffusiveScenario& s);
LiquidationScenario as_liquidation(const DiffusiveScenario& s);

struct DiffusivePath {
  std::vector<double> t;
  std::vector<double> xi;
  std::vector<double> K_c;
  std::vector<double> gap;  // xi_bar - U_bar
  std::vector<double> price_dev;
};

/// Euler-Maruyama paths on a uniform grid. Path `path` of seed `s.seed` uses
/// the same Brownian draws for every dealer count.
DiffusivePath diffusive_simulate(const DiffusiveScenario& s, std::uint64_t path = 0);

/// Per step: dK - F (xi - K) dt, the part of the clients' position change
/// that is not drift.
std::vector<double> martingale_increments(const DiffusivePath& p, MeshRate d);

/// Pooled regression of d(S-D) on ((S-D) dt, d xi^c) over nodes with
/// t <= t_max. Far from maturity the price deviation is close to an OU
/// process with mean reversion sqrt(Delta) and loading 1/(2 rho_bar sqrt(Delta)).
struct OuRegression {
  double mean_reversion = 0.0;
  double loading = 0.0;
  double mean_reversion_theory = 0.0;
  double loading_theory = 0.0;
  std::size_t paths = 0;
  std::size_t observations = 0;
};

OuRegression ou_regression(const DiffusiveScenario& s, std::size_t paths, double t_max,
                           Execution exec = Execution::parallel);

struct WelfareReport {
  double J_c_segmented = 0.0;
  double J_c_integrated = 0.0;
  double ratio = 0.0;  // J_c_segmented / J_c_integrated
  double asymptotic_J_c = 0.0;
  double asymptotic_J_c_int = 0.0;
  double asymptotic_ratio = 0.0;
};

/// Client welfare in the segmented and integrated markets by quadrature,
/// together with the leading-order small-lambda values.
WelfareReport segmentation_welfare(const LiquidationScenario& s, std::size_t panels = 4096);

struct RepresentativeComparison {
  double delta_infinite = 0.0;          // Delta with infinitely many dealers at lambda
  double delta_single_half = 0.0;       // Delta with one dealer at lambda / 2
  double max_path_gap = 0.0;            // liquidation closed forms, both routes
  WelfareReport infinite;               // welfare with M = inf at lambda
  WelfareReport single_half;            // welfare with M = 1 at lambda / 2
};

RepresentativeComparison representative_dealer_check(const LiquidationScenario& s, std::size_t steps = 1000);

}  // namespace dealer

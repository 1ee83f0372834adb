#pragma once

#include <limits>
#include <string>
#include <vector>

#include "dealer/demand.hpp"
#include "dealer/horizon.hpp"
#include "dealer/kernel.hpp"

namespace dealer {

/// Idiosyncratic open-market cost lambda^a: a finite value >= 0, or the
/// explicit no-access marker (lambda^a = +inf, elasticity exactly zero).
class AccessCost {
 public:
  constexpr explicit AccessCost(double v = 0.0) : value_(v), no_access_(false) {}
  static constexpr AccessCost no_access() {
    AccessCost c;
    c.no_access_ = true;
    c.value_ = std::numeric_limits<double>::infinity();
    return c;
  }

  constexpr bool is_no_access() const noexcept { return no_access_; }
  constexpr double value() const noexcept { return value_; }

 private:
  double value_;
  bool no_access_;
};

struct AgentSpec {
  std::string id;
  double mass = 1.0;
  double risk_tolerance = 1.0;
  AccessCost access_cost{};
  DemandProcess target = ZeroDemand{};
};

struct MarketParams {
  Horizon horizon = Horizon::uniform(1.0, 1000);
  double lambda = 0.1;  // common impact cost; 0 means eta = +inf
  std::vector<AgentSpec> agents;
  DemandProcess noise_demand = ZeroDemand{};
};

struct Aggregates {
  std::vector<double> eta_a;  // per agent, 0 for no-access agents
  double eta_bar = 0.0;
  Elasticity eta{0.0};
  double rho_bar = 0.0;
  DemandProcess xi_bar = ZeroDemand{};
  MeshRate delta{1.0};

  /// 1/eta + 1/eta_bar, the price sensitivity to the aggregate open-market rate.
  double price_sensitivity() const { return eta.inverse() + 1.0 / eta_bar; }
};

struct Diagnostics {
  std::vector<std::string> violations;
  bool ok() const noexcept { return violations.empty(); }
  std::string joined() const;
};

/// Checks every standing assumption and reports all violations at once.
Diagnostics validate(const MarketParams& params);

/// Elasticities, aggregate risk tolerance, mass-weighted target and the mesh
/// rate. Throws ConfigError when validation fails, when no agent can trade in
/// the open market, or when the targets cannot be combined.
Aggregates aggregate(const MarketParams& params);

/// 1 / (m(a) lambda + lambda^a), zero for no-access agents.
double agent_elasticity(const AgentSpec& a, double lambda);

}  // namespace dealer

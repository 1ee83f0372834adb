#include "dealer/market_model.hpp"

#include <cmath>

#include "dealer/errors.hpp"

namespace dealer {

std::string Diagnostics::joined() const {
  std::string s;
  for (const auto& v : violations) {
    if (!s.empty()) s += "; ";
    s += v;
  }
  return s;
}

double agent_elasticity(const AgentSpec& a, double lambda) {
  if (a.access_cost.is_no_access()) return 0.0;
  return 1.0 / (a.mass * lambda + a.access_cost.value());
}

Diagnostics validate(const MarketParams& p) {
  Diagnostics d;
  auto bad = [&](std::string msg) { d.violations.push_back(std::move(msg)); };
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) bad("common impact cost lambda must be finite and >= 0");
  if (p.agents.empty()) bad("agent roster is empty");
  const std::size_t nodes = p.horizon.nodes();
  if (auto e = check_demand(p.noise_demand, nodes); !e.empty()) bad("noise demand: " + e);
  for (const auto& a : p.agents) {
    const std::string who = "agent '" + a.id + "': ";
    if (!(a.mass > 0.0) || !std::isfinite(a.mass)) bad(who + "mass must be positive");
    if (!(a.risk_tolerance > 0.0) || !std::isfinite(a.risk_tolerance)) bad(who + "risk tolerance must be positive");
    if (!a.access_cost.is_no_access()) {
      const double c = a.access_cost.value();
      if (!(c >= 0.0) || !std::isfinite(c)) bad(who + "access cost must be >= 0 or no-access");
      else if (!(p.lambda + c > 0.0)) bad(who + "lambda + lambda^a must be positive (frictionless open-market trading)");
    }
    if (auto e = check_demand(a.target, nodes); !e.empty()) bad(who + "target: " + e);
  }
  return d;
}

Aggregates aggregate(const MarketParams& p) {
  if (auto d = validate(p); !d.ok()) throw ConfigError(d.joined());
  Aggregates g;
  g.eta = p.lambda > 0.0 ? Elasticity(1.0 / p.lambda) : Elasticity::infinite();
  g.eta_a.reserve(p.agents.size());
  for (const auto& a : p.agents) {
    const double e = agent_elasticity(a, p.lambda);
    g.eta_a.push_back(e);
    g.eta_bar += a.mass * e;
    g.rho_bar += a.mass * a.risk_tolerance;
    g.xi_bar = combine(g.xi_bar, 1.0, a.target, a.mass);
  }
  if (!(g.eta_bar > 0.0))
    throw ConfigError("no agent has access to the open market (aggregate elasticity is zero)");
  g.delta = mesh_rate(g.rho_bar, g.eta, g.eta_bar);
  return g;
}

}  // namespace dealer

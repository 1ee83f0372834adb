#include "dealer/scenarios.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "dealer/errors.hpp"
#include "dealer/quadrature.hpp"
#include "dealer/sim_paths.hpp"

namespace dealer {

DealerCount DealerCount::finite(unsigned m) {
  if (m == 0) throw ConfigError("dealer count must be at least 1");
  return DealerCount(m, false);
}

unsigned DealerCount::value() const {
  if (infinite_) throw DomainError("dealer count is infinite");
  return m_;
}

std::string DealerCount::label() const { return infinite_ ? "inf" : std::to_string(m_); }

void validate(const LiquidationScenario& s) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(s.lambda)) throw ConfigError("liquidation: lambda must be positive");
  if (!positive(s.rho_c) || !positive(s.rho_d)) throw ConfigError("liquidation: risk tolerances must be positive");
  if (!positive(s.T)) throw ConfigError("liquidation: horizon must be positive");
  if (!std::isfinite(s.xi_c)) throw ConfigError("liquidation: target must be finite");
}

MeshRate liquidation_mesh_rate(const LiquidationScenario& s, bool integrated) {
  validate(s);
  const double rho_bar = 0.5 * (s.rho_c + s.rho_d);
  const Elasticity eta(1.0 / s.lambda);
  if (s.M.is_infinite()) return mesh_rate(rho_bar, eta, std::numeric_limits<double>::infinity());
  // Each accessing agent has mass 1/(2M) and elasticity 2M/lambda.
  const double accessing = integrated ? 2.0 * s.M.value() : s.M.value();
  return mesh_rate(rho_bar, eta, accessing / s.lambda);
}

MarketParams liquidation_market(const LiquidationScenario& s, std::size_t steps, bool integrated) {
  validate(s);
  MarketParams p;
  p.horizon = Horizon::uniform(s.T, steps);
  unsigned m = 1;
  p.lambda = s.lambda;
  if (s.M.is_infinite()) {
    if (integrated) throw DomainError("integrated market needs a finite dealer count");
    p.lambda = 0.5 * s.lambda;
  } else {
    m = s.M.value();
  }
  const double mass = 1.0 / (2.0 * m);
  for (unsigned i = 0; i < m; ++i)
    p.agents.push_back({"dealer" + std::to_string(i + 1), mass, s.rho_d, AccessCost(0.0), ZeroDemand{}});
  for (unsigned i = 0; i < m; ++i)
    p.agents.push_back({"client" + std::to_string(i + 1), mass, s.rho_c,
                        integrated ? AccessCost(0.0) : AccessCost::no_access(), ConstantDemand{s.xi_c}});
  return p;
}

LiquidationPaths liquidation_closed_form(const LiquidationScenario& s, const Horizon& grid) {
  const MeshRate d = liquidation_mesh_rate(s);
  const double a = d.sqrt();
  const double T = grid.T();
  const double sum = s.rho_c + s.rho_d;
  LiquidationPaths p;
  const std::size_t n = grid.nodes();
  p.t.assign(grid.times().begin(), grid.times().end());
  p.U_bar.resize(n);
  p.K_c.resize(n);
  p.price_dev.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = T - grid[i];
    const double c = hyperbolic::cosh_ratio(a, tau, T);
    p.U_bar[i] = (1.0 - c) * s.xi_c / 2.0;
    p.K_c[i] = s.xi_c - s.rho_c / sum * c * s.xi_c;
    p.price_dev[i] = s.xi_c / sum * hyperbolic::sinh_cosh_ratio(a, tau, T) / a;
  }
  return p;
}

void validate(const DiffusiveScenario& s) {
  validate(as_liquidation(s));
  if (!(s.sigma_xi >= 0.0) || !std::isfinite(s.sigma_xi)) throw ConfigError("diffusive: sigma_xi must be >= 0");
  if (s.steps < 1) throw ConfigError("diffusive: need at least one step");
}

LiquidationScenario as_liquidation(const DiffusiveScenario& s) {
  return {s.lambda, s.rho_c, s.rho_d, s.T, 0.0, s.M};
}

DiffusivePath diffusive_simulate(const DiffusiveScenario& s, std::uint64_t path) {
  validate(s);
  const MeshRate d = liquidation_mesh_rate(as_liquidation(s));
  const Horizon grid = Horizon::uniform(s.T, s.steps);
  const std::size_t n = grid.nodes();
  const double rho_bar = 0.5 * (s.rho_c + s.rho_d);
  const double dealer_share = s.rho_d / (s.rho_c + s.rho_d);
  DiffusivePath p;
  p.t.assign(grid.times().begin(), grid.times().end());
  p.xi = brownian_path(grid, NoiseKey{s.seed, path});
  for (double& x : p.xi) x *= s.sigma_xi;
  p.K_c.assign(n, 0.0);
  p.gap.assign(n, 0.0);
  p.price_dev.assign(n, 0.0);
  double F = feedback_rate(d, 0.0, s.T);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = grid.step(i);
    const double dxi = p.xi[i + 1] - p.xi[i];
    p.K_c[i + 1] = p.K_c[i] + F * (p.xi[i] - p.K_c[i]) * h + dealer_share * dxi;
    p.gap[i + 1] = p.gap[i] - F * p.gap[i] * h + 0.5 * dxi;
    p.price_dev[i] = F * p.gap[i] / (d.value() * rho_bar);
    F = feedback_rate(d, grid[i + 1], s.T);
  }
  p.price_dev[n - 1] = F * p.gap[n - 1] / (d.value() * rho_bar);
  return p;
}

std::vector<double> martingale_increments(const DiffusivePath& p, MeshRate d) {
  const double T = p.t.back();
  std::vector<double> m(p.t.size() - 1);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double h = p.t[i + 1] - p.t[i];
    m[i] = (p.K_c[i + 1] - p.K_c[i]) - feedback_rate(d, p.t[i], T) * (p.xi[i] - p.K_c[i]) * h;
  }
  return m;
}

OuRegression ou_regression(const DiffusiveScenario& s, std::size_t paths, double t_max, Execution exec) {
  validate(s);
  if (paths == 0) throw ConfigError("ou_regression: need at least one path");
  using Moments = std::array<double, 6>;  // s11, s12, s22, s1y, s2y, count
  auto one = [&](std::size_t k) {
    const auto p = diffusive_simulate(s, k);
    Moments m{};
    for (std::size_t i = 0; i + 1 < p.t.size() && p.t[i] <= t_max; ++i) {
      const double x1 = p.price_dev[i] * (p.t[i + 1] - p.t[i]);
      const double x2 = p.xi[i + 1] - p.xi[i];
      const double y = p.price_dev[i + 1] - p.price_dev[i];
      m[0] += x1 * x1;
      m[1] += x1 * x2;
      m[2] += x2 * x2;
      m[3] += x1 * y;
      m[4] += x2 * y;
      m[5] += 1.0;
    }
    return m;
  };
  const auto per_path = evaluate_paths<Moments>(paths, one, exec);
  Moments tot{};
  std::vector<double> col(paths);
  for (std::size_t j = 0; j < tot.size(); ++j) {
    for (std::size_t k = 0; k < paths; ++k) col[k] = per_path[k][j];
    tot[j] = pairwise_sum(col);
  }
  const double det = tot[0] * tot[2] - tot[1] * tot[1];
  if (!(std::abs(det) > 0.0)) throw NumericalError("ou_regression: degenerate design (sigma_xi = 0?)");
  const double b1 = (tot[3] * tot[2] - tot[1] * tot[4]) / det;
  const double b2 = (tot[0] * tot[4] - tot[1] * tot[3]) / det;
  const MeshRate d = liquidation_mesh_rate(as_liquidation(s));
  const double rho_bar = 0.5 * (s.rho_c + s.rho_d);
  OuRegression r;
  r.mean_reversion = -b1;
  r.loading = b2;
  r.mean_reversion_theory = d.sqrt();
  r.loading_theory = 1.0 / (2.0 * rho_bar * d.sqrt());
  r.paths = paths;
  r.observations = static_cast<std::size_t>(tot[5]);
  return r;
}

namespace {

struct Asymptotic {
  double J_c;
  double J_c_int;
};

Asymptotic welfare_leading_order(const LiquidationScenario& s) {
  const double xi2 = s.xi_c * s.xi_c;
  const double sum = s.rho_c + s.rho_d;
  const double denom = 8.0 * std::pow(sum, 1.5);
  Asymptotic a{};
  if (s.M.is_infinite()) {
    a.J_c = -xi2 * std::sqrt(2.0 * s.lambda) * (3.0 * s.rho_c + 4.0 * s.rho_d) / denom;
    a.J_c_int = -xi2 * std::sqrt(s.lambda / 2.0) * (6.0 * s.rho_c + 8.0 * s.rho_d) / denom;
    return a;
  }
  const double M = s.M.value();
  a.J_c = -xi2 * std::sqrt(2.0 * s.lambda) * std::sqrt((M + 1.0) / M) * (3.0 * s.rho_c + 4.0 * s.rho_d) / denom;
  a.J_c_int = -xi2 * std::sqrt(s.lambda / (M * (1.0 + 2.0 * M))) *
              ((2.0 + 6.0 * M) * s.rho_c + (3.0 + 8.0 * M) * s.rho_d) / denom;
  return a;
}

}  // namespace

WelfareReport segmentation_welfare(const LiquidationScenario& s, std::size_t panels) {
  const double sum = s.rho_c + s.rho_d;
  const double rho_bar = 0.5 * sum;
  const double T = s.T;
  const double scale = -s.xi_c * s.xi_c / 4.0;

  const MeshRate dm = liquidation_mesh_rate(s, false);
  const double am = dm.sqrt();
  auto segmented = [&](double t) {
    const double c = hyperbolic::cosh_ratio(am, T - t, T);
    return 2.0 / rho_bar * c * (1.0 - s.rho_c / sum * c) + 2.0 * s.rho_c * c * c / (sum * sum);
  };

  const MeshRate d2 = liquidation_mesh_rate(s, true);
  const double a2 = d2.sqrt();
  auto integrated = [&](double t) {
    const double c = hyperbolic::cosh_ratio(a2, T - t, T);
    const double sh = hyperbolic::sinh_cosh_ratio(a2, T - t, T);
    return c / rho_bar * (1.0 + (s.rho_d - s.rho_c) / sum * c) + 2.0 * s.rho_c * c * c / (sum * sum) +
           s.lambda * d2.value() * sh * sh;
  };

  // The integrands vary on a scale 1/sqrt(Delta) near t = 0.
  WelfareReport r;
  r.J_c_segmented = scale * simpson_layered(segmented, 0.0, T, 30.0 / am, panels);
  r.J_c_integrated = scale * simpson_layered(integrated, 0.0, T, 30.0 / a2, panels);
  r.ratio = r.J_c_segmented / r.J_c_integrated;
  const auto lo = welfare_leading_order(s);
  r.asymptotic_J_c = lo.J_c;
  r.asymptotic_J_c_int = lo.J_c_int;
  r.asymptotic_ratio = lo.J_c / lo.J_c_int;
  return r;
}

RepresentativeComparison representative_dealer_check(const LiquidationScenario& s, std::size_t steps) {
  LiquidationScenario many = s;
  many.M = DealerCount::infinite();
  LiquidationScenario single = s;
  single.M = DealerCount::finite(1);
  single.lambda = 0.5 * s.lambda;

  RepresentativeComparison c;
  c.delta_infinite = liquidation_mesh_rate(many).value();
  c.delta_single_half = liquidation_mesh_rate(single).value();
  const Horizon grid = Horizon::uniform(s.T, steps);
  const auto a = liquidation_closed_form(many, grid);
  const auto b = liquidation_closed_form(single, grid);
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    c.max_path_gap = std::max({c.max_path_gap, std::abs(a.U_bar[i] - b.U_bar[i]), std::abs(a.K_c[i] - b.K_c[i]),
                               std::abs(a.price_dev[i] - b.price_dev[i])});
  }
  c.infinite = segmentation_welfare(many);
  c.single_half = segmentation_welfare(single);
  return c;
}

}  // namespace dealer

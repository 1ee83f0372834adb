#include "dealer/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "dealer/errors.hpp"
#include "dealer/quadrature.hpp"
#include "dealer/regression.hpp"
#include "dealer/sim_paths.hpp"

namespace dealer {

namespace {

constexpr std::size_t kMaxSteps = 1000000;

// (1 - e^{-k T}) / k, continuous at k = 0.
double decay_integral(double k, double T) { return k > 0.0 ? -std::expm1(-k * T) / k : T; }

double ou_second_moment_integral(const OrnsteinUhlenbeckDemand& o, double T) {
  const double d = o.x0 - o.theta;
  double v = o.theta * o.theta * T + 2.0 * o.theta * d * decay_integral(o.kappa, T) +
             d * d * decay_integral(2.0 * o.kappa, T);
  const double s2 = o.sigma * o.sigma;
  if (o.kappa * T < 1e-8) v += s2 * T * T / 2.0;
  else v += s2 / (2.0 * o.kappa) * (T - decay_integral(2.0 * o.kappa, T));
  return v;
}

double cost_scale(const DealerPanel& p) { return p.lambda * (p.M + 1.0) / p.M; }

// Per-thread scratch so that long paths do not hit the allocator per path.
struct Workspace {
  std::vector<double> normals;
  RealizedPath x;
  FbsdePath fb;
  NoiseKey key{};
  double T = 0.0;
};

// With `fresh` false the previous realized path of this thread is reused when
// it was drawn for the same key on a grid of the same shape; callers also
// guarantee the demand is the same.
Workspace& realize(const DemandProcess& demand, const Horizon& grid, NoiseKey key, const ForwardSolver& solver,
                   bool fresh) {
  thread_local Workspace w;
  const bool same = w.x.level.size() == grid.nodes() && w.T == grid.T() && w.key.seed == key.seed &&
                    w.key.path == key.path;
  if (fresh || !same) {
    w.key = key;
    w.T = grid.T();
    w.normals.resize(grid.steps());
    if (!is_deterministic(demand)) fill_standard_normals(key, w.normals);
    generate(demand, grid, w.normals, w.x);
  }
  solver.solve(w.x, w.fb);
  return w;
}

}  // namespace

MarketParams panel_market(const DealerPanel& panel, const DemandProcess& noise, const Horizon& grid) {
  if (panel.M < 1) throw ConfigError("dealer panel needs at least one dealer");
  MarketParams p;
  p.horizon = grid;
  p.lambda = panel.lambda;
  p.noise_demand = noise;
  for (unsigned i = 0; i < panel.M; ++i)
    p.agents.push_back({"dealer" + std::to_string(i + 1), 1.0 / panel.M, panel.rho_d, AccessCost(0.0), ZeroDemand{}});
  return p;
}

MeshRate panel_mesh_rate(const DealerPanel& panel) {
  return aggregate(panel_market(panel, ZeroDemand{}, Horizon::uniform(1.0, 1))).delta;
}

std::size_t panel_steps(const DealerPanel& panel, double T, std::size_t min_steps) {
  const double want = std::ceil(50.0 * panel_mesh_rate(panel).sqrt() * T);
  const std::size_t layer = want >= static_cast<double>(kMaxSteps) ? kMaxSteps : static_cast<std::size_t>(want);
  return std::min(kMaxSteps, std::max(min_steps, layer));
}

double liquidity_cost(const DealerPanel& panel, std::span<const double> K_N, std::span<const double> u_bar) {
  if (K_N.size() != u_bar.size()) throw DomainError("liquidity_cost: paths live on different grids");
  return -cost_scale(panel) * discrete_integral(K_N, u_bar, IntegralMode::against_increments);
}

double liquidity_cost_direct(const DealerPanel& panel, std::span<const double> t, std::span<const double> rate,
                             std::span<const double> u_bar) {
  std::vector<double> f(t.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rate[i] * u_bar[i];
  return cost_scale(panel) * trapezoid(t, f);
}

double demand_energy(DemandFamily family, const DemandProcess& demand, double T) {
  if (family == DemandFamily::diffusive) {
    if (const auto* b = std::get_if<BrownianDemand>(&demand)) return b->sigma * b->sigma * T;
    if (const auto* o = std::get_if<OrnsteinUhlenbeckDemand>(&demand)) return o->sigma * o->sigma * T;
    throw ConfigError("diffusive family needs a Brownian or OU demand");
  }
  const auto* s = std::get_if<SmoothRateDemand>(&demand);
  if (!s) throw ConfigError("smooth family needs a smooth-rate demand");
  if (std::holds_alternative<ZeroDemand>(s->rate)) return 0.0;
  if (const auto* c = std::get_if<ConstantDemand>(&s->rate)) return c->level * c->level * T;
  if (const auto* b = std::get_if<BrownianDemand>(&s->rate))
    return b->x0 * b->x0 * T + b->sigma * b->sigma * T * T / 2.0;
  if (const auto* o = std::get_if<OrnsteinUhlenbeckDemand>(&s->rate)) return ou_second_moment_integral(*o, T);
  throw ConfigError("no closed-form energy for sampled rates");
}

SampleMoments sample_moments(std::span<const double> v) {
  SampleMoments m;
  if (v.empty()) return m;
  const double n = static_cast<double>(v.size());
  m.mean = pairwise_sum(v) / n;
  if (v.size() > 1) {
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m.mean) * (v[i] - m.mean);
    m.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return m;
}

PathKernel::PathKernel(const DealerPanel& p, const DemandProcess& d, const Horizon& grid)
    : panel(p), demand(d), solver(d, aggregate(panel_market(p, d, grid)).delta, grid) {}

double PathKernel::cost(NoiseKey key, bool fresh) const {
  const auto& w = realize(demand, solver.grid(), key, solver, fresh);
  return liquidity_cost(panel, w.x.level, w.fb.u);
}

double PathKernel::tracking(NoiseKey key) const {
  const auto& w = realize(demand, solver.grid(), key, solver, true);
  const auto t = solver.grid().times();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double a = w.x.level[i] - w.fb.U[i];
    const double b = w.x.level[i + 1] - w.fb.U[i + 1];
    s += 0.5 * (t[i + 1] - t[i]) * (a * a + b * b);
  }
  return s;
}

namespace {

template <class Stat>
SampleMoments monte_carlo(const ScalingConfig& c, const PathKernel& kernel, Stat stat, Execution exec,
                          std::size_t& used) {
  used = is_deterministic(c.demand) ? 1 : c.paths;
  const auto values =
      evaluate_paths<double>(used, [&](std::size_t k) { return stat(kernel, NoiseKey{c.seed, k}); }, exec);
  return sample_moments(values);
}

void check_config(const ScalingConfig& c) {
  if (c.lambdas.size() < 2) throw ConfigError("scaling study needs at least two lambda values");
  for (double l : c.lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("lambda values must be positive");
  if (c.paths < 2 && !is_deterministic(c.demand)) throw ConfigError("need at least two Monte Carlo paths");
  if (!(c.rho_d > 0.0) || !(c.T > 0.0)) throw ConfigError("rho_d and T must be positive");
  if (auto e = check_demand(c.demand); !e.empty()) throw ConfigError(e);
}

}  // namespace

std::vector<LiquidityCostReport> scaling_studies(const ScalingConfig& c, const std::vector<PanelChoice>& panels,
                                                 Execution exec) {
  check_config(c);
  if (panels.empty()) throw ConfigError("scaling study needs at least one dealer panel");
  for (const auto& p : panels)
    if (p.M < 1 || !(p.rho_d > 0.0)) throw ConfigError("dealer panels need M >= 1 and rho_d > 0");
  const double energy = demand_energy(c.family, c.demand, c.T);
  const bool smooth = c.family == DemandFamily::smooth;
  const std::size_t P = panels.size();

  std::vector<LiquidityCostReport> reports(P);
  for (std::size_t k = 0; k < P; ++k) {
    reports[k].family = smooth ? "smooth" : "diffusive";
    reports[k].M = panels[k].M;
    reports[k].rho_d = panels[k].rho_d;
  }
  for (double lambda : c.lambdas) {
    std::size_t steps = 0;
    for (const auto& p : panels) steps = std::max(steps, panel_steps({p.M, p.rho_d, lambda}, c.T, c.min_steps));
    const Horizon grid = Horizon::uniform(c.T, steps);
    std::vector<PathKernel> kernels;
    kernels.reserve(P);
    for (const auto& p : panels) kernels.emplace_back(DealerPanel{p.M, p.rho_d, lambda}, c.demand, grid);

    const std::size_t used = is_deterministic(c.demand) ? 1 : c.paths;
    const auto per_path = evaluate_paths<std::vector<double>>(
        used,
        [&](std::size_t j) {
          std::vector<double> costs(P);
          for (std::size_t k = 0; k < P; ++k) costs[k] = kernels[k].cost(NoiseKey{c.seed, j}, k == 0);
          return costs;
        },
        exec);
    std::vector<double> column(used);
    for (std::size_t k = 0; k < P; ++k) {
      for (std::size_t j = 0; j < used; ++j) column[j] = per_path[j][k];
      const auto m = sample_moments(column);
      if (!(m.mean > 0.0)) throw NumericalError("liquidity cost estimate is not positive; cannot fit a power law");
      reports[k].estimates.push_back({lambda, m.mean, m.std_error, used, steps});
    }
  }

  for (std::size_t k = 0; k < P; ++k) {
    auto& r = reports[k];
    std::vector<double> x, y;
    for (const auto& e : r.estimates) {
      x.push_back(std::log(e.lambda));
      y.push_back(std::log(e.mean));
    }
    const auto fit = fit_line(x, y);
    r.slope = fit.slope;
    std::tie(r.slope_ci_low, r.slope_ci_high) = fit.slope_ci();
    const auto smallest = *std::min_element(r.estimates.begin(), r.estimates.end(),
                                            [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
    const double unit = smooth ? smallest.lambda : std::sqrt(smallest.lambda);
    r.prefactor = smallest.mean / unit;
    r.prefactor_se = smallest.std_error / unit;
    const double ratio = (r.M + 1.0) / r.M;
    r.prefactor_theory = smooth ? ratio * energy : std::sqrt(ratio / r.rho_d) * energy;
    if (smallest.std_error > 0.1 * smallest.mean)
      r.warnings.push_back("standard error at the smallest lambda exceeds 10% of the mean; increase the path count");
  }
  return reports;
}

LiquidityCostReport scaling_study(const ScalingConfig& c, Execution exec) {
  return scaling_studies(c, {{c.M, c.rho_d}}, exec).front();
}

MonotoneReport convergence_check(const ScalingConfig& c, Execution exec) {
  check_config(c);
  MonotoneReport r;
  for (double lambda : c.lambdas) {
    const DealerPanel panel{c.M, c.rho_d, lambda};
    const std::size_t steps = panel_steps(panel, c.T, c.min_steps);
    const PathKernel kernel(panel, c.demand, Horizon::uniform(c.T, steps));
    std::size_t used = 0;
    const auto m =
        monte_carlo(c, kernel, [](const PathKernel& k, NoiseKey key) { return k.tracking(key); }, exec, used);
    r.estimates.push_back({lambda, m.mean, m.std_error, steps});
  }
  for (std::size_t i = 1; i < r.estimates.size(); ++i) {
    const auto& a = r.estimates[i - 1];
    const auto& b = r.estimates[i];
    const double band = 2.0 * std::hypot(a.std_error, b.std_error);
    if (b.mean > a.mean + band) r.decreasing = false;
  }
  const double last = r.estimates.back().mean;
  r.reduction = last > 0.0 ? r.estimates.front().mean / last : 0.0;
  return r;
}

}  // namespace dealer

#include "dealer/fbsde.hpp"

#include <cmath>

#include "dealer/errors.hpp"

namespace dealer {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Closed-form pieces for an exponentially decaying conditional mean
// e^{-kappa (s - t)} over tau = T - t:
//   cosh_part = int_t^T k(t,s) e^{-kappa(s-t)} ds
//   sinh_part = int_t^T a sinh(a(T-s)) e^{-kappa(s-t)} ds / cosh(a tau)
struct DecayPieces {
  double cosh_part;
  double sinh_part;
  bool resonance;
};

DecayPieces decay_pieces(MeshRate d, double kappa, double tau) {
  const double a = d.sqrt();
  const double base = -std::expm1(-(a + kappa) * tau) / (a + kappa);
  const double tail = std::exp(-2.0 * a * tau);
  double r = 0.0;
  bool resonance = false;
  if (std::abs(kappa * kappa - d.value()) < kResonanceBand * d.value()) {
    // r = e^{-2 a tau} expm1(x)/(a - kappa) with x = (a - kappa) tau, expanded in x
    const double x = (a - kappa) * tau;
    r = tail * tau * (1.0 + x / 2.0 + x * x / 6.0);
    resonance = true;
  } else if ((a - kappa) * tau < 700.0) {
    r = tail * std::expm1((a - kappa) * tau) / (a - kappa);
  } else {
    r = (std::exp(-(a + kappa) * tau) - tail) / (a - kappa);
  }
  const double denom = 1.0 + tail;
  return {d.value() * (base + r) / denom, a * (base - r) / denom, resonance};
}

// 1 - sech(a tau) without cancellation for small tau.
double one_minus_sech(double a, double tau) {
  const double e = std::exp(-a * tau);
  const double m = -std::expm1(-a * tau);
  return m * m / (1.0 + e * e);
}

struct NodeCoefficients {
  double level = 0.0;
  double rate = 0.0;
  double offset = 0.0;
  bool resonance = false;
};

[[noreturn]] void needs_path() {
  throw DomainError("sampled demands need a realized path; use ForwardSolver or sampled_kernel_integral");
}

NodeCoefficients rate_coefficients(const RateProcess& r, MeshRate d, double tau) {
  const double a = d.sqrt();
  return std::visit(overloaded{
                        [](const ZeroDemand&) { return NodeCoefficients{}; },
                        [&](const ConstantDemand& c) { return NodeCoefficients{0.0, 0.0, c.level * one_minus_sech(a, tau)}; },
                        [](const SampledDemand&) -> NodeCoefficients { needs_path(); },
                        [&](const BrownianDemand&) { return NodeCoefficients{0.0, one_minus_sech(a, tau), 0.0}; },
                        [&](const OrnsteinUhlenbeckDemand& o) {
                          const auto p = decay_pieces(d, o.kappa, tau);
                          return NodeCoefficients{0.0, p.sinh_part, o.theta * (one_minus_sech(a, tau) - p.sinh_part),
                                                  p.resonance};
                        },
                    },
                    r);
}

NodeCoefficients coefficients(const DemandProcess& x, MeshRate d, double t, double T) {
  const double tau = T - t;
  const double F = feedback_rate(d, t, T);
  return std::visit(overloaded{
                        [](const ZeroDemand&) { return NodeCoefficients{}; },
                        [&](const ConstantDemand& c) { return NodeCoefficients{0.0, 0.0, c.level * F}; },
                        [](const SampledDemand&) -> NodeCoefficients { needs_path(); },
                        [&](const BrownianDemand&) { return NodeCoefficients{F, 0.0, 0.0}; },
                        [&](const OrnsteinUhlenbeckDemand& o) {
                          const auto p = decay_pieces(d, o.kappa, tau);
                          return NodeCoefficients{p.cosh_part, 0.0, o.theta * (F - p.cosh_part), p.resonance};
                        },
                        [&](const SmoothRateDemand& s) {
                          auto c = rate_coefficients(s.rate, d, tau);
                          c.level = F;
                          return c;
                        },
                    },
                    x);
}

bool is_sampled(const DemandProcess& x) {
  if (std::holds_alternative<SampledDemand>(x)) return true;
  if (const auto* s = std::get_if<SmoothRateDemand>(&x)) return std::holds_alternative<SampledDemand>(s->rate);
  return false;
}

// phi(x) = 1 - e^{-x}(1 + x)
double phi1(double x) {
  if (x < 1e-3) return x * x * (0.5 - x * (1.0 / 3.0 - x * (0.125 - x / 30.0)));
  return -std::expm1(-x) - x * std::exp(-x);
}

}  // namespace

KernelIntegral conditional_kernel_integral(const DemandProcess& x, MeshRate d, double t, double T,
                                           ProcessState state) {
  const auto c = coefficients(x, d, t, T);
  return {c.level * state.level + c.rate * state.rate + c.offset, c.resonance};
}

std::vector<double> sampled_kernel_integral(std::span<const double> samples, MeshRate d, const Horizon& grid) {
  const std::size_t n = grid.nodes();
  if (samples.size() != n) throw DomainError("sampled driver does not match grid");
  const double a = d.sqrt();
  const double T = grid.T();
  std::vector<double> g(n, 0.0);
  double P = 0.0, Q = 0.0;
  for (std::size_t k = n - 1; k-- > 0;) {
    const double h = grid.step(k);
    const double x = a * h;
    const double decay = std::exp(-x);
    const double e0 = -std::expm1(-x) / a;
    const double e1_over_h = phi1(x) / (a * x);  // (1/h) int_0^h r e^{-a r} dr
    const double slope = samples[k + 1] - samples[k];
    const double tau_k = T - grid[k], tau_k1 = T - grid[k + 1];
    P = decay * P + samples[k] * e0 + slope * e1_over_h;
    Q = decay * Q + std::exp(-a * (tau_k + tau_k1)) * (samples[k + 1] * e0 - slope * e1_over_h);
    g[k] = d.value() * (P + Q) / (1.0 + std::exp(-2.0 * a * tau_k));
  }
  return g;
}

ForwardSolver::ForwardSolver(DemandProcess x, MeshRate d, Horizon grid)
    : x_(std::move(x)), delta_(d), grid_(std::move(grid)) {
  if (auto e = check_demand(x_, grid_.nodes()); !e.empty()) throw DomainError(e);
  const std::size_t n = grid_.nodes();
  const double T = grid_.T();
  feedback_.resize(n);
  for (std::size_t i = 0; i < n; ++i) feedback_[i] = feedback_rate(d, grid_[i], T);
  level_coef_.assign(n, 0.0);
  rate_coef_.assign(n, 0.0);
  offset_.assign(n, 0.0);
  deterministic_ = is_deterministic(x_);
  if (is_sampled(x_)) {
    fixed_path_ = generate(x_, grid_, NoiseKey{});
    offset_ = sampled_kernel_integral(fixed_path_.level, d, grid_);
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = coefficients(x_, d, grid_[i], T);
    level_coef_[i] = c.level;
    rate_coef_[i] = c.rate;
    offset_[i] = c.offset;
    resonance_ = resonance_ || c.resonance;
  }
  if (deterministic_) fixed_path_ = generate(x_, grid_, NoiseKey{});
}

std::vector<double> ForwardSolver::driver_integral(const RealizedPath& path) const {
  const std::size_t n = grid_.nodes();
  if (path.level.size() != n) throw DomainError("realized path does not match solver grid");
  const bool has_rate = !path.rate.empty();
  if (has_rate && path.rate.size() != n) throw DomainError("realized rate path does not match solver grid");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = level_coef_[i] * path.level[i] + (has_rate ? rate_coef_[i] * path.rate[i] : 0.0) + offset_[i];
  return g;
}

FbsdePath ForwardSolver::solve() const {
  if (!deterministic_) throw DomainError("stochastic driver needs a realized path");
  return solve(fixed_path_);
}

FbsdePath ForwardSolver::solve(const RealizedPath& path) const {
  FbsdePath out;
  solve(path, out);
  return out;
}

void ForwardSolver::solve(const RealizedPath& path, FbsdePath& out) const {
  const std::size_t n = grid_.nodes();
  if (path.level.size() != n) throw DomainError("realized path does not match solver grid");
  const bool has_rate = !path.rate.empty();
  if (has_rate && path.rate.size() != n) throw DomainError("realized rate path does not match solver grid");
  auto G = [&](std::size_t i) {
    return level_coef_[i] * path.level[i] + (has_rate ? rate_coef_[i] * path.rate[i] : 0.0) + offset_[i];
  };
  out.t.assign(grid_.times().begin(), grid_.times().end());
  out.X.assign(path.level.begin(), path.level.end());
  out.U.resize(n);
  out.u.resize(n);
  out.deterministic = deterministic_;
  out.U[0] = 0.0;
  const auto& F = feedback_;
  double g0 = G(0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = grid_.step(i);
    const double g1 = G(i + 1);
    const double f0 = g0 - F[i] * out.U[i];
    const double predictor = out.U[i] + h * f0;
    const double f1 = g1 - F[i + 1] * predictor;
    out.u[i] = f0;
    out.U[i + 1] = out.U[i] + 0.5 * h * (f0 + f1);
    g0 = g1;
  }
  out.u[n - 1] = g0 - F[n - 1] * out.U[n - 1];
}

FbsdePath solve_forward(const DemandProcess& x, MeshRate d, const Horizon& grid) {
  return ForwardSolver(x, d, grid).solve();
}

FbsdePath solve_forward(const DemandProcess& x, MeshRate d, const Horizon& grid, const RealizedPath& path) {
  return ForwardSolver(x, d, grid).solve(path);
}

FbsdeResidual fbsde_residual(const FbsdePath& p, MeshRate d) {
  if (!p.deterministic) throw DomainError("fbsde_residual: stochastic drivers carry martingale increments");
  FbsdeResidual r;
  const std::size_t n = p.t.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h = p.t[i + 1] - p.t[i];
    const double drift = (p.u[i + 1] - p.u[i]) / h / d.value();
    r.max_drift = std::max(r.max_drift, std::abs(drift - (p.U[i] - p.X[i])));
  }
  r.terminal = std::abs(p.u[n - 1]);
  return r;
}

}  // namespace dealer

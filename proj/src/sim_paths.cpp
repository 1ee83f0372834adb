#include "dealer/sim_paths.hpp"

#include <cmath>

#include "dealer/errors.hpp"
#include "dealer/philox.hpp"

namespace dealer {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Uniform in (0, 1) from 53 random bits.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

// Marsaglia polar method. Candidate pairs for block b come from Philox
// counters (b, attempt, path), so the accepted pair is still a pure function
// of (seed, path, block). The attempt index lives in the top byte of the
// second counter word, which leaves 56 bits for the block index.
inline std::array<double, 2> normal_pair(NoiseKey key, std::uint64_t block) {
  const Philox4x32::Key k{static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)};
  const auto hi = static_cast<std::uint32_t>(block >> 32) & 0x00FFFFFFu;
  for (std::uint32_t attempt = 0;; ++attempt) {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block), hi | (attempt << 24),
                                  static_cast<std::uint32_t>(key.path), static_cast<std::uint32_t>(key.path >> 32)};
    const auto w = Philox4x32::generate(ctr, k);
    const double v1 = 2.0 * to_open_unit(w[0], w[1]) - 1.0;
    const double v2 = 2.0 * to_open_unit(w[2], w[3]) - 1.0;
    const double s = v1 * v1 + v2 * v2;
    if (s < 1.0 && s > 0.0) {
      const double f = std::sqrt(-2.0 * std::log(s) / s);
      return {v1 * f, v2 * f};
    }
    if (attempt == 255) return {0.0, 0.0};  // probability below 1e-170
  }
}

void check_normals(const Horizon& grid, std::span<const double> normals) {
  if (normals.size() < grid.steps()) throw DomainError("not enough Gaussian draws for the grid");
}

std::vector<double> brownian_from_normals(const Horizon& grid, std::span<const double> z) {
  std::vector<double> w(grid.nodes(), 0.0);
  double h = -1.0, root = 0.0;
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    if (grid.step(i) != h) {
      h = grid.step(i);
      root = std::sqrt(h);
    }
    w[i + 1] = w[i] + root * z[i];
  }
  return w;
}

void ou_from_normals(const OrnsteinUhlenbeckDemand& o, const Horizon& grid, std::span<const double> z,
                     std::vector<double>& x) {
  x.resize(grid.nodes());
  x[0] = o.x0;
  double h = -1.0, decay = 0.0, sd = 0.0;
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    if (grid.step(i) != h) {  // uniform grids compute the transition once
      h = grid.step(i);
      decay = std::exp(-o.kappa * h);
      // sqrt((1 - e^{-2 kappa h}) / (2 kappa)), reducing to sqrt(h) at kappa = 0
      sd = o.kappa > 0.0 ? std::sqrt(-std::expm1(-2.0 * o.kappa * h) / (2.0 * o.kappa)) : std::sqrt(h);
    }
    const double shock = o.sigma != 0.0 ? o.sigma * sd * z[i] : 0.0;
    x[i + 1] = o.theta + (x[i] - o.theta) * decay + shock;
  }
}

void level_path(const RateProcess& r, const Horizon& grid, std::span<const double> z, std::vector<double>& x) {
  const std::size_t n = grid.nodes();
  std::visit(overloaded{
                 [&](const ZeroDemand&) { x.assign(n, 0.0); },
                 [&](const ConstantDemand& c) { x.assign(n, c.level); },
                 [&](const SampledDemand& s) {
                   if (s.values.size() != n) throw DomainError("sampled demand does not match grid");
                   x.assign(s.values.begin(), s.values.end());
                 },
                 [&](const BrownianDemand& b) {
                   x.resize(n);
                   x[0] = b.x0;
                   if (b.sigma == 0.0) {
                     x.assign(n, b.x0);
                     return;
                   }
                   check_normals(grid, z);
                   double h = -1.0, scale = 0.0;
                   for (std::size_t i = 0; i < grid.steps(); ++i) {
                     if (grid.step(i) != h) {
                       h = grid.step(i);
                       scale = b.sigma * std::sqrt(h);
                     }
                     x[i + 1] = x[i] + scale * z[i];
                   }
                 },
                 [&](const OrnsteinUhlenbeckDemand& o) {
                   if (o.sigma != 0.0) check_normals(grid, z);
                   ou_from_normals(o, grid, z, x);
                 },
             },
             r);
}

bool needs_noise(const DemandProcess& d) { return !is_deterministic(d); }

}  // namespace

double standard_normal(NoiseKey key, std::uint64_t step) { return normal_pair(key, step >> 1)[step & 1]; }

void fill_standard_normals(NoiseKey key, std::span<double> out) {
  const std::size_t n = out.size();
  std::size_t i = 0;
  for (std::uint64_t block = 0; i + 1 < n; ++block, i += 2) {
    const auto p = normal_pair(key, block);
    out[i] = p[0];
    out[i + 1] = p[1];
  }
  if (i < n) out[i] = normal_pair(key, i >> 1)[0];
}

std::vector<double> brownian_path(const Horizon& grid, NoiseKey key) {
  std::vector<double> z(grid.steps());
  fill_standard_normals(key, z);
  return brownian_from_normals(grid, z);
}

void generate(const DemandProcess& demand, const Horizon& grid, std::span<const double> normals, RealizedPath& out) {
  if (needs_noise(demand)) check_normals(grid, normals);
  if (const auto* s = std::get_if<SmoothRateDemand>(&demand)) {
    level_path(s->rate, grid, normals, out.rate);
    out.level.assign(grid.nodes(), 0.0);
    for (std::size_t i = 0; i < grid.steps(); ++i)
      out.level[i + 1] = out.level[i] + 0.5 * grid.step(i) * (out.rate[i] + out.rate[i + 1]);
    return;
  }
  out.rate.clear();
  std::visit(overloaded{
                 [](const SmoothRateDemand&) {},
                 [&](const auto& v) { level_path(RateProcess{v}, grid, normals, out.level); },
             },
             demand);
}

RealizedPath generate(const DemandProcess& demand, const Horizon& grid, std::span<const double> normals) {
  RealizedPath out;
  generate(demand, grid, normals, out);
  return out;
}

RealizedPath generate(const DemandProcess& demand, const Horizon& grid, NoiseKey key) {
  std::vector<double> z;
  if (needs_noise(demand)) {
    z.resize(grid.steps());
    fill_standard_normals(key, z);
  }
  return generate(demand, grid, std::span<const double>(z));
}

double discrete_integral(std::span<const double> h, std::span<const double> x, IntegralMode mode) {
  if (h.size() != x.size()) throw DomainError("discrete_integral: paths live on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double dx = x[i + 1] - x[i];
    s += (mode == IntegralMode::against_increments ? h[i] : h[i + 1] - h[i]) * dx;
  }
  return s;
}

}  // namespace dealer

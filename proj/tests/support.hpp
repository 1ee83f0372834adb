#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "dealer/demand.hpp"
#include "dealer/market_model.hpp"

namespace testing {

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Asymptotic Kolmogorov distribution tail P(K > x).
inline double kolmogorov_tail(double x) {
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

// Tail probability with the Stephens small-sample correction, n the effective size.
inline double ks_p_value(double d, double n) {
  const double sn = std::sqrt(n);
  return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

template <class Cdf>
double ks_one_sample(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return ks_p_value(d, n);
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return ks_p_value(d, na * nb / (na + nb));
}

// Random market with 2..5 agents, mixed idiosyncratic costs (some without
// access) and deterministic targets. Every seed yields a valid market.
inline dealer::MarketParams random_market(std::uint64_t seed, std::size_t steps = 2000) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  dealer::MarketParams p;
  p.horizon = dealer::Horizon::uniform(between(0.5, 2.0), steps);
  p.lambda = between(0.01, 0.5);
  const auto& grid = p.horizon;

  const bool smooth = unit(rng) < 0.25;  // smooth-rate targets do not mix with levels
  auto sampled = [&] {
    const double a = between(-1, 1), b = between(-1, 1), w = between(0.5, 6.0), c = between(-0.5, 0.5);
    dealer::SampledDemand s;
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      const double t = grid[i] / grid.T();
      s.values.push_back(a + b * std::sin(w * t) + c * t * t);
    }
    return s;
  };
  auto target = [&]() -> dealer::DemandProcess {
    const double u = unit(rng);
    if (u < 0.2) return dealer::ZeroDemand{};
    if (smooth) {
      if (u < 0.6) return dealer::SmoothRateDemand{dealer::ConstantDemand{between(-2, 2)}};
      return dealer::SmoothRateDemand{sampled()};
    }
    if (u < 0.6) return dealer::ConstantDemand{between(-2, 2)};
    return sampled();
  };

  const int n = 2 + static_cast<int>(rng() % 4);
  for (int k = 0; k < n; ++k) {
    dealer::AgentSpec a;
    a.id = "a" + std::to_string(k);
    a.mass = between(0.1, 1.0);
    a.risk_tolerance = between(0.05, 0.5);
    const double u = unit(rng);
    if (k == 0 || u < 0.3)
      a.access_cost = dealer::AccessCost(0.0);
    else if (u < 0.65)
      a.access_cost = dealer::AccessCost(between(0.01, 1.0));
    else
      a.access_cost = dealer::AccessCost::no_access();
    a.target = target();
    p.agents.push_back(a);
  }
  p.noise_demand = target();
  return p;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("dealerlab_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A CSV report: '#' provenance lines, one header line, numeric rows.
struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  }
};

inline Csv read_csv(const std::filesystem::path& p) {
  Csv csv;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] == '#') {
      csv.comments.push_back(line);
      continue;
    }
    std::stringstream ss(line);
    std::vector<std::string> cells;
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (csv.header.empty()) {
      csv.header = cells;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(std::stod(c));
    csv.rows.push_back(row);
  }
  return csv;
}

}  // namespace testing

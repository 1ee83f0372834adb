#pragma once

#include <string>
#include <variant>
#include <vector>

namespace dealer {

// Supported demand processes (trading targets and noise-trader demand). All
// stochastic kinds within one market are driven by the same Brownian motion W,
// which is what makes linear combinations of them closed under the family.

struct ZeroDemand {
  bool operator==(const ZeroDemand&) const = default;
};

struct ConstantDemand {
  double level = 0.0;
  bool operator==(const ConstantDemand&) const = default;
};

/// Deterministic function sampled on the horizon grid (one value per node).
struct SampledDemand {
  std::vector<double> values;
  bool operator==(const SampledDemand&) const = default;
};

/// X_t = x0 + sigma W_t.
struct BrownianDemand {
  double x0 = 0.0;
  double sigma = 1.0;
  bool operator==(const BrownianDemand&) const = default;
};

/// dX = kappa (theta - X) dt + sigma dW, X_0 = x0.
struct OrnsteinUhlenbeckDemand {
  double x0 = 0.0;
  double kappa = 1.0;
  double theta = 0.0;
  double sigma = 1.0;
  bool operator==(const OrnsteinUhlenbeckDemand&) const = default;
};

using RateProcess = std::variant<ZeroDemand, ConstantDemand, SampledDemand, BrownianDemand, OrnsteinUhlenbeckDemand>;

/// X_t = integral_0^t r_s ds for a rate process r. Nesting depth is one by type.
struct SmoothRateDemand {
  RateProcess rate;
  bool operator==(const SmoothRateDemand&) const = default;
};

using DemandProcess = std::variant<ZeroDemand, ConstantDemand, SampledDemand, BrownianDemand,
                                   OrnsteinUhlenbeckDemand, SmoothRateDemand>;

/// True when realized paths do not depend on the Brownian driver.
bool is_deterministic(const DemandProcess& x);
bool is_zero(const DemandProcess& x);

/// Kind-level invariants (sigma >= 0, kappa >= 0, finite parameters; sample
/// length when `nodes` is nonzero). Returns an empty string when valid.
std::string check_demand(const DemandProcess& x, std::size_t nodes = 0);

/// Linear combination wa*a + wb*b, pathwise under the shared-driver
/// convention. Zero is the identity and a constant folds into any kind that
/// carries a level. Throws ConfigError for combinations without a closed form
/// in the family (e.g. OU processes with different mean-reversion speeds).
DemandProcess combine(const DemandProcess& a, double wa, const DemandProcess& b, double wb);

/// Compact textual form, e.g. "ou(0,1,0,1)". Round-trips through
/// parse_demand for every kind except sampled demands.
std::string describe(const DemandProcess& x);

/// Parses zero | constant(c) | brownian(x0,sigma) | ou(x0,kappa,theta,sigma)
/// | smooth(<rate>). Throws ConfigError on malformed input.
DemandProcess parse_demand(const std::string& text);

}  // namespace dealer

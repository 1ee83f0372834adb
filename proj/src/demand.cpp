#include "dealer/demand.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "dealer/errors.hpp"

namespace dealer {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

DemandProcess lift(const RateProcess& r) {
  return std::visit([](const auto& v) -> DemandProcess { return v; }, r);
}

RateProcess lower(const DemandProcess& x) {
  return std::visit(overloaded{[](const SmoothRateDemand&) -> RateProcess {
                                 throw ConfigError("nested smooth-rate demand is not supported");
                               },
                               [](const auto& v) -> RateProcess { return v; }},
                    x);
}

DemandProcess scale(const DemandProcess& x, double w) {
  if (w == 0.0) return ZeroDemand{};
  return std::visit(
      overloaded{
          [](const ZeroDemand&) -> DemandProcess { return ZeroDemand{}; },
          [w](const ConstantDemand& c) -> DemandProcess { return ConstantDemand{w * c.level}; },
          [w](const SampledDemand& s) -> DemandProcess {
            SampledDemand out = s;
            for (double& v : out.values) v *= w;
            return out;
          },
          [w](const BrownianDemand& b) -> DemandProcess {
            if (w < 0.0 && b.sigma != 0.0) throw ConfigError("negative weight on a Brownian demand");
            return BrownianDemand{w * b.x0, w * b.sigma};
          },
          [w](const OrnsteinUhlenbeckDemand& o) -> DemandProcess {
            if (w < 0.0 && o.sigma != 0.0) throw ConfigError("negative weight on an OU demand");
            return OrnsteinUhlenbeckDemand{w * o.x0, o.kappa, w * o.theta, w * o.sigma};
          },
          [w](const SmoothRateDemand& s) -> DemandProcess { return SmoothRateDemand{lower(scale(lift(s.rate), w))}; },
      },
      x);
}

[[noreturn]] void incompatible(const DemandProcess& a, const DemandProcess& b) {
  throw ConfigError("demand kinds cannot be combined in closed form: " + describe(a) + " + " + describe(b));
}

DemandProcess add_const(const DemandProcess& x, double c) {
  return std::visit(overloaded{
                        [c](const ZeroDemand&) -> DemandProcess { return ConstantDemand{c}; },
                        [c](const ConstantDemand& k) -> DemandProcess { return ConstantDemand{k.level + c}; },
                        [c](const SampledDemand& s) -> DemandProcess {
                          SampledDemand out = s;
                          for (double& v : out.values) v += c;
                          return out;
                        },
                        [c](const BrownianDemand& b) -> DemandProcess { return BrownianDemand{b.x0 + c, b.sigma}; },
                        [c](const OrnsteinUhlenbeckDemand& o) -> DemandProcess {
                          return OrnsteinUhlenbeckDemand{o.x0 + c, o.kappa, o.theta + c, o.sigma};
                        },
                        [&x, c](const SmoothRateDemand&) -> DemandProcess { incompatible(x, ConstantDemand{c}); },
                    },
                    x);
}

DemandProcess add(const DemandProcess& a, const DemandProcess& b) {
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  if (auto* c = std::get_if<ConstantDemand>(&b)) return add_const(a, c->level);
  if (auto* c = std::get_if<ConstantDemand>(&a)) return add_const(b, c->level);
  if (a.index() != b.index()) incompatible(a, b);
  return std::visit(
      overloaded{
          [&](const SampledDemand& x) -> DemandProcess {
            const auto& y = std::get<SampledDemand>(b);
            if (x.values.size() != y.values.size()) throw ConfigError("sampled demands have different lengths");
            SampledDemand out = x;
            for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += y.values[i];
            return out;
          },
          [&](const BrownianDemand& x) -> DemandProcess {
            const auto& y = std::get<BrownianDemand>(b);
            return BrownianDemand{x.x0 + y.x0, x.sigma + y.sigma};
          },
          [&](const OrnsteinUhlenbeckDemand& x) -> DemandProcess {
            const auto& y = std::get<OrnsteinUhlenbeckDemand>(b);
            if (x.kappa != y.kappa) incompatible(a, b);
            return OrnsteinUhlenbeckDemand{x.x0 + y.x0, x.kappa, x.theta + y.theta, x.sigma + y.sigma};
          },
          [&](const SmoothRateDemand& x) -> DemandProcess {
            const auto& y = std::get<SmoothRateDemand>(b);
            return SmoothRateDemand{lower(add(lift(x.rate), lift(y.rate)))};
          },
          [&](const auto&) -> DemandProcess { incompatible(a, b); },
      },
      a);
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

bool is_zero(const DemandProcess& x) { return std::holds_alternative<ZeroDemand>(x); }

bool is_deterministic(const DemandProcess& x) {
  return std::visit(overloaded{
                        [](const BrownianDemand& b) { return b.sigma == 0.0; },
                        [](const OrnsteinUhlenbeckDemand& o) { return o.sigma == 0.0; },
                        [](const SmoothRateDemand& s) { return is_deterministic(lift(s.rate)); },
                        [](const auto&) { return true; },
                    },
                    x);
}

std::string check_demand(const DemandProcess& x, std::size_t nodes) {
  auto finite = [](std::initializer_list<double> v) {
    for (double d : v)
      if (!std::isfinite(d)) return false;
    return true;
  };
  return std::visit(overloaded{
                        [](const ZeroDemand&) -> std::string { return {}; },
                        [&](const ConstantDemand& c) -> std::string {
                          return finite({c.level}) ? "" : "constant demand level must be finite";
                        },
                        [&](const SampledDemand& s) -> std::string {
                          if (nodes != 0 && s.values.size() != nodes)
                            return "sampled demand has " + std::to_string(s.values.size()) + " values, grid has " +
                                   std::to_string(nodes) + " nodes";
                          for (double v : s.values)
                            if (!std::isfinite(v)) return "sampled demand contains non-finite values";
                          return {};
                        },
                        [&](const BrownianDemand& b) -> std::string {
                          if (!finite({b.x0, b.sigma})) return "Brownian demand parameters must be finite";
                          return b.sigma >= 0.0 ? "" : "Brownian demand needs sigma >= 0";
                        },
                        [&](const OrnsteinUhlenbeckDemand& o) -> std::string {
                          if (!finite({o.x0, o.kappa, o.theta, o.sigma})) return "OU demand parameters must be finite";
                          if (o.sigma < 0.0) return "OU demand needs sigma >= 0";
                          return o.kappa >= 0.0 ? "" : "OU demand needs kappa >= 0";
                        },
                        [&](const SmoothRateDemand& s) -> std::string { return check_demand(lift(s.rate), nodes); },
                    },
                    x);
}

DemandProcess combine(const DemandProcess& a, double wa, const DemandProcess& b, double wb) {
  return add(scale(a, wa), scale(b, wb));
}

std::string describe(const DemandProcess& x) {
  return std::visit(overloaded{
                        [](const ZeroDemand&) -> std::string { return "zero"; },
                        [](const ConstantDemand& c) -> std::string { return "constant(" + fmt(c.level) + ")"; },
                        [](const SampledDemand& s) -> std::string {
                          return "sampled(" + std::to_string(s.values.size()) + " values)";
                        },
                        [](const BrownianDemand& b) -> std::string {
                          return "brownian(" + fmt(b.x0) + "," + fmt(b.sigma) + ")";
                        },
                        [](const OrnsteinUhlenbeckDemand& o) -> std::string {
                          return "ou(" + fmt(o.x0) + "," + fmt(o.kappa) + "," + fmt(o.theta) + "," + fmt(o.sigma) + ")";
                        },
                        [](const SmoothRateDemand& s) -> std::string { return "smooth(" + describe(lift(s.rate)) + ")"; },
                    },
                    x);
}

DemandProcess parse_demand(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (s == "zero" || s == "0") return ZeroDemand{};
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') throw ConfigError("malformed demand: '" + text + "'");
  const std::string name = s.substr(0, open);
  const std::string inner = s.substr(open + 1, s.size() - open - 2);
  if (name == "smooth") return SmoothRateDemand{lower(parse_demand(inner))};

  std::vector<double> args;
  std::stringstream ss(inner);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      args.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("malformed number '" + tok + "' in demand '" + text + "'");
    }
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw ConfigError("demand '" + name + "' takes " + std::to_string(n) + " arguments, got " +
                        std::to_string(args.size()));
  };
  DemandProcess out;
  if (name == "constant") {
    need(1);
    out = ConstantDemand{args[0]};
  } else if (name == "brownian") {
    need(2);
    out = BrownianDemand{args[0], args[1]};
  } else if (name == "ou") {
    need(4);
    out = OrnsteinUhlenbeckDemand{args[0], args[1], args[2], args[3]};
  } else {
    throw ConfigError("unknown demand kind '" + name + "'");
  }
  if (auto err = check_demand(out); !err.empty()) throw ConfigError(err);
  return out;
}

}  // namespace dealer

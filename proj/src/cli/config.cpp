#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "dealer/demand.hpp"
#include "dealer/errors.hpp"

namespace dealer::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  return parts;
}

std::string format(double v) {
  std::ostringstream o;
  o.precision(12);
  o << v;
  return o.str();
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (const auto& x : v) {
    if (!s.empty()) s += ",";
    if constexpr (std::is_floating_point_v<T>) s += format(x);
    else s += std::to_string(x);
  }
  return s;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  const double v = parse_number(text, what);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e12) throw ConfigError(what + ": expected a non-negative integer, got '" + text + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

double parse_number(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(what + ": empty value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) throw ConfigError(what + ": not a number: '" + text + "'");
  return v;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(parse_number(p, what));
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

IniData read_ini(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot read config '" + path.string() + "': " + e.message());
  }
  IniData data;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config '" + path.string() + "': key '" + section + "' outside any section");
    auto& dst = data[section];
    for (const auto& [key, value] : body) dst[key] = trim(value.data());
  }
  return data;
}

Settings::Settings(const Flags& flags, IniData ini) : flags_(flags), ini_(std::move(ini)) {
  echo_["seed"] = std::to_string(flags_.seed);
  if (flags_.config) echo_["config_file"] = flags_.config->filename().string();
}

std::optional<std::string> Settings::raw(const std::string& key) {
  const auto sec = ini_.find("scenario");
  if (sec == ini_.end()) return std::nullopt;
  const auto it = sec->second.find(key);
  if (it == sec->second.end()) return std::nullopt;
  used_.insert("scenario." + key);
  return it->second;
}

double Settings::number(const std::string& key, double fallback) {
  const auto r = raw(key);
  const double v = r ? parse_number(*r, key) : fallback;
  echo_["scenario." + key] = format(v);
  return v;
}

std::size_t Settings::count(const std::string& key, std::size_t fallback) {
  const auto r = raw(key);
  const std::size_t v = r ? parse_count(*r, key) : fallback;
  echo_["scenario." + key] = std::to_string(v);
  return v;
}

std::string Settings::text(const std::string& key, const std::string& fallback) {
  const auto r = raw(key);
  const std::string v = r ? *r : fallback;
  echo_["scenario." + key] = v;
  return v;
}

std::vector<double> Settings::numbers(const std::string& key, const std::vector<double>& fallback) {
  const auto r = raw(key);
  auto v = r ? parse_number_list(*r, key) : fallback;
  echo_["scenario." + key] = join(v);
  return v;
}

std::vector<std::size_t> Settings::counts(const std::string& key, const std::vector<std::size_t>& fallback) {
  const auto r = raw(key);
  std::vector<std::size_t> v = fallback;
  if (r) {
    v.clear();
    for (const auto& p : split(*r, ',')) v.push_back(parse_count(p, key));
  }
  echo_["scenario." + key] = join(v);
  return v;
}

std::vector<DealerCount> Settings::dealers(const std::string& key, const std::string& fallback) {
  const auto r = raw(key);
  const std::string t = r ? *r : fallback;
  std::vector<DealerCount> v;
  for (const auto& p : split(t, ',')) {
    if (p == "inf") {
      v.push_back(DealerCount::infinite());
      continue;
    }
    const std::size_t m = parse_count(p, key);
    if (m < 1 || m > 1000000) throw ConfigError(key + ": dealer counts must lie in 1..1000000 or be 'inf'");
    v.push_back(DealerCount::finite(static_cast<unsigned>(m)));
  }
  if (v.empty()) throw ConfigError(key + ": empty list");
  echo_["scenario." + key] = t;
  return v;
}

bool Settings::flag(const std::string& key, bool fallback) {
  const auto r = raw(key);
  bool v = fallback;
  if (r) {
    if (*r == "true" || *r == "1" || *r == "yes") v = true;
    else if (*r == "false" || *r == "0" || *r == "no") v = false;
    else throw ConfigError(key + ": expected true or false, got '" + *r + "'");
  }
  echo_["scenario." + key] = v ? "true" : "false";
  return v;
}

double Settings::lambda(double fallback) {
  if (flags_.lambda) {
    const auto v = parse_number_list(*flags_.lambda, "--lambda");
    if (v.size() != 1) throw ConfigError("--lambda: this subcommand takes a single value");
    raw("lambda");
    echo_["scenario.lambda"] = format(v[0]);
    return v[0];
  }
  return number("lambda", fallback);
}

std::vector<double> Settings::lambdas(const std::vector<double>& fallback) {
  if (flags_.lambda) {
    const auto v = parse_number_list(*flags_.lambda, "--lambda");
    raw("lambdas");
    echo_["scenario.lambdas"] = join(v);
    return v;
  }
  return numbers("lambdas", fallback);
}

std::size_t Settings::steps(std::size_t fallback) {
  if (flags_.steps) {
    raw("steps");
    echo_["scenario.steps"] = std::to_string(*flags_.steps);
    return *flags_.steps;
  }
  return count("steps", fallback);
}

std::size_t Settings::paths(std::size_t fallback) {
  if (flags_.paths) {
    raw("paths");
    echo_["scenario.paths"] = std::to_string(*flags_.paths);
    return *flags_.paths;
  }
  return count("paths", fallback);
}

void Settings::reject_unknown() const {
  for (const auto& [section, body] : ini_)
    for (const auto& [key, value] : body)
      if (!used_.count(section + "." + key))
        throw ConfigError("unknown or unused config key '" + key + "' in section [" + section + "]");
}

MarketParams market_from_ini(Settings& s) {
  auto take = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    const auto sec = s.ini().find(section);
    if (sec == s.ini().end()) return std::nullopt;
    const auto it = sec->second.find(key);
    if (it == sec->second.end()) return std::nullopt;
    s.record(section + "." + key, it->second);
    return it->second;
  };
  MarketParams p;
  const auto T = take("market", "horizon");
  const double horizon = T ? parse_number(*T, "market.horizon") : 1.0;
  const auto st = take("market", "steps");
  std::size_t steps = st ? parse_count(*st, "market.steps") : 1000;
  if (s.flags().steps) steps = *s.flags().steps;
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("market.horizon must be positive");
  if (steps < 1) throw ConfigError("market.steps must be at least 1");
  p.horizon = Horizon::uniform(horizon, steps);
  s.record("market.horizon", format(horizon));
  s.record("market.steps", std::to_string(steps));

  const auto lam = take("market", "lambda");
  p.lambda = lam ? parse_number(*lam, "market.lambda") : 0.1;
  if (s.flags().lambda) {
    const auto v = parse_number_list(*s.flags().lambda, "--lambda");
    if (v.size() != 1) throw ConfigError("--lambda: this subcommand takes a single value");
    p.lambda = v[0];
  }
  s.record("market.lambda", format(p.lambda));

  if (const auto n = take("noise", "demand")) p.noise_demand = parse_demand(*n);

  for (const auto& [section, body] : s.ini()) {
    if (section.rfind("agent:", 0) != 0) continue;
    const std::string id = section.substr(6);
    if (id.empty()) throw ConfigError("agent section needs an id: [agent:<id>]");
    AgentSpec a;
    a.id = id;
    const auto cnt = take(section, "count");
    const std::size_t count = cnt ? parse_count(*cnt, section + ".count") : 1;
    if (count < 1) throw ConfigError(section + ".count must be at least 1");
    if (const auto m = take(section, "mass")) a.mass = parse_number(*m, section + ".mass");
    if (const auto r = take(section, "rho")) a.risk_tolerance = parse_number(*r, section + ".rho");
    if (const auto c = take(section, "cost")) {
      if (*c == "inf" || *c == "none") a.access_cost = AccessCost::no_access();
      else a.access_cost = AccessCost(parse_number(*c, section + ".cost"));
    }
    if (const auto t = take(section, "target")) a.target = parse_demand(*t);
    for (const auto& [key, value] : body)
      if (key != "count" && key != "mass" && key != "rho" && key != "cost" && key != "target")
        throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
    for (std::size_t k = 0; k < count; ++k) {
      AgentSpec copy = a;
      if (count > 1) copy.id = id + std::to_string(k + 1);
      p.agents.push_back(std::move(copy));
    }
  }
  for (const auto& [section, body] : s.ini()) {
    if (section == "market" || section == "noise") {
      for (const auto& [key, value] : body) {
        const bool known = section == "market" ? (key == "horizon" || key == "steps" || key == "lambda") : key == "demand";
        if (!known) throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
      }
    } else if (section.rfind("agent:", 0) != 0) {
      throw ConfigError("unknown config section [" + section + "]");
    }
  }
  if (const auto d = validate(p); !d.ok()) throw ConfigError("invalid market: " + d.joined());
  return p;
}

}  // namespace dealer::cli

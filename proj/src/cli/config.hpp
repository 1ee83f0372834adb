#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dealer/market_model.hpp"
#include "dealer/scenarios.hpp"

namespace dealer::cli {

/// Parsed INI file: section -> key -> raw value, in sorted order.
using IniData = std::map<std::string, std::map<std::string, std::string>>;

IniData read_ini(const std::filesystem::path& path);

/// Command-line options shared by every subcommand.
struct Flags {
  std::string command;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = ".";
  std::uint64_t seed = 0;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> paths;
  std::optional<std::string> lambda;
  int threads = 0;
};

/// Typed view of the [scenario] section with flag overrides applied. Every
/// value that is read is recorded, so the effective configuration can be
/// echoed into reports.
class Settings {
 public:
  Settings(const Flags& flags, IniData ini);

  double number(const std::string& key, double fallback);
  std::size_t count(const std::string& key, std::size_t fallback);
  std::string text(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  std::vector<std::size_t> counts(const std::string& key, const std::vector<std::size_t>& fallback);
  std::vector<DealerCount> dealers(const std::string& key, const std::string& fallback);
  bool flag(const std::string& key, bool fallback);

  /// lambda: --lambda wins over the file; a list is rejected here.
  double lambda(double fallback);
  std::vector<double> lambdas(const std::vector<double>& fallback);
  std::size_t steps(std::size_t fallback);
  std::size_t paths(std::size_t fallback);

  /// Throws ConfigError naming any [scenario] key that was never read.
  void reject_unknown() const;

  const std::map<std::string, std::string>& echo() const noexcept { return echo_; }
  const IniData& ini() const noexcept { return ini_; }
  const Flags& flags() const noexcept { return flags_; }
  void record(const std::string& key, const std::string& value) { echo_[key] = value; }

 private:
  std::optional<std::string> raw(const std::string& key);

  Flags flags_;
  IniData ini_;
  std::set<std::string> used_;
  std::map<std::string, std::string> echo_;
};

/// Generic market from [market], [noise] and [agent:<id>] sections.
MarketParams market_from_ini(Settings& s);

double parse_number(const std::string& text, const std::string& what);
std::vector<double> parse_number_list(const std::string& text, const std::string& what);

}  // namespace dealer::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace dealer::cli {

/// Provenance stamped into every output file.
struct ReportMeta {
  std::string command;
  std::uint64_t seed = 0;
  std::string grid;  // e.g. "steps=1000"
  std::map<std::string, std::string> config;
};

/// Fixed 12-significant-digit rendering used for every CSV number.
std::string format_number(double v);

/// Column-oriented CSV with '#' provenance lines ahead of the header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  void add_row(const std::vector<double>& values);
  void write(const std::filesystem::path& file, const ReportMeta& meta) const;
  std::size_t rows() const noexcept { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

nlohmann::ordered_json meta_json(const ReportMeta& meta);
void write_json(const std::filesystem::path& file, const nlohmann::ordered_json& doc);

/// Finite doubles as numbers, anything else as null.
nlohmann::ordered_json number_or_null(double v);

}  // namespace dealer::cli

#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dealer/cli.hpp"
#include "dealer/errors.hpp"

namespace dealer::cli {

namespace {

std::ofstream open_output(const std::filesystem::path& file) {
  std::error_code ec;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write output file '" + file.string() + "'");
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(const std::vector<double>& values) {
  if (values.size() != columns_.size()) throw DomainError("csv row width does not match the header");
  rows_.push_back(values);
}

void CsvTable::write(const std::filesystem::path& file, const ReportMeta& meta) const {
  auto out = open_output(file);
  out << "# dealerlab " << version() << "\n";
  out << "# command=" << meta.command << " seed=" << meta.seed << " grid=" << meta.grid << "\n";
  out << "# config:";
  for (const auto& [k, v] : meta.config) out << " " << k << "=" << v;
  out << "\n";
  for (std::size_t j = 0; j < columns_.size(); ++j) out << (j ? "," : "") << columns_[j];
  out << "\n";
  for (const auto& r : rows_) {
    for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << format_number(r[j]);
    out << "\n";
  }
  if (!out) throw ConfigError("failed writing '" + file.string() + "'");
}

nlohmann::ordered_json meta_json(const ReportMeta& meta) {
  nlohmann::ordered_json j;
  j["version"] = version();
  j["command"] = meta.command;
  j["seed"] = meta.seed;
  j["grid"] = meta.grid;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta.config) j["config"][k] = v;
  return j;
}

void write_json(const std::filesystem::path& file, const nlohmann::ordered_json& doc) {
  auto out = open_output(file);
  out << doc.dump(2) << "\n";
  if (!out) throw ConfigError("failed writing '" + file.string() + "'");
}

nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace dealer::cli

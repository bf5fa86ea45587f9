#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace fluxspin::cli {

// Shortest round-trip decimal representation, independent of locale.
std::string format_double(double value);

using CsvCell = std::variant<double, long long, std::string>;

// Comma-separated table with a single header row and LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<CsvCell> row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvCell>> rows_;
};

// Writes `content` byte for byte, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& content);

std::string dump_json(const nlohmann::json& j);

}  // namespace fluxspin::cli

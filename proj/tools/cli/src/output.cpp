#include "fluxspin/cli/output.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "fluxspin/errors.hpp"

namespace fluxspin::cli {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

void CsvTable::add_row(std::vector<CsvCell> row) {
  if (row.size() != header_.size()) throw Error("csv row has " + std::to_string(row.size()) + " cells, header has " +
                                                std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t k = 0; k < header_.size(); ++k) {
    if (k) out += ',';
    out += header_[k];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ',';
      if (const auto* d = std::get_if<double>(&row[k]))
        out += format_double(*d);
      else if (const auto* i = std::get_if<long long>(&row[k]))
        out += std::to_string(*i);
      else
        out += std::get<std::string>(row[k]);
    }
    out += '\n';
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("cannot write " + path.string());
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace fluxspin::cli

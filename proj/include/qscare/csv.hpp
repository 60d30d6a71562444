#pragma once

#include <cstdint>
#include <fstream>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

namespace qscare {

using Cell = std::variant<std::int64_t, double, std::string>;

// Writes path.csv (comma separated, header row) and path.dat (whitespace
// separated, header as a '#' comment, strings quoted) side by side. Every row
// gets seed and config_hash appended. Rows may come from several threads.
class CsvWriter {
public:
  CsvWriter(const std::string& stem, std::vector<std::string> columns, std::uint64_t seed, std::string config_hash);

  void row(const std::vector<Cell>& cells);
  void flush();
  const std::string& csv_path() const { return csv_path_; }
  const std::string& dat_path() const { return dat_path_; }
  std::size_t rows() const { return rows_; }

private:
  std::vector<std::string> columns_;
  std::uint64_t seed_;
  std::string hash_;
  std::string csv_path_, dat_path_;
  std::ofstream csv_, dat_;
  std::mutex mu_;
  std::size_t rows_ = 0;
};

// Shortest text that reads back to the same double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;  // throws when absent
};

// Reader for files written by CsvWriter (quoted fields, no embedded newlines).
CsvTable read_csv(const std::string& path);

}  // namespace qscare

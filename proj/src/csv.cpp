#include "qscare/csv.hpp"

#include "qscare/error.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace qscare {

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string dat_quote(const std::string& s) {
  if (!s.empty() && s.find_first_of(" \t\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? '\'' : c;
  return out + '"';
}

std::string cell_text(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  return std::get<std::string>(c);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(const std::string& stem, std::vector<std::string> columns, std::uint64_t seed,
                     std::string config_hash)
    : columns_(std::move(columns)), seed_(seed), hash_(std::move(config_hash)) {
  require(!columns_.empty(), "CsvWriter: no columns");
  const std::filesystem::path p(stem);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  csv_path_ = stem + ".csv";
  dat_path_ = stem + ".dat";
  csv_.open(csv_path_);
  dat_.open(dat_path_);
  if (!csv_ || !dat_) throw InputError("CsvWriter: cannot write " + stem);
  columns_.push_back("seed");
  columns_.push_back("config_hash");
  for (std::size_t i = 0; i < columns_.size(); ++i) csv_ << (i ? "," : "") << csv_quote(columns_[i]);
  csv_ << '\n';
  dat_ << '#';
  for (const std::string& c : columns_) dat_ << ' ' << c;
  dat_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  require(cells.size() + 2 == columns_.size(), "CsvWriter: row has " + std::to_string(cells.size()) +
                                                   " cells, expected " + std::to_string(columns_.size() - 2));
  std::vector<Cell> all = cells;
  all.emplace_back(static_cast<std::int64_t>(seed_));
  all.emplace_back(hash_);
  std::ostringstream c, d;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const std::string t = cell_text(all[i]);
    const bool is_str = std::holds_alternative<std::string>(all[i]);
    c << (i ? "," : "") << (is_str ? csv_quote(t) : t);
    d << (i ? " " : "") << (is_str ? dat_quote(t) : t);
  }
  std::lock_guard<std::mutex> lock(mu_);
  csv_ << c.str() << '\n';
  dat_ << d.str() << '\n';
  ++rows_;
}

void CsvWriter::flush() {
  std::lock_guard<std::mutex> lock(mu_);
  csv_.flush();
  dat_.flush();
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw InputError("csv: no column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("csv: cannot open " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quoted) {
        if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (ch == '"') {
          quoted = false;
        } else {
          cur += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    out.push_back(cur);
    return out;
  };
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InputError("csv: empty file " + path);
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
    if (t.rows.back().size() != t.header.size()) throw InputError("csv: ragged row in " + path);
  }
  return t;
}

}  // namespace qscare

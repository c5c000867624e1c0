#pragma once

// Result tables and their CSV form. Doubles are written as %.16e so a row
// round-trips bit-exactly through strtod.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hdclt/errors.hpp"

namespace hdclt::harness {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string fmt_double(long double v) { return fmt_double(static_cast<double>(v)); }
inline std::string fmt_bool(bool b) { return b ? "1" : "0"; }

// Quote only when needed.
inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class Row {
 public:
  Row& add(const std::string& key, const std::string& v) {
    keys_.push_back(key);
    cells_.push_back(v);
    return *this;
  }
  Row& add(const std::string& key, const char* v) { return add(key, std::string(v)); }
  Row& add(const std::string& key, double v) { return add(key, fmt_double(v)); }
  Row& add(const std::string& key, long double v) { return add(key, fmt_double(v)); }
  Row& add(const std::string& key, bool v) { return add(key, fmt_bool(v)); }
  Row& add(const std::string& key, std::uint64_t v) { return add(key, std::to_string(v)); }
  Row& add(const std::string& key, std::int64_t v) { return add(key, std::to_string(v)); }
  Row& add(const std::string& key, unsigned v) { return add(key, std::to_string(v)); }

  const std::vector<std::string>& keys() const { return keys_; }
  const std::vector<std::string>& cells() const { return cells_; }

 private:
  std::vector<std::string> keys_;
  std::vector<std::string> cells_;
};

struct Table {
  std::vector<Row> rows;

  void write_csv(std::ostream& os) const {
    if (rows.empty()) return;
    const auto& header = rows.front().keys();
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_escape(header[i]);
    os << '\n';
    for (const auto& r : rows) {
      if (r.keys() != header) throw std::logic_error("Table: rows disagree on columns");
      for (std::size_t i = 0; i < r.cells().size(); ++i) os << (i ? "," : "") << csv_escape(r.cells()[i]);
      os << '\n';
    }
  }

  std::string csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// CSV to `path`, manifest to `path`.manifest.json. The timestamp lives only
// in the manifest so repeated runs give byte-identical CSVs.
inline void write_outputs(const std::string& path, const Table& t, nlohmann::json manifest) {
  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw resource_error("cannot open output file " + path);
  t.write_csv(csv);
  csv.close();
  if (!csv) throw resource_error("write failed for " + path);

  manifest["timestamp"] = utc_timestamp();
  manifest["rows"] = t.rows.size();
  manifest["csv"] = path;
  std::ofstream mf(path + ".manifest.json", std::ios::binary);
  if (!mf) throw resource_error("cannot open manifest file " + path + ".manifest.json");
  mf << manifest.dump(2) << '\n';
}

}  // namespace hdclt::harness

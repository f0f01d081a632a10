#pragma once
// Long-format result rows shared by the CLI and the sweep driver, with
// byte-stable CSV/JSON serialization.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace thzalloc {

// One row per (method, grid value, drop). runtime is a deterministic work
// count (simplex pivots plus power-solver iterations), not wall-clock time,
// so result files stay byte-stable across machines.
struct ResultRow {
  std::string method;
  std::string param;  // swept parameter name, "-" for single solves
  double value = 0;   // grid value, 0 for single solves
  int drop = 0;
  double sum_rate = 0;
  double aom = 0;
  int iterations = 0;
  long long runtime = 0;

  bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
  static constexpr const char* kSchema = "thzalloc-results-v1";
  std::vector<ResultRow> rows;

  bool operator==(const ResultTable&) const = default;
};

inline const char* kResultHeader =
    "method,param,value,drop,sum_rate,aom,iterations,runtime";

namespace detail {

// 12 significant digits, shortest form; the single formatting path keeps
// CSV and JSON output bit-identical across runs.
inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void check_ascii_token(const std::string& s) {
  for (unsigned char c : s)
    if (c < 0x20 || c > 0x7e || c == ',' || c == '"')
      throw IoError("result fields must be plain ASCII without commas");
}

}  // namespace detail

// The fixed header row doubles as the schema marker: readers reject any
// file whose header differs, so a schema bump shows up as a parse error
// rather than silently shifted columns.
inline std::string to_csv(const ResultTable& table) {
  std::string out;
  out += kResultHeader;
  out += "\n";
  for (const ResultRow& r : table.rows) {
    detail::check_ascii_token(r.method);
    detail::check_ascii_token(r.param);
    out += r.method;
    out += ',';
    out += r.param;
    out += ',';
    out += detail::fmt12(r.value);
    out += ',';
    out += std::to_string(r.drop);
    out += ',';
    out += detail::fmt12(r.sum_rate);
    out += ',';
    out += detail::fmt12(r.aom);
    out += ',';
    out += std::to_string(r.iterations);
    out += ',';
    out += std::to_string(r.runtime);
    out += '\n';
  }
  return out;
}

inline std::string to_json(const ResultTable& table) {
  std::string out;
  out += "{\n  \"schema\": \"";
  out += ResultTable::kSchema;
  out += "\",\n  \"rows\": [";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const ResultRow& r = table.rows[i];
    detail::check_ascii_token(r.method);
    detail::check_ascii_token(r.param);
    out += i ? ",\n    {" : "\n    {";
    out += "\"method\": \"" + r.method + "\", ";
    out += "\"param\": \"" + r.param + "\", ";
    out += "\"value\": " + detail::fmt12(r.value) + ", ";
    out += "\"drop\": " + std::to_string(r.drop) + ", ";
    out += "\"sum_rate\": " + detail::fmt12(r.sum_rate) + ", ";
    out += "\"aom\": " + detail::fmt12(r.aom) + ", ";
    out += "\"iterations\": " + std::to_string(r.iterations) + ", ";
    out += "\"runtime\": " + std::to_string(r.runtime) + "}";
  }
  out += "\n  ]\n}\n";
  return out;
}

// Parses a table written by to_csv. Values re-read from the 12-digit text
// form; a write-read-write cycle is byte-identical.
inline ResultTable from_csv(const std::string& text) {
  ResultTable table;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    if (!header_seen) {
      if (line != kResultHeader)
        throw ParseError("line " + std::to_string(lineno) +
                         ": unexpected CSV header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8)
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected 8 columns");
    ResultRow r;
    r.method = cells[0];
    r.param = cells[1];
    try {
      std::size_t pos = 0;
      r.value = std::stod(cells[2], &pos);
      if (pos != cells[2].size()) throw std::invalid_argument("value");
      r.drop = std::stoi(cells[3], &pos);
      if (pos != cells[3].size()) throw std::invalid_argument("drop");
      r.sum_rate = std::stod(cells[4], &pos);
      if (pos != cells[4].size()) throw std::invalid_argument("sum_rate");
      r.aom = std::stod(cells[5], &pos);
      if (pos != cells[5].size()) throw std::invalid_argument("aom");
      r.iterations = std::stoi(cells[6], &pos);
      if (pos != cells[6].size()) throw std::invalid_argument("iterations");
      r.runtime = std::stoll(cells[7], &pos);
      if (pos != cells[7].size()) throw std::invalid_argument("runtime");
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) + ": bad numeric cell");
    }
    table.rows.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError("missing CSV header");
  return table;
}

// Writes the table under dir in the requested formats ("csv", "json") and
// returns the created paths.
inline std::vector<std::string> export_results(
    const ResultTable& table, const std::string& dir,
    const std::vector<std::string>& formats) {
  if (table.rows.empty()) throw RangeError("result table is empty");
  std::vector<std::string> paths;
  for (const std::string& f : formats) {
    std::string body;
    if (f == "csv")
      body = to_csv(table);
    else if (f == "json")
      body = to_json(table);
    else
      throw RangeError("unknown export format: " + f);
    const std::string path = dir + "/results." + f;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << body;
    if (!out) throw IoError("short write to " + path);
    paths.push_back(path);
  }
  return paths;
}

// Per-point aggregate used by the sweep assertions: arithmetic mean and
// standard error (sample stddev / sqrt(n)) over drops.
struct SweepPoint {
  std::string method;
  std::string param;
  double value = 0;
  int drops = 0;
  double mean_sum_rate = 0, se_sum_rate = 0;
  double mean_aom = 0, se_aom = 0;
};

inline std::vector<SweepPoint> summarize(const ResultTable& table) {
  std::vector<SweepPoint> points;
  auto find = [&](const ResultRow& r) -> SweepPoint& {
    for (SweepPoint& p : points)
      if (p.method == r.method && p.param == r.param && p.value == r.value)
        return p;
    points.push_back({r.method, r.param, r.value, 0, 0, 0, 0, 0});
    return points.back();
  };
  for (const ResultRow& r : table.rows) {
    SweepPoint& p = find(r);
    ++p.drops;
    p.mean_sum_rate += r.sum_rate;
    p.mean_aom += r.aom;
  }
  for (SweepPoint& p : points) {
    p.mean_sum_rate /= p.drops;
    p.mean_aom /= p.drops;
  }
  for (const ResultRow& r : table.rows) {
    SweepPoint& p = find(r);
    const double dr = r.sum_rate - p.mean_sum_rate;
    const double da = r.aom - p.mean_aom;
    p.se_sum_rate += dr * dr;
    p.se_aom += da * da;
  }
  for (SweepPoint& p : points) {
    if (p.drops > 1) {
      p.se_sum_rate = std::sqrt(p.se_sum_rate / (p.drops - 1) / p.drops);
      p.se_aom = std::sqrt(p.se_aom / (p.drops - 1) / p.drops);
    } else {
      p.se_sum_rate = 0;
      p.se_aom = 0;
    }
  }
  return points;
}

}  // namespace thzalloc

#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "benthic/error.hpp"

namespace benthic {

using Cell = std::variant<double, long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> comments;  // emitted as "# ..." before the header

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
      throw Error(ErrorCode::PreconditionViolated, "row width does not match the header");
    }
    rows.push_back(std::move(row));
  }
};

inline std::string format_cell(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", *d);
    return buf;
  }
  if (const long* l = std::get_if<long>(&c)) return std::to_string(*l);
  return std::get<std::string>(c);
}

inline std::string render_csv(const Table& t) {
  std::string out;
  for (const auto& c : t.comments) out += "# " + c + "\n";
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    if (j) out += ',';
    out += t.columns[j];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_cell(row[j]);
    }
    out += '\n';
  }
  return out;
}

inline void emit_csv(const Table& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  const std::string text = render_csv(t);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

}  // namespace benthic

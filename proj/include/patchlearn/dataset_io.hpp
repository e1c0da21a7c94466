#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchlearn/core.hpp"

namespace patchlearn {

struct DatasetParseError : std::runtime_error {
  explicit DatasetParseError(const std::string& what)
      : std::runtime_error("dataset parse error: " + what) {}
};

// CSV with header x1,...,xM,y and 12 significant digits per value. The width
// is a presentation choice, not a storage format: regenerate rather than
// round-trip when bit-exact values matter.
inline std::string dataset_to_csv(const Dataset& data) {
  data.validate();
  std::string out;
  for (std::size_t m = 0; m < data.dims(); ++m) out += "x" + std::to_string(m + 1) + ",";
  out += "y\n";
  char buf[32];
  for (std::size_t n = 0; n < data.size(); ++n) {
    for (double v : data.inputs[n]) {
      std::snprintf(buf, sizeof buf, "%.12g", v);
      out += buf;
      out += ',';
    }
    std::snprintf(buf, sizeof buf, "%.12g", data.targets[n]);
    out += buf;
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_dataset_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

inline double parse_csv_number(const std::string& cell, std::size_t lineNo) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw DatasetParseError("bad number '" + cell + "' on line " + std::to_string(lineNo));
  return v;
}

}  // namespace detail

inline Dataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DatasetParseError("empty document");
  std::vector<std::string> header = detail::split_dataset_line(line);
  if (header.size() < 2 || header.back() != "y")
    throw DatasetParseError("header must be x1,...,xM,y");
  for (std::size_t m = 0; m + 1 < header.size(); ++m)
    if (header[m] != "x" + std::to_string(m + 1))
      throw DatasetParseError("header must be x1,...,xM,y (got '" + header[m] + "' at column " +
                              std::to_string(m + 1) + ")");
  const std::size_t columns = header.size();

  Dataset data;
  std::size_t lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line == "\r") continue;  // tolerate a trailing newline
    std::vector<std::string> cells = detail::split_dataset_line(line);
    if (cells.size() != columns)
      throw DatasetParseError("line " + std::to_string(lineNo) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(columns));
    std::vector<double> x(columns - 1);
    for (std::size_t m = 0; m + 1 < columns; ++m) x[m] = detail::parse_csv_number(cells[m], lineNo);
    data.push_back(std::move(x), detail::parse_csv_number(cells.back(), lineNo));
  }
  if (data.size() == 0) throw DatasetParseError("no data rows");
  data.validate();
  return data;
}

inline void save_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << dataset_to_csv(data);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return dataset_from_csv(buf.str());
}

}  // namespace patchlearn

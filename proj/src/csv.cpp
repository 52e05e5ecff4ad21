#include "qmcl/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qmcl {

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw std::runtime_error("csv: missing column '" + name + "'");
}

std::string format_g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& data) {
  if (static_cast<Eigen::Index>(header.size()) != data.cols())
    throw std::invalid_argument("write_csv: header width does not match data");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      if (c) out << ',';
      out << format_g17(data(r, c));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_csv: empty file '" + path + "'");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++cols;
    }
    if (cols != table.header.size())
      throw std::runtime_error("read_csv: ragged row in '" + path + "'");
    ++rows;
  }
  table.data.resize(rows, table.header.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < table.header.size(); ++c)
      table.data(r, c) = values[r * table.header.size() + c];
  return table;
}

}  // namespace qmcl

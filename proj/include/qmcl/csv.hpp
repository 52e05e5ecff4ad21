#ifndef QMCL_CSV_HPP
#define QMCL_CSV_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qmcl {

// Numeric CSV with a header row; values are written with 17 significant
// digits so round-trips are exact.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd data;

  // Index of a named column; throws naming the column when absent.
  int column(const std::string& name) const;
};

std::string format_g17(double value);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& data);

CsvTable read_csv(const std::string& path);

}  // namespace qmcl

#endif

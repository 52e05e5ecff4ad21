#include "qmcl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qmcl/csv.hpp"

namespace qmcl {

namespace {

Histogram bin_series(const Eigen::Ref<const Eigen::VectorXd>& series, double lo,
                     double hi, int bins) {
  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges[b] = lo + b * width;
  h.edges[bins] = hi;

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(bins);
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    int b = static_cast<int>((series[i] - lo) / width);
    b = std::clamp(b, 0, bins - 1);  // closes the rightmost bin, clips outliers
    counts[b] += 1.0;
  }
  h.density = counts / static_cast<double>(series.size());
  return h;
}

}  // namespace

Histogram histogram(const Eigen::Ref<const Eigen::VectorXd>& series, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
  if (series.size() == 0) throw std::invalid_argument("histogram: empty series");
  const double lo = series.minCoeff();
  const double hi = series.maxCoeff();
  if (lo == hi) {
    // Constant series: single unit-width bin centered on the value.
    Histogram h;
    h.edges.resize(2);
    h.edges << lo - 0.5, lo + 0.5;
    h.density.resize(1);
    h.density << 1.0;
    return h;
  }
  return bin_series(series, lo, hi, bins);
}

Histogram histogram_with_range(const Eigen::Ref<const Eigen::VectorXd>& series,
                               double lo, double hi, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
  if (series.size() == 0) throw std::invalid_argument("histogram: empty series");
  if (!(hi > lo)) throw std::invalid_argument("histogram: need hi > lo");
  return bin_series(series, lo, hi, bins);
}

AutocorrSeries autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& series,
                               int max_lag_steps, double dt, bool subtract_mean) {
  const Eigen::Index n = series.size();
  if (n == 0) throw std::invalid_argument("autocorrelation: empty series");
  if (max_lag_steps < 0 || max_lag_steps >= n)
    throw std::invalid_argument("autocorrelation: max lag must be within the series");

  Eigen::VectorXd f = series;
  if (subtract_mean) f.array() -= f.mean();

  AutocorrSeries out;
  out.lags.resize(max_lag_steps + 1);
  out.values.resize(max_lag_steps + 1);
  // Upper summation limit n-1-j keeps every term inside the data range.
  for (int j = 0; j <= max_lag_steps; ++j) {
    double c = 0.0;
    for (Eigen::Index i = 0; i + j < n; ++i) c += f[i] * f[i + j];
    out.lags[j] = j * dt;
    out.values[j] = c / static_cast<double>(n);
  }
  const double c0 = out.values[0];
  if (c0 == 0.0)
    throw std::runtime_error("autocorrelation: identically zero series");
  out.values /= c0;
  out.values[0] = 1.0;
  return out;
}

namespace {

// Redistribute histogram mass onto a target uniform grid in proportion to
// interval overlap.
Eigen::VectorXd rebin(const Histogram& h, const Eigen::VectorXd& edges) {
  const int src = static_cast<int>(h.density.size());
  const int dst = static_cast<int>(edges.size()) - 1;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dst);
  for (int s = 0; s < src; ++s) {
    const double a = h.edges[s], b = h.edges[s + 1];
    const double width = b - a;
    if (!(width > 0.0))
      throw std::runtime_error("total_variation_distance: degenerate bin");
    for (int d = 0; d < dst; ++d) {
      const double lo = std::max(a, edges[d]);
      const double hi = std::min(b, edges[d + 1]);
      if (hi > lo) out[d] += h.density[s] * (hi - lo) / width;
    }
  }
  return out;
}

}  // namespace

double total_variation_distance(const Histogram& h1, const Histogram& h2) {
  if (h1.edges.size() == h2.edges.size() && h1.edges == h2.edges)
    return 0.5 * (h1.density - h2.density).cwiseAbs().sum();

  // Common grid: the union span with the finer bin count.
  const double lo = std::min(h1.edges[0], h2.edges[0]);
  const double hi = std::max(h1.edges[h1.edges.size() - 1],
                             h2.edges[h2.edges.size() - 1]);
  if (!(hi > lo))
    throw std::runtime_error("total_variation_distance: incompatible edges");
  const int bins = std::max<int>(static_cast<int>(h1.density.size()),
                                 static_cast<int>(h2.density.size()));
  Eigen::VectorXd edges(bins + 1);
  for (int b = 0; b <= bins; ++b) edges[b] = lo + (hi - lo) * b / bins;
  return 0.5 * (rebin(h1, edges) - rebin(h2, edges)).cwiseAbs().sum();
}

void hovmoller_export(const Eigen::MatrixXd& traj, double dt, const std::string& path) {
  if (traj.rows() == 0) throw std::invalid_argument("hovmoller_export: empty trajectory");
  const int k = static_cast<int>(traj.cols());
  std::vector<std::string> header;
  header.push_back("t");
  for (int c = 1; c <= k; ++c) header.push_back("x" + std::to_string(c));
  Eigen::MatrixXd data(traj.rows(), k + 1);
  for (Eigen::Index r = 0; r < traj.rows(); ++r) data(r, 0) = r * dt;
  data.rightCols(k) = traj;
  write_csv(path, header, data);
}

}  // namespace qmcl

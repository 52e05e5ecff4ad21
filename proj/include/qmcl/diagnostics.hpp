#ifndef QMCL_DIAGNOSTICS_HPP
#define QMCL_DIAGNOSTICS_HPP

#include <string>

#include <Eigen/Dense>

namespace qmcl {

// Uniform-bin histogram normalized to unit mass (counts / N).
struct Histogram {
  Eigen::VectorXd edges;    // B + 1 ascending
  Eigen::VectorXd density;  // B entries summing to 1
};

// Bins span [min, max] of the series; the rightmost bin is closed. A
// constant series degenerates to a single unit-width bin holding all mass.
Histogram histogram(const Eigen::Ref<const Eigen::VectorXd>& series, int bins);

// Same, over explicitly supplied bounds (used to place two series on common
// edges). Samples outside [lo, hi] are clipped into the boundary bins.
Histogram histogram_with_range(const Eigen::Ref<const Eigen::VectorXd>& series,
                               double lo, double hi, int bins);

// Raw (non-mean-subtracted) time autocorrelation
//   C(tau_j) = (1/N) sum_{n=0}^{N-1-j} f_n f_{n+j},
// normalized by C(0). subtract_mean removes the series mean first.
struct AutocorrSeries {
  Eigen::VectorXd lags;    // tau_j = j dt
  Eigen::VectorXd values;  // normalized; exactly 1 at lag 0
};
AutocorrSeries autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& series,
                               int max_lag_steps, double dt,
                               bool subtract_mean = false);

// (1/2) sum |d1_i - d2_i|; histograms on different edges are re-binned onto
// a common uniform grid by overlap-proportional redistribution.
double total_variation_distance(const Histogram& h1, const Histogram& h2);

// Space-time CSV of L96 slow variables: header t,x1..xK, one row per step,
// full float64 precision.
void hovmoller_export(const Eigen::MatrixXd& traj, double dt, const std::string& path);

}  // namespace qmcl

#endif

#include "qmcl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qmcl {

void DelayConfig::validate() const {
  if (Q < 0) throw std::invalid_argument("DelayConfig: Q must be nonnegative");
  if (Q % 2 != 0) throw std::invalid_argument("DelayConfig: Q must be even");
}

void KernelConfig::validate() const {
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("KernelConfig: bandwidth must be positive");
}

double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& w,
                       const Eigen::Ref<const Eigen::VectorXd>& wp, double bandwidth) {
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("gaussian_kernel: bandwidth must be positive");
  if (w.size() != wp.size())
    throw std::invalid_argument("gaussian_kernel: dimension mismatch");
  const double d2 = (w - wp).squaredNorm();
  return std::exp(-d2 / (bandwidth * bandwidth));
}

double sqrt_gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& w,
                            const Eigen::Ref<const Eigen::VectorXd>& wp,
                            double bandwidth) {
  return gaussian_kernel(w, wp, bandwidth * std::sqrt(2.0));
}

DelayEmbedding delay_embed(const Eigen::MatrixXd& series, const DelayConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(series.rows());
  const int dim = static_cast<int>(series.cols());
  const int q = cfg.Q;
  if (n <= q) throw std::invalid_argument("delay_embed: series length must exceed Q");

  DelayEmbedding out;
  out.points.resize(n - q, (q + 1) * dim);
  out.center_index.resize(n - q);
  for (int i = 0; i < n - q; ++i) {
    for (int s = 0; s <= q; ++s)
      out.points.block(i, s * dim, 1, dim) = series.row(i + s);
    out.center_index[i] = i + q / 2;
  }
  return out;
}

namespace {

// Squared pairwise distances of a deterministic stride subsample (<= cap
// points), flattened over i < j. The diagonal contributes n exact ones to
// S(eps) and is added separately.
struct PairwiseSq {
  std::vector<double> d2;
  int n = 0;
};

PairwiseSq subsampled_pairwise_sq(const Eigen::MatrixXd& points, int cap) {
  const int total = static_cast<int>(points.rows());
  const int stride = std::max(1, (total + cap - 1) / cap);
  Eigen::MatrixXd sub(points.cols(), (total + stride - 1) / stride);
  for (int i = 0, c = 0; i < total; i += stride, ++c) sub.col(c) = points.row(i);
  PairwiseSq out;
  out.n = static_cast<int>(sub.cols());
  out.d2.reserve(static_cast<std::size_t>(out.n) * (out.n - 1) / 2);
  for (int a = 0; a < out.n; ++a)
    for (int b = a + 1; b < out.n; ++b)
      out.d2.push_back((sub.col(a) - sub.col(b)).squaredNorm());
  return out;
}

}  // namespace

BandwidthScan tune_bandwidth_scan(const Eigen::MatrixXd& points,
                                  const std::vector<double>& candidates) {
  if (points.rows() < 2)
    throw std::invalid_argument("tune_bandwidth: need at least 2 points");
  if (candidates.size() < 2)
    throw std::invalid_argument("tune_bandwidth: need at least 2 candidates");
  for (double c : candidates)
    if (!(c > 0.0))
      throw std::invalid_argument("tune_bandwidth: candidates must be positive");

  const PairwiseSq pw = subsampled_pairwise_sq(points, 2000);
  const double maxd2 =
      pw.d2.empty() ? 0.0 : *std::max_element(pw.d2.begin(), pw.d2.end());
  if (maxd2 == 0.0)
    throw std::runtime_error(
        "tune_bandwidth: degenerate input (all points identical), supply the "
        "bandwidth manually");

  BandwidthScan scan;
  scan.candidates = candidates;
  const int nc = static_cast<int>(candidates.size());
  const double n = static_cast<double>(pw.n);
  scan.kernel_sum.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const double bw2 = candidates[c] * candidates[c];
    double s = 0.0;
    for (double d2 : pw.d2) s += std::exp(-d2 / bw2);
    // Off-diagonal pairs counted twice, diagonal contributes n.
    scan.kernel_sum[c] = (2.0 * s + n) / (n * n);
  }

  // Dimension surrogate: 2 dlogS/dlog(eps^2), the log-log slope of S against
  // the squared bandwidth. Equals the manifold dimension in the scaling
  // regime, and equals dlogS/dlog(eps) in terms of the bandwidth itself.
  scan.dimension.assign(nc, 0.0);
  auto dlog = [&](int hi, int lo) {
    return (std::log(scan.kernel_sum[hi]) - std::log(scan.kernel_sum[lo])) /
           (std::log(candidates[hi]) - std::log(candidates[lo]));
  };
  for (int c = 1; c + 1 < nc; ++c) scan.dimension[c] = dlog(c + 1, c - 1);
  scan.dimension[0] = dlog(1, 0);
  scan.dimension[nc - 1] = dlog(nc - 1, nc - 2);

  // Interior argmax; one-sided endpoint values are kept for inspection only.
  int best = -1;
  for (int c = 1; c + 1 < nc; ++c)
    if (best < 0 || scan.dimension[c] > scan.dimension[best]) best = c;
  if (best < 0 || !(scan.dimension[best] > 0.0))
    throw std::runtime_error(
        "tune_bandwidth: dimension curve is flat, supply the bandwidth manually");
  scan.best_index = best;
  return scan;
}

double tune_bandwidth(const Eigen::MatrixXd& points,
                      const std::vector<double>& candidates) {
  const BandwidthScan scan = tune_bandwidth_scan(points, candidates);
  return scan.candidates[scan.best_index];
}

std::vector<double> default_bandwidth_grid(const Eigen::MatrixXd& points,
                                           int n_candidates) {
  if (n_candidates < 2)
    throw std::invalid_argument("default_bandwidth_grid: need >= 2 candidates");
  PairwiseSq pw = subsampled_pairwise_sq(points, 2000);
  if (pw.d2.empty())
    throw std::invalid_argument("default_bandwidth_grid: need at least 2 points");
  std::nth_element(pw.d2.begin(), pw.d2.begin() + pw.d2.size() / 2, pw.d2.end());
  const double med2 = pw.d2[pw.d2.size() / 2];
  if (med2 == 0.0)
    throw std::runtime_error(
        "default_bandwidth_grid: degenerate input (median pairwise distance zero)");
  std::vector<double> grid(n_candidates);
  const double lo = std::log(1e-3 * med2), hi = std::log(1e3 * med2);
  for (int i = 0; i < n_candidates; ++i) {
    const double sq = std::exp(lo + (hi - lo) * i / (n_candidates - 1));
    grid[i] = std::sqrt(sq);
  }
  return grid;
}

int default_k_nn(int N) { return std::min(N, std::max(1000, N / 10)); }

Eigen::VectorXd SparseKernelMatrix::multiply(
    const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (v.size() != N)
    throw std::invalid_argument("SparseKernelMatrix::multiply: size mismatch");
  Eigen::VectorXd out(N);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < N; ++i) {
    double s = 0.0;
    for (std::int64_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += val[p] * v[col[p]];
    out[i] = s;
  }
  return out;
}

Eigen::MatrixXd SparseKernelMatrix::dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i)
    for (std::int64_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) out(i, col[p]) = val[p];
  return out;
}

SparseKernelMatrix assemble_sparse_kernel(const Eigen::MatrixXd& points,
                                          const KernelConfig& cfg, int k_nn) {
  cfg.validate();
  const int n = static_cast<int>(points.rows());
  if (n < 1) throw std::invalid_argument("assemble_sparse_kernel: empty input");
  if (k_nn < 1) throw std::invalid_argument("assemble_sparse_kernel: k_nn must be >= 1");
  k_nn = std::min(k_nn, n);

  const double bw2 = cfg.bandwidth * cfg.bandwidth;
  const Eigen::MatrixXd pts = points.transpose();  // contiguous column access

  // Per-row top-k selection on kernel values (self always kept: value 1 is
  // maximal for the Gaussian kernel).
  std::vector<std::vector<std::pair<int, double>>> kept(n);
#pragma omp parallel
  {
    std::vector<std::pair<double, int>> row(n);
#pragma omp for schedule(dynamic, 16)
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double d2 = (pts.col(i) - pts.col(j)).squaredNorm();
        row[j] = {std::exp(-d2 / bw2), j};
      }
      std::nth_element(row.begin(), row.begin() + (k_nn - 1), row.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      auto& k = kept[i];
      k.reserve(k_nn);
      // Entries that underflowed to zero carry no neighbor information.
      for (int j = 0; j < k_nn; ++j)
        if (row[j].first > 0.0) k.push_back({row[j].second, row[j].first});
      std::sort(k.begin(), k.end());
    }
  }

  // Union symmetrization: entry (i,j) is retained if j is kept for row i or
  // i is kept for row j; values are untouched (val(i,j) = val(j,i) already).
  std::vector<std::vector<std::pair<int, double>>> reverse(n);
  for (int i = 0; i < n; ++i)
    for (const auto& [j, v] : kept[i]) reverse[j].push_back({i, v});

  SparseKernelMatrix out;
  out.N = n;
  out.k_nn = k_nn;
  out.row_ptr.assign(n + 1, 0);
  std::vector<std::vector<std::pair<int, double>>> rows(n);
  for (int i = 0; i < n; ++i) {
    auto& merged = rows[i];
    merged.reserve(kept[i].size() + reverse[i].size());
    std::merge(kept[i].begin(), kept[i].end(), reverse[i].begin(), reverse[i].end(),
               std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end(),
                             [](const auto& a, const auto& b) {
                               return a.first == b.first;
                             }),
                 merged.end());
    out.row_ptr[i + 1] = out.row_ptr[i] + static_cast<std::int64_t>(merged.size());
    std::vector<std::pair<int, double>>().swap(kept[i]);
    std::vector<std::pair<int, double>>().swap(reverse[i]);
  }
  out.col.resize(out.row_ptr[n]);
  out.val.resize(out.row_ptr[n]);
  for (int i = 0; i < n; ++i) {
    std::int64_t p = out.row_ptr[i];
    for (const auto& [j, v] : rows[i]) {
      out.col[p] = j;
      out.val[p] = v;
      ++p;
    }
    std::vector<std::pair<int, double>>().swap(rows[i]);
  }
  return out;
}

}  // namespace qmcl

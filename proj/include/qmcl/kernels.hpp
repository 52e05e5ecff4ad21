#ifndef QMCL_KERNELS_HPP
#define QMCL_KERNELS_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace qmcl {

struct DelayConfig {
  int Q = 0;  // number of delays; even, 0 disables embedding

  void validate() const;
};

struct KernelConfig {
  double bandwidth = 1.0;

  void validate() const;
};

double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& w,
                       const Eigen::Ref<const Eigen::VectorXd>& wp, double bandwidth);

// Square root of the Gaussian kernel, obtained by scaling the bandwidth by
// sqrt(2).
double sqrt_gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& w,
                            const Eigen::Ref<const Eigen::VectorXd>& wp,
                            double bandwidth);

// Centered delay-coordinate embedding: output row i is the window
// (s_{m-Q/2}, ..., s_{m+Q/2}) concatenated in time order, with center index
// m = i + Q/2. center_index aligns companion series (fluxes, resolved
// samples) to the same centers.
struct DelayEmbedding {
  Eigen::MatrixXd points;          // (N-Q) x ((Q+1)*dim)
  std::vector<int> center_index;   // length N-Q
};
DelayEmbedding delay_embed(const Eigen::MatrixXd& series, const DelayConfig& cfg);

// Bandwidth tuning by grid search: for each candidate eps compute the kernel
// sum S(eps) = (1/n^2) sum_{i,j} exp(-|w_i - w_j|^2 / eps^2) and the dimension
// surrogate d(eps) = 2 dlogS/dlog(eps^2) by centered differences on the log
// grid; the selected bandwidth maximizes d.
struct BandwidthScan {
  std::vector<double> candidates;
  std::vector<double> kernel_sum;  // S(eps)
  std::vector<double> dimension;   // d(eps); endpoints carry one-sided values
  int best_index = -1;
};
BandwidthScan tune_bandwidth_scan(const Eigen::MatrixXd& points,
                                  const std::vector<double>& candidates);
double tune_bandwidth(const Eigen::MatrixXd& points,
                      const std::vector<double>& candidates);

// 64 log-spaced candidates with squared bandwidths spanning
// [1e-3, 1e3] * (median pairwise distance)^2.
std::vector<double> default_bandwidth_grid(const Eigen::MatrixXd& points,
                                           int n_candidates = 64);

// Symmetric kNN-sparsified kernel matrix in CSR form. Entries are raw kernel
// values; a row keeps its k_nn largest values (self included) and the pattern
// is closed under transposition by the union rule.
struct SparseKernelMatrix {
  int N = 0;
  int k_nn = 0;
  std::vector<std::int64_t> row_ptr;  // length N+1
  std::vector<int> col;
  std::vector<double> val;

  std::int64_t nnz() const { return static_cast<std::int64_t>(col.size()); }
  Eigen::VectorXd multiply(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  Eigen::MatrixXd dense() const;  // small-N diagnostic
};

int default_k_nn(int N);  // min(N, max(1000, N/10))

SparseKernelMatrix assemble_sparse_kernel(const Eigen::MatrixXd& points,
                                          const KernelConfig& cfg, int k_nn);

}  // namespace qmcl

#endif

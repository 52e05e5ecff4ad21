#include "qmcl/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmcl {

namespace {

constexpr double kRitzTol = 1e-10;
constexpr int kDenseCutoff = 2000;

void fix_column_signs(Eigen::MatrixXd& V) {
  for (int c = 0; c < V.cols(); ++c) {
    const double scale = V.col(c).cwiseAbs().maxCoeff();
    if (scale == 0.0) continue;
    for (int r = 0; r < V.rows(); ++r) {
      if (std::abs(V(r, c)) > 1e-12 * scale) {
        if (V(r, c) < 0.0) V.col(c) = -V.col(c);
        break;
      }
    }
  }
}

std::vector<int> order_by_modulus(const Eigen::VectorXd& vals) {
  std::vector<int> idx(vals.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(vals[a]) > std::abs(vals[b]);
  });
  return idx;
}

// Thick-restart Lanczos with full reorthogonalization for the symmetric
// operator y = (1/N) K x. Maintains an orthonormal basis V and its image
// W = A V; Rayleigh-Ritz on H = V^T W, restart keeps the leading Ritz
// vectors plus the next expansion direction.
struct LanczosResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

LanczosResult thick_restart_lanczos(const SparseKernelMatrix& K, int L) {
  const int n = K.N;
  const double invn = 1.0 / static_cast<double>(n);
  auto apply = [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(invn * K.multiply(x));
  };

  const int m = std::min(n, std::max(2 * L + 16, L + 32));  // subspace size
  const int max_restarts = 200;

  Eigen::MatrixXd V(n, m), W(n, m);
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);  // deterministic solver seed
  std::normal_distribution<double> gauss(0.0, 1.0);

  // The constant vector is nearly the leading eigenfunction of a kernel
  // matrix; a small deterministic perturbation avoids accidental invariance.
  Eigen::VectorXd v0 = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) v0[i] += 1e-3 * gauss(rng);
  v0.normalize();
  V.col(0) = v0;
  W.col(0) = apply(v0);
  int k = 1;  // number of columns with both V and W = A V valid
  double worst_residual = 0.0;

  auto orthogonalize = [&](Eigen::VectorXd& w, int cols) {
    // Classical Gram-Schmidt, applied twice.
    for (int pass = 0; pass < 2; ++pass)
      w.noalias() -= V.leftCols(cols) * (V.leftCols(cols).transpose() * w);
  };

  for (int restart = 0; restart < max_restarts; ++restart) {
    // Expand to m columns along the Krylov chain: the orthogonal complement
    // of A v_{k-1} is the shared residual direction of the current Ritz
    // pairs, so this continues the Lanczos factorization across restarts.
    while (k < m) {
      Eigen::VectorXd w = W.col(k - 1);
      orthogonalize(w, k);
      double nrm = w.norm();
      int guard = 0;
      while (nrm < 1e-12 && guard++ < 8) {
        for (int i = 0; i < n; ++i) w[i] = gauss(rng);
        orthogonalize(w, k);
        nrm = w.norm();
      }
      if (nrm < 1e-12)
        throw std::runtime_error("compute_basis: Lanczos breakdown, basis exhausted");
      V.col(k) = w / nrm;
      W.col(k) = apply(V.col(k));
      ++k;
    }

    // Rayleigh-Ritz on the m-dimensional subspace.
    Eigen::MatrixXd H = V.transpose() * W;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("compute_basis: projected eigensolve failed");

    // Ritz pairs sorted by decreasing modulus.
    std::vector<int> order = order_by_modulus(es.eigenvalues());
    Eigen::VectorXd theta(m);
    Eigen::MatrixXd S(m, m);
    for (int i = 0; i < m; ++i) {
      theta[i] = es.eigenvalues()[order[i]];
      S.col(i) = es.eigenvectors().col(order[i]);
    }

    Eigen::MatrixXd X = V * S;   // Ritz vectors
    Eigen::MatrixXd AX = W * S;  // their images; A X = W S exactly

    // Residual check for the wanted pairs.
    bool converged = true;
    worst_residual = 0.0;
    for (int i = 0; i < L; ++i) {
      const double res = (AX.col(i) - theta[i] * X.col(i)).norm();
      worst_residual = std::max(worst_residual, res);
      if (res > kRitzTol * std::max(1.0, std::abs(theta[0]))) converged = false;
    }
    if (converged || n == m) {
      LanczosResult out;
      out.values = theta.head(L);
      out.vectors = X.leftCols(L);
      return out;
    }

    // Thick restart: keep the leading block and continue expanding from the
    // image of the last kept vector.
    const int keep = std::min(m - 1, L + std::max(8, L / 4));
    V.leftCols(keep) = X.leftCols(keep);
    W.leftCols(keep) = AX.leftCols(keep);
    k = keep;
  }
  throw std::runtime_error(
      "compute_basis: iterative eigensolver failed to converge (worst Ritz "
      "residual " +
      std::to_string(worst_residual) + " after restart limit)");
}

}  // namespace

EigenBasis compute_basis(const SparseKernelMatrix& K, int L, EigSolver solver) {
  const int n = K.N;
  if (L < 1 || L > n)
    throw std::invalid_argument("compute_basis: require 1 <= L <= N");
  if (solver == EigSolver::Auto)
    solver = (n <= kDenseCutoff) ? EigSolver::Dense : EigSolver::Iterative;

  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  if (solver == EigSolver::Dense) {
    EigenPairs pairs = dense_eig_oracle(K.dense() / static_cast<double>(n));
    values = pairs.values.head(L);
    vectors = pairs.vectors.leftCols(L);
  } else {
    LanczosResult res = thick_restart_lanczos(K, L);
    values = res.values;
    vectors = res.vectors;
  }

  EigenBasis basis;
  basis.N = n;
  basis.L = L;
  basis.lambda = values;
  basis.Phi = std::sqrt(static_cast<double>(n)) * vectors;
  fix_column_signs(basis.Phi);
  return basis;
}

EigenPairs dense_eig_oracle(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols())
    throw std::invalid_argument("dense_eig_oracle: matrix must be square");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("dense_eig_oracle: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense_eig_oracle: eigensolver failed");

  const int n = static_cast<int>(M.rows());
  std::vector<int> order = order_by_modulus(es.eigenvalues());
  EigenPairs out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.values[i] = es.eigenvalues()[order[i]];
    out.vectors.col(i) = es.eigenvectors().col(order[i]);
  }
  return out;
}

}  // namespace qmcl

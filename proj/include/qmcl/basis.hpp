#ifndef QMCL_BASIS_HPP
#define QMCL_BASIS_HPP

#include <Eigen/Dense>

#include "qmcl/kernels.hpp"

namespace qmcl {

// Data-driven basis from the kernel eigenproblem (1/N) K phi = lambda phi.
// Columns of Phi are scaled to the empirical normalization Phi^T Phi = N I;
// eigenvalues are sorted by decreasing modulus and each column is signed so
// its first nonzero coordinate is positive.
struct EigenBasis {
  int N = 0;
  int L = 0;
  Eigen::MatrixXd Phi;      // N x L
  Eigen::VectorXd lambda;   // length L
};

enum class EigSolver { Auto, Dense, Iterative };

EigenBasis compute_basis(const SparseKernelMatrix& K, int L,
                         EigSolver solver = EigSolver::Auto);

// Full spectrum of a small symmetric matrix, sorted by decreasing modulus,
// with machine-precision residuals. Rejects asymmetry beyond 1e-12.
struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // orthonormal columns
};
EigenPairs dense_eig_oracle(const Eigen::MatrixXd& M);

}  // namespace qmcl

#endif

#ifndef QMCL_OPERATORS_HPP
#define QMCL_OPERATORS_HPP

#include <memory>

#include <Eigen/Dense>

#include "qmcl/basis.hpp"
#include "qmcl/kernels.hpp"

namespace qmcl {

// Compression of pointwise multiplication by f onto the eigenbasis:
// A = (1/N) Phi^T diag(f) Phi. Symmetric; positive semidefinite when f >= 0,
// with spectrum inside [min f, max f].
struct ObservableMatrix {
  Eigen::MatrixXd A;
};

// Projected Koopman (left shift) matrix; spectral norm at most 1.
struct KoopmanMatrix {
  Eigen::MatrixXd U;
};

// Full eigendecomposition of an observable, eigenvalues ascending.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
};

// Effect-valued feature map over the training points: evaluating at x yields
// the multiplication matrix A of the square-root kernel samples
// f_m = sqrt(k(x, x_m)); the quantum effect itself is A^2.
struct EffectMapModel {
  std::shared_ptr<const EigenBasis> basis;
  Eigen::MatrixXd train_x;  // N x d_X, aligned with the basis samples
  KernelConfig kernel;
};

ObservableMatrix multiplication_operator(const EigenBasis& basis,
                                         const Eigen::Ref<const Eigen::VectorXd>& f);

// Matrix-free form: A xi = (1/N) Phi^T (f .* (Phi xi)), cost O(N L).
Eigen::VectorXd apply_observable(const EigenBasis& basis,
                                 const Eigen::Ref<const Eigen::VectorXd>& f,
                                 const Eigen::Ref<const Eigen::VectorXd>& xi);

// U_ij = (1/N) sum_{m=0}^{N-2} Phi_mi Phi_{m+1,j}; requires time-ordered
// samples from a single contiguous trajectory.
KoopmanMatrix koopman_matrix(const EigenBasis& basis);

SpectralDecomposition spectral_decompose(const ObservableMatrix& obs);

// Square-root-kernel feature evaluations at x, one per training point.
// Throws "point off training support" when all values underflow to zero.
Eigen::VectorXd effect_feature_values(const EffectMapModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& x);

Eigen::VectorXd effect_matrix_apply(const EffectMapModel& model,
                                    const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Eigen::Ref<const Eigen::VectorXd>& xi);

ObservableMatrix effect_matrix_full(const EffectMapModel& model,
                                    const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace qmcl

#endif

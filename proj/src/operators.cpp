#include "qmcl/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace qmcl {

ObservableMatrix multiplication_operator(const EigenBasis& basis,
                                         const Eigen::Ref<const Eigen::VectorXd>& f) {
  if (f.size() != basis.N)
    throw std::invalid_argument("multiplication_operator: sample length mismatch");
  Eigen::MatrixXd a = basis.Phi.transpose() * (f.asDiagonal() * basis.Phi) /
                      static_cast<double>(basis.N);
  a = 0.5 * (a + a.transpose()).eval();  // remove roundoff asymmetry
  return {std::move(a)};
}

Eigen::VectorXd apply_observable(const EigenBasis& basis,
                                 const Eigen::Ref<const Eigen::VectorXd>& f,
                                 const Eigen::Ref<const Eigen::VectorXd>& xi) {
  if (f.size() != basis.N)
    throw std::invalid_argument("apply_observable: sample length mismatch");
  if (xi.size() != basis.L)
    throw std::invalid_argument("apply_observable: coefficient length mismatch");
  Eigen::VectorXd values = basis.Phi * xi;
  values.array() *= f.array();
  return basis.Phi.transpose() * values / static_cast<double>(basis.N);
}

KoopmanMatrix koopman_matrix(const EigenBasis& basis) {
  const int n = basis.N;
  if (n < 2) throw std::invalid_argument("koopman_matrix: need at least 2 samples");
  Eigen::MatrixXd u = basis.Phi.topRows(n - 1).transpose() *
                      basis.Phi.bottomRows(n - 1) / static_cast<double>(n);
  return {std::move(u)};
}

SpectralDecomposition spectral_decompose(const ObservableMatrix& obs) {
  const Eigen::MatrixXd& a = obs.A;
  if (a.rows() != a.cols())
    throw std::invalid_argument("spectral_decompose: matrix must be square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("spectral_decompose: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral_decompose: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Eigen::VectorXd effect_feature_values(const EffectMapModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!model.basis) throw std::logic_error("effect map: basis not bound");
  if (x.size() != model.train_x.cols())
    throw std::invalid_argument("effect map: point dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("effect map: non-finite point");
  const int n = static_cast<int>(model.train_x.rows());
  // sqrt(k) of the Gaussian kernel: bandwidth scaled by sqrt(2).
  const double bw2 = 2.0 * model.kernel.bandwidth * model.kernel.bandwidth;
  Eigen::VectorXd f(n);
  for (int m = 0; m < n; ++m)
    f[m] = std::exp(-(model.train_x.row(m).transpose() - x).squaredNorm() / bw2);
  if (f.maxCoeff() <= 0.0)
    throw std::runtime_error(
        "effect map: point off training support (all kernel values are zero)");
  return f;
}

Eigen::VectorXd effect_matrix_apply(const EffectMapModel& model,
                                    const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Eigen::Ref<const Eigen::VectorXd>& xi) {
  return apply_observable(*model.basis, effect_feature_values(model, x), xi);
}

ObservableMatrix effect_matrix_full(const EffectMapModel& model,
                                    const Eigen::Ref<const Eigen::VectorXd>& x) {
  return multiplication_operator(*model.basis, effect_feature_values(model, x));
}

}  // namespace qmcl

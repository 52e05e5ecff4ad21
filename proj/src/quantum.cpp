#include "qmcl/quantum.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace qmcl {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kTraceTol = 1e-10;
constexpr double kPsdTol = 1e-8;
constexpr double kProbClamp = 1e-12;

}  // namespace

void validate_state(const QuantumState& state) {
  if (const auto* pure = std::get_if<PureState>(&state)) {
    if (pure->xi.size() == 0) throw std::invalid_argument("state: empty vector");
    if (std::abs(pure->xi.norm() - 1.0) > kNormTol)
      throw std::invalid_argument("state: coefficient vector is not unit norm");
    return;
  }
  const auto& rho = std::get<DensityMatrix>(state).rho;
  if (rho.rows() != rho.cols()) throw std::invalid_argument("state: rho not square");
  if (std::abs(rho.trace() - 1.0) > kTraceTol)
    throw std::invalid_argument("state: rho trace differs from 1");
  if ((rho - rho.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("state: rho is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho);
  if (es.eigenvalues().minCoeff() < -kPsdTol)
    throw std::invalid_argument("state: rho is not positive semidefinite");
}

double expectation(const QuantumState& state, const ObservableMatrix& obs) {
  if (const auto* pure = std::get_if<PureState>(&state)) {
    if (pure->xi.size() != obs.A.rows())
      throw std::invalid_argument("expectation: dimension mismatch");
    return pure->xi.dot(obs.A * pure->xi);
  }
  const auto& rho = std::get<DensityMatrix>(state).rho;
  if (rho.rows() != obs.A.rows())
    throw std::invalid_argument("expectation: dimension mismatch");
  // tr(rho A) as an elementwise sum, O(L^2) instead of forming the product.
  return rho.cwiseProduct(obs.A.transpose()).sum();
}

QuantumState evolve_transfer(const QuantumState& state, const KoopmanMatrix& koopman) {
  if (const auto* pure = std::get_if<PureState>(&state)) {
    if (pure->xi.size() != koopman.U.rows())
      throw std::invalid_argument("evolve_transfer: dimension mismatch");
    Eigen::VectorXd v = koopman.U.transpose() * pure->xi;
    const double nrm = v.norm();
    if (!(nrm > 1e-300))
      throw std::runtime_error("evolve_transfer: state annihilated by transfer step");
    PureState out{v / nrm};
    assert(std::abs(out.xi.norm() - 1.0) < 1e-12);
    return out;
  }
  const auto& rho = std::get<DensityMatrix>(state).rho;
  if (rho.rows() != koopman.U.rows())
    throw std::invalid_argument("evolve_transfer: dimension mismatch");
  Eigen::MatrixXd next = koopman.U.transpose() * rho * koopman.U;
  const double tr = next.trace();
  if (!(tr > 1e-300))
    throw std::runtime_error("evolve_transfer: state annihilated by transfer step");
  next /= tr;
  assert(std::abs(next.trace() - 1.0) < 1e-10);
  return DensityMatrix{std::move(next)};
}

QuantumState condition(const QuantumState& state, const ObservableMatrix& sqrt_effect) {
  if (const auto* pure = std::get_if<PureState>(&state)) {
    if (pure->xi.size() != sqrt_effect.A.rows())
      throw std::invalid_argument("condition: dimension mismatch");
    return condition_pure(*pure,
                          [&](const Eigen::VectorXd& xi) { return sqrt_effect.A * xi; });
  }
  const auto& rho = std::get<DensityMatrix>(state).rho;
  if (rho.rows() != sqrt_effect.A.rows())
    throw std::invalid_argument("condition: dimension mismatch");
  Eigen::MatrixXd next = sqrt_effect.A * rho * sqrt_effect.A;
  const double tr = next.trace();
  if (!(tr > 1e-300)) throw std::runtime_error("condition: effect annihilates state");
  next /= tr;
  next = 0.5 * (next + next.transpose()).eval();
  return DensityMatrix{std::move(next)};
}

ProbabilityVector measurement_distribution(const QuantumState& state,
                                           const SpectralDecomposition& dec) {
  const int l = static_cast<int>(dec.eigenvalues.size());
  Eigen::VectorXd p(l);
  if (const auto* pure = std::get_if<PureState>(&state)) {
    if (pure->xi.size() != l)
      throw std::invalid_argument("measurement_distribution: dimension mismatch");
    p = (dec.eigenvectors.transpose() * pure->xi).array().square();
  } else {
    const auto& rho = std::get<DensityMatrix>(state).rho;
    if (rho.rows() != l)
      throw std::invalid_argument("measurement_distribution: dimension mismatch");
    for (int i = 0; i < l; ++i)
      p[i] = dec.eigenvectors.col(i).dot(rho * dec.eigenvectors.col(i));
  }
  for (int i = 0; i < l; ++i) {
    if (p[i] < -kProbClamp)
      throw std::runtime_error(
          "measurement_distribution: probability below clamp threshold (PSD "
          "invariant broken upstream)");
    if (p[i] < 0.0) p[i] = 0.0;
  }
  const double sum = p.sum();
  if (!(sum > 0.0))
    throw std::runtime_error("measurement_distribution: all probabilities vanish");
  return {p / sum};
}

double sample_measurement(const ProbabilityVector& p,
                          const Eigen::Ref<const Eigen::VectorXd>& spectrum,
                          std::mt19937_64& rng) {
  if (p.p.size() != spectrum.size())
    throw std::invalid_argument("sample_measurement: dimension mismatch");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double cum = 0.0;
  for (int i = 0; i < p.p.size(); ++i) {
    cum += p.p[i];
    if (u <= cum) return spectrum[i];
  }
  return spectrum[spectrum.size() - 1];  // roundoff in the cumulative sum
}

PureState uninformative_state(const EigenBasis& basis) {
  Eigen::VectorXd c = basis.Phi.colwise().mean();
  const double nrm = c.norm();
  if (!(nrm > 0.0))
    throw std::runtime_error(
        "uninformative_state: constant function has no component in the basis");
  return {c / nrm};
}

DensityMatrix feature_map_state(const EffectMapModel& model,
                                const Eigen::Ref<const Eigen::VectorXd>& x) {
  const ObservableMatrix a = effect_matrix_full(model, x);
  Eigen::MatrixXd effect = a.A * a.A;  // the effect is the square of the factor
  const double tr = effect.trace();
  if (!(tr > 1e-300))
    throw std::runtime_error("feature_map_state: effect has zero trace");
  effect /= tr;
  effect = 0.5 * (effect + effect.transpose()).eval();
  return {std::move(effect)};
}

}  // namespace qmcl

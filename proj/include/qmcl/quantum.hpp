#ifndef QMCL_QUANTUM_HPP
#define QMCL_QUANTUM_HPP

#include <random>
#include <variant>

#include <Eigen/Dense>

#include "qmcl/basis.hpp"
#include "qmcl/operators.hpp"

namespace qmcl {

// Pure state: unit coefficient vector in the eigenbasis. All pipeline
// matrices are real symmetric, so states are real throughout.
struct PureState {
  Eigen::VectorXd xi;
};

// Mixed state: trace-1, symmetric, positive semidefinite density matrix.
struct DensityMatrix {
  Eigen::MatrixXd rho;
};

using QuantumState = std::variant<PureState, DensityMatrix>;

struct ProbabilityVector {
  Eigen::VectorXd p;  // nonnegative, sums to 1
};

void validate_state(const QuantumState& state);

double expectation(const QuantumState& state, const ObservableMatrix& obs);

// Transfer-operator step: pure U^T xi renormalized, mixed U^T rho U
// renormalized by trace. Preserves purity. Throws when the state is
// annihilated by the transfer step.
QuantumState evolve_transfer(const QuantumState& state, const KoopmanMatrix& koopman);

// Conditioning by an effect with square-root factor A (the effect is A^2):
// pure A xi / |A xi|, mixed A rho A / tr(A rho A). Throws "effect annihilates
// state" when the normalizer underflows.
QuantumState condition(const QuantumState& state, const ObservableMatrix& sqrt_effect);

// Matrix-free pure-state variant used in the closure loop; applier must
// compute xi -> A xi for the square-root effect factor.
template <typename Applier>
PureState condition_pure(const PureState& state, Applier&& applier) {
  Eigen::VectorXd v = applier(state.xi);
  const double nrm = v.norm();
  if (!(nrm > 1e-300))
    throw std::runtime_error("condition: effect annihilates state");
  return {v / nrm};
}

ProbabilityVector measurement_distribution(const QuantumState& state,
                                           const SpectralDecomposition& dec);

// Inverse-CDF draw from the spectrum using a single uniform variate.
double sample_measurement(const ProbabilityVector& p,
                          const Eigen::Ref<const Eigen::VectorXd>& spectrum,
                          std::mt19937_64& rng);

// Pure state with coefficients c_l = (1/N) sum_m Phi_ml, the expansion of
// the constant function; carries no information about the resolved state.
PureState uninformative_state(const EigenBasis& basis);

// Normalized effect matrix A^2 / tr(A^2) as a (generally mixed) initial
// state.
DensityMatrix feature_map_state(const EffectMapModel& model,
                                const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace qmcl

#endif

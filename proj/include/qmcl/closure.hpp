#ifndef QMCL_CLOSURE_HPP
#define QMCL_CLOSURE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmcl/basis.hpp"
#include "qmcl/dynamics.hpp"
#include "qmcl/kernels.hpp"
#include "qmcl/operators.hpp"
#include "qmcl/quantum.hpp"

namespace qmcl {

// Time-ordered training samples from a single contiguous trajectory at fixed
// timestep: basis inputs w, resolved variables x, and fluxes z, row-aligned.
struct TrajectoryDataset {
  double dt = 0.01;
  Eigen::MatrixXd w;  // N x d_W
  Eigen::MatrixXd x;  // N x d_X
  Eigen::MatrixXd z;  // N x d
  std::string system;
  std::uint64_t seed = 0;
  double equilibration_time = 0.0;

  void validate() const;
};

struct TrainingConfig {
  int L = 0;                              // basis dimension
  int k_nn = 0;                           // 0 selects the default rule
  std::optional<double> basis_bandwidth;  // absent: tuned automatically
  double feature_bandwidth = 2.0;         // epsilon of the effect-map kernel
  int delays = 0;                         // Q; even, 0 disables embedding
  int steps_per_conditioning = 1;         // r
  EigSolver solver = EigSolver::Auto;

  void validate() const;
};

// Trained bundle: basis, Koopman matrix, flux observables with their
// spectral decompositions, and the effect map over the (trimmed) resolved
// training samples. Immutable once built; shareable across threads.
struct ClosureModel {
  std::shared_ptr<const EigenBasis> basis;
  KoopmanMatrix koopman;
  std::vector<ObservableMatrix> flux_observables;
  std::vector<SpectralDecomposition> flux_spectra;
  EffectMapModel effect_map;
  double dt = 0.01;
  int steps_per_conditioning = 1;  // r
  int delays = 0;
  double basis_bandwidth = 0.0;
  std::string resolved_field;  // "l63" | "l96"
  // System parameters for the resolved vector field when resolved_field ==
  // "l96"; train() cannot infer them from the samples, so callers must set
  // them to the values the dataset was generated with (the CLI copies them
  // from the dataset metadata).
  L96Params l96;
  double palmer_sigma = 0.0;  // std of the scalar flux samples when d == 1

  int flux_dim() const { return static_cast<int>(flux_observables.size()); }
  int resolved_dim() const { return static_cast<int>(effect_map.train_x.cols()); }
  Eigen::VectorXd resolved_velocity(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& z) const;
};

struct ClosureState {
  Eigen::VectorXd x;
  QuantumState q;
  int step_in_cycle = 0;  // conditioning fires when this wraps at r
};

enum class InitMode { Uninformative, FeatureMap };
enum class RunMode { Deterministic, Stochastic };

ClosureModel train(const TrajectoryDataset& data, const TrainingConfig& cfg);

ClosureState initialize(const ClosureModel& model, const Eigen::VectorXd& x0,
                        InitMode mode = InitMode::Uninformative);

struct CycleResult {
  Eigen::MatrixXd x_steps;     // r x d_X, the states after each sub-step
  Eigen::MatrixXd flux_steps;  // r x d, the fluxes used for each sub-step
  ClosureState state;
};

// One forecast-analysis cycle: r classical/transfer sub-steps, each emitting
// the flux from the evolving prior state, followed by one conditioning on
// the effect at the final resolved state.
CycleResult cycle_deterministic(const ClosureModel& model, const ClosureState& state);
CycleResult cycle_stochastic(const ClosureModel& model, const ClosureState& state,
                             std::mt19937_64& rng);

struct RunOptions {
  RunMode mode = RunMode::Deterministic;
  // On effect annihilation, reset the quantum state to the uninformative
  // state and log the event instead of aborting.
  bool recover_uninformative = false;
  std::ostream* event_log = nullptr;
};

struct RunResult {
  Eigen::MatrixXd x;     // n_steps x d_X
  Eigen::MatrixXd flux;  // n_steps x d
  ClosureState final_state;
  int recoveries = 0;
};

// March n_steps, conditioning every r steps; a partial final cycle emits its
// classical steps but skips the conditioning. Errors are reported with the
// offending step index.
RunResult run(const ClosureModel& model, ClosureState state, int n_steps,
              const RunOptions& options, std::mt19937_64& rng);

}  // namespace qmcl

#endif

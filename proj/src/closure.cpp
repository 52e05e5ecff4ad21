#include "qmcl/closure.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace qmcl {

void TrajectoryDataset::validate() const {
  const auto n = w.rows();
  if (n < 2) throw std::invalid_argument("dataset: need at least 2 samples");
  if (x.rows() != n || z.rows() != n)
    throw std::invalid_argument("dataset: w, x, z row counts differ");
  if (!(dt > 0.0)) throw std::invalid_argument("dataset: dt must be positive");
}

void TrainingConfig::validate() const {
  if (L < 1) throw std::invalid_argument("training: L must be >= 1");
  if (k_nn < 0) throw std::invalid_argument("training: k_nn must be >= 0");
  if (basis_bandwidth && !(*basis_bandwidth > 0.0))
    throw std::invalid_argument("training: basis bandwidth must be positive");
  if (!(feature_bandwidth > 0.0))
    throw std::invalid_argument("training: feature bandwidth must be positive");
  if (delays < 0 || delays % 2 != 0)
    throw std::invalid_argument("training: delays must be even and nonnegative");
  if (steps_per_conditioning < 1)
    throw std::invalid_argument("training: steps per conditioning must be >= 1");
}

Eigen::VectorXd ClosureModel::resolved_velocity(const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& z) const {
  if (resolved_field == "l63") {
    if (x.size() != 2 || z.size() != 1)
      throw std::invalid_argument("resolved_velocity: l63 expects x in R^2, scalar z");
    return l63_resolved_field(x.head<2>(), z[0]);
  }
  if (resolved_field == "l96") return l96_resolved_field(x, z, l96);
  throw std::logic_error("closure model: unknown resolved field '" + resolved_field +
                         "'");
}

ClosureModel train(const TrajectoryDataset& data, const TrainingConfig& cfg) {
  data.validate();
  cfg.validate();

  const int n_raw = static_cast<int>(data.w.rows());
  if (cfg.L > n_raw - cfg.delays)
    throw std::invalid_argument("training: L exceeds the trimmed sample count");

  // Delay embedding of the basis inputs; companion series are trimmed to the
  // same window centers.
  Eigen::MatrixXd w_eff;
  Eigen::MatrixXd x_eff, z_eff;
  if (cfg.delays > 0) {
    DelayEmbedding emb = delay_embed(data.w, DelayConfig{cfg.delays});
    w_eff = std::move(emb.points);
    const int n = static_cast<int>(w_eff.rows());
    x_eff.resize(n, data.x.cols());
    z_eff.resize(n, data.z.cols());
    for (int i = 0; i < n; ++i) {
      x_eff.row(i) = data.x.row(emb.center_index[i]);
      z_eff.row(i) = data.z.row(emb.center_index[i]);
    }
  } else {
    w_eff = data.w;
    x_eff = data.x;
    z_eff = data.z;
  }
  const int n = static_cast<int>(w_eff.rows());

  ClosureModel model;
  model.dt = data.dt;
  model.steps_per_conditioning = cfg.steps_per_conditioning;
  model.delays = cfg.delays;
  model.resolved_field = data.system;

  model.basis_bandwidth = cfg.basis_bandwidth
                              ? *cfg.basis_bandwidth
                              : tune_bandwidth(w_eff, default_bandwidth_grid(w_eff));

  const int k_nn = cfg.k_nn > 0 ? cfg.k_nn : default_k_nn(n);
  SparseKernelMatrix kernel =
      assemble_sparse_kernel(w_eff, KernelConfig{model.basis_bandwidth}, k_nn);

  model.basis = std::make_shared<EigenBasis>(compute_basis(kernel, cfg.L, cfg.solver));

  model.koopman = koopman_matrix(*model.basis);

  const int d = static_cast<int>(z_eff.cols());
  model.flux_observables.reserve(d);
  model.flux_spectra.reserve(d);
  for (int i = 0; i < d; ++i) {
    model.flux_observables.push_back(multiplication_operator(*model.basis, z_eff.col(i)));
    model.flux_spectra.push_back(spectral_decompose(model.flux_observables.back()));
  }

  model.effect_map.basis = model.basis;
  model.effect_map.train_x = std::move(x_eff);
  model.effect_map.kernel = KernelConfig{cfg.feature_bandwidth};

  if (d == 1) {
    const double mean = z_eff.col(0).mean();
    model.palmer_sigma =
        std::sqrt((z_eff.col(0).array() - mean).square().sum() / n);
  }
  return model;
}

ClosureState initialize(const ClosureModel& model, const Eigen::VectorXd& x0,
                        InitMode mode) {
  if (x0.size() != model.resolved_dim())
    throw std::invalid_argument("initialize: resolved state dimension mismatch");
  ClosureState state;
  state.x = x0;
  if (mode == InitMode::Uninformative) {
    state.q = uninformative_state(*model.basis);
  } else {
    state.q = feature_map_state(model.effect_map, x0);
  }
  state.step_in_cycle = 0;
  return state;
}

namespace {

Eigen::VectorXd deterministic_flux(const ClosureModel& model, const QuantumState& q) {
  const int d = model.flux_dim();
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z[i] = expectation(q, model.flux_observables[i]);
  return z;
}

Eigen::VectorXd stochastic_flux(const ClosureModel& model, const QuantumState& q,
                                std::mt19937_64& rng) {
  const int d = model.flux_dim();
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) {
    const ProbabilityVector p = measurement_distribution(q, model.flux_spectra[i]);
    z[i] = sample_measurement(p, model.flux_spectra[i].eigenvalues, rng);
  }
  return z;
}

QuantumState condition_on_effect(const ClosureModel& model, const QuantumState& q,
                                 const Eigen::VectorXd& x) {
  if (const auto* pure = std::get_if<PureState>(&q)) {
    // Matrix-free path: O(N(d_X + L)) per conditioning.
    return condition_pure(*pure, [&](const Eigen::VectorXd& xi) {
      return effect_matrix_apply(model.effect_map, x, xi);
    });
  }
  return condition(q, effect_matrix_full(model.effect_map, x));
}

struct StepOutput {
  Eigen::VectorXd x;
  Eigen::VectorXd flux;
};

// One sub-step: flux from the evolving prior, classical RK4 step, transfer
// step; fires the conditioning when the cycle wraps at r.
StepOutput advance_step(const ClosureModel& model, ClosureState& state, RunMode mode,
                        std::mt19937_64& rng, const RunOptions* options,
                        int global_step, int* recoveries) {
  const Eigen::VectorXd z = mode == RunMode::Deterministic
                                ? deterministic_flux(model, state.q)
                                : stochastic_flux(model, state.q, rng);
  auto field = [&model](const Eigen::VectorXd& x, const Eigen::VectorXd& zz) {
    return model.resolved_velocity(x, zz);
  };
  state.x = rk4_step(field, state.x, z, model.dt);
  state.q = evolve_transfer(state.q, model.koopman);
  state.step_in_cycle += 1;

  if (state.step_in_cycle >= model.steps_per_conditioning) {
    bool conditioned = true;
    try {
      state.q = condition_on_effect(model, state.q, state.x);
    } catch (const std::runtime_error& err) {
      if (options && options->recover_uninformative) {
        conditioned = false;
        state.q = uninformative_state(*model.basis);
        if (recoveries) ++(*recoveries);
        if (options->event_log)
          *options->event_log << "recovery step=" << global_step
                              << " reason=effect-annihilation\n";
      } else {
        throw;
      }
    }
    state.step_in_cycle = 0;
    if (conditioned && options && options->event_log)
      *options->event_log << "conditioning step=" << global_step << "\n";
  }
  return {state.x, z};
}

CycleResult run_cycle(const ClosureModel& model, const ClosureState& start, RunMode mode,
                      std::mt19937_64& rng) {
  const int r = model.steps_per_conditioning;
  CycleResult out;
  out.x_steps.resize(r, start.x.size());
  out.flux_steps.resize(r, model.flux_dim());
  out.state = start;
  for (int j = 0; j < r; ++j) {
    StepOutput step = advance_step(model, out.state, mode, rng, nullptr, j + 1, nullptr);
    out.x_steps.row(j) = step.x.transpose();
    out.flux_steps.row(j) = step.flux.transpose();
  }
  return out;
}

}  // namespace

CycleResult cycle_deterministic(const ClosureModel& model, const ClosureState& state) {
  std::mt19937_64 unused(0);
  return run_cycle(model, state, RunMode::Deterministic, unused);
}

CycleResult cycle_stochastic(const ClosureModel& model, const ClosureState& state,
                             std::mt19937_64& rng) {
  return run_cycle(model, state, RunMode::Stochastic, rng);
}

namespace {

// Cheap normalization check applied periodically during long runs; the full
// PSD validation is reserved for tests.
void check_state_normalization(const QuantumState& q, int step) {
  double defect;
  if (const auto* pure = std::get_if<PureState>(&q))
    defect = std::abs(pure->xi.norm() - 1.0);
  else
    defect = std::abs(std::get<DensityMatrix>(q).rho.trace() - 1.0);
  if (defect > 1e-9)
    throw std::runtime_error("state normalization drifted by " +
                             std::to_string(defect) + " at step " +
                             std::to_string(step));
}

}  // namespace

RunResult run(const ClosureModel& model, ClosureState state, int n_steps,
              const RunOptions& options, std::mt19937_64& rng) {
  if (n_steps < 0) throw std::invalid_argument("run: n_steps must be >= 0");
  RunResult out;
  out.x.resize(n_steps, state.x.size());
  out.flux.resize(n_steps, model.flux_dim());
  for (int step = 0; step < n_steps; ++step) {
    try {
      StepOutput s = advance_step(model, state, options.mode, rng, &options, step + 1,
                                  &out.recoveries);
      out.x.row(step) = s.x.transpose();
      out.flux.row(step) = s.flux.transpose();
    } catch (const std::runtime_error& err) {
      throw std::runtime_error("closure run: " + std::string(err.what()) +
                               " at step " + std::to_string(step + 1));
    }
    if ((step & 1023) == 0) check_state_normalization(state.q, step + 1);
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace qmcl

#ifndef QMCL_DYNAMICS_HPP
#define QMCL_DYNAMICS_HPP

#include <functional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qmcl {

// Lorenz 63 in the EOF coordinate system of Palmer's closure study.
// Coordinates (a1, a2, a3) have decreasing variance; the resolved pair is
// x = (a1, a2) and the flux term is z = a3.
struct L63State {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
};

struct L96Params {
  int K = 9;
  int J = 8;
  double F = 10.0;  // forcing; not fixed by the reference setup, keep configurable
  double h_x = -0.8;
  double h_y = 1.0;
  double epsilon_scale = 1.0 / 128.0;  // timescale separation of the fast variables

  void validate() const;
};

// Slow variables x (length K) and fast variables y (J x K); column k of y is
// the fast set attached to x_k. Cyclic index conventions x_{k+K} = x_k,
// y_{j,k+K} = y_{j,k}, y_{j+J,k} = y_{j,k+1} are enforced by index arithmetic.
struct L96State {
  Eigen::VectorXd x;
  Eigen::MatrixXd y;
};

struct IntegratorConfig {
  double dt = 0.01;   // outer sampling step
  int substeps = 1;   // inner fixed-step RK4 subdivisions

  void validate() const;
};

Eigen::Vector3d l63_vector_field(const L63State& a);

// First two components of the L63 field with a3 replaced by the supplied flux.
Eigen::Vector2d l63_resolved_field(const Eigen::Vector2d& x, double z);

L96State l96_vector_field(const L96State& s, const L96Params& p);

// Column means of the fast variables: z_k = (1/J) sum_j y_{j,k}.
Eigen::VectorXd l96_flux(const Eigen::MatrixXd& y);

// Slow equations with the coupling term -h_x * z_k supplied as a flux.
Eigen::VectorXd l96_resolved_field(const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                                   const L96Params& p);

using FluxField =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

// One classical RK4 step; the flux z is held fixed through all four stages.
// Throws if the field returns a non-finite value.
Eigen::VectorXd rk4_step(const FluxField& field, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& z, double dt);

// Fixed-step RK4 truth integration sampled at cfg.dt; returns n_steps + 1
// states. Aborts with the offending step index if the state blows up.
std::vector<L63State> integrate_truth(const L63State& init, const IntegratorConfig& cfg,
                                      int n_steps);
std::vector<L96State> integrate_truth(const L96State& init, const L96Params& p,
                                      const IntegratorConfig& cfg, int n_steps);

// One step of the i.i.d. Gaussian closure baseline: draws z ~ N(0, sigma^2)
// and advances the resolved variables one dt. The resolved step defaults to
// RK4 for parity with the closure runs; euler switches to a forward Euler
// step matching the original scheme.
std::pair<Eigen::Vector2d, double> palmer_gaussian_step(const Eigen::Vector2d& x,
                                                        double sigma, double dt,
                                                        std::mt19937_64& rng,
                                                        bool euler = false);

}  // namespace qmcl

#endif

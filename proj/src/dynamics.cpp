#include "qmcl/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qmcl {

void L96Params::validate() const {
  if (K < 4) throw std::invalid_argument("L96Params: K must be >= 4 (cyclic stencil)");
  if (J < 1) throw std::invalid_argument("L96Params: J must be >= 1");
  if (!(epsilon_scale > 0.0))
    throw std::invalid_argument("L96Params: epsilon_scale must be positive");
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("IntegratorConfig: dt must be positive");
  if (substeps < 1)
    throw std::invalid_argument("IntegratorConfig: substeps must be >= 1");
}

Eigen::Vector3d l63_vector_field(const L63State& a) {
  const double a1 = a.a1, a2 = a.a2, a3 = a.a3;
  Eigen::Vector3d v;
  v[0] = 2.3 * a1 - 6.2 * a3 - 0.49 * a1 * a2 - 0.57 * a2 * a3;
  v[1] = -62.0 - 2.7 * a2 + 0.49 * a1 * a1 - 0.49 * a3 * a3 + 0.14 * a1 * a3;
  v[2] = -0.63 * a1 - 13.0 * a3 + 0.43 * a1 * a2 + 0.49 * a2 * a3;
  return v;
}

Eigen::Vector2d l63_resolved_field(const Eigen::Vector2d& x, double z) {
  const double a1 = x[0], a2 = x[1], a3 = z;
  Eigen::Vector2d v;
  v[0] = 2.3 * a1 - 6.2 * a3 - 0.49 * a1 * a2 - 0.57 * a2 * a3;
  v[1] = -62.0 - 2.7 * a2 + 0.49 * a1 * a1 - 0.49 * a3 * a3 + 0.14 * a1 * a3;
  return v;
}

namespace {

inline int wrap(int i, int n) {
  int r = i % n;
  return r < 0 ? r + n : r;
}

}  // namespace

L96State l96_vector_field(const L96State& s, const L96Params& p) {
  p.validate();
  const int K = p.K, J = p.J;
  if (s.x.size() != K || s.y.rows() != J || s.y.cols() != K)
    throw std::invalid_argument("l96_vector_field: state dimensions do not match params");

  L96State d;
  d.x.resize(K);
  d.y.resize(J, K);

  const Eigen::VectorXd ybar = l96_flux(s.y);
  for (int k = 0; k < K; ++k) {
    const double xm1 = s.x[wrap(k - 1, K)];
    const double xm2 = s.x[wrap(k - 2, K)];
    const double xp1 = s.x[wrap(k + 1, K)];
    d.x[k] = -xm1 * (xm2 - xp1) - s.x[k] + p.F - p.h_x * ybar[k];
  }

  // Fast variables: the j index continues into the next slow sector,
  // y_{j+J,k} = y_{j,k+1}.
  auto yat = [&](int j, int k) -> double {
    int kk = k;
    while (j >= J) {
      j -= J;
      ++kk;
    }
    while (j < 0) {
      j += J;
      --kk;
    }
    return s.y(j, wrap(kk, K));
  };
  const double inv_eps = 1.0 / p.epsilon_scale;
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < J; ++j) {
      const double yp1 = yat(j + 1, k);
      const double yp2 = yat(j + 2, k);
      const double ym1 = yat(j - 1, k);
      d.y(j, k) = inv_eps * (-yp1 * (yp2 - ym1) - s.y(j, k) + p.h_y * s.x[k]);
    }
  }
  return d;
}

Eigen::VectorXd l96_flux(const Eigen::MatrixXd& y) { return y.colwise().mean(); }

Eigen::VectorXd l96_resolved_field(const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                                   const L96Params& p) {
  const int K = p.K;
  if (x.size() != K || z.size() != K)
    throw std::invalid_argument("l96_resolved_field: dimensions do not match params");
  Eigen::VectorXd v(K);
  for (int k = 0; k < K; ++k) {
    const double xm1 = x[wrap(k - 1, K)];
    const double xm2 = x[wrap(k - 2, K)];
    const double xp1 = x[wrap(k + 1, K)];
    v[k] = -xm1 * (xm2 - xp1) - x[k] + p.F - p.h_x * z[k];
  }
  return v;
}

Eigen::VectorXd rk4_step(const FluxField& field, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& z, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  const Eigen::VectorXd k1 = field(x, z);
  const Eigen::VectorXd k2 = field(x + 0.5 * dt * k1, z);
  const Eigen::VectorXd k3 = field(x + 0.5 * dt * k2, z);
  const Eigen::VectorXd k4 = field(x + dt * k3, z);
  Eigen::VectorXd out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) throw std::runtime_error("rk4_step: non-finite field output");
  return out;
}

namespace {

L63State advance(const L63State& s, const L63State& d, double h) {
  return {s.a1 + h * d.a1, s.a2 + h * d.a2, s.a3 + h * d.a3};
}

L63State combine(const L63State& s, const L63State& k1, const L63State& k2,
                 const L63State& k3, const L63State& k4, double h) {
  const double c = h / 6.0;
  return {s.a1 + c * (k1.a1 + 2 * k2.a1 + 2 * k3.a1 + k4.a1),
          s.a2 + c * (k1.a2 + 2 * k2.a2 + 2 * k3.a2 + k4.a2),
          s.a3 + c * (k1.a3 + 2 * k2.a3 + 2 * k3.a3 + k4.a3)};
}

L96State advance(const L96State& s, const L96State& d, double h) {
  return {s.x + h * d.x, s.y + h * d.y};
}

L96State combine(const L96State& s, const L96State& k1, const L96State& k2,
                 const L96State& k3, const L96State& k4, double h) {
  const double c = h / 6.0;
  return {s.x + c * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
          s.y + c * (k1.y + 2 * k2.y + 2 * k3.y + k4.y)};
}

bool finite(const L63State& s) {
  return std::isfinite(s.a1) && std::isfinite(s.a2) && std::isfinite(s.a3);
}

bool finite(const L96State& s) { return s.x.allFinite() && s.y.allFinite(); }

// Full-system RK4 over one outer step, split into substeps inner steps.
template <typename State, typename Field>
State rk4_full_step(const State& s, const Field& f, double dt, int substeps) {
  State cur = s;
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    State k1 = f(cur);
    State k2 = f(advance(cur, k1, 0.5 * h));
    State k3 = f(advance(cur, k2, 0.5 * h));
    State k4 = f(advance(cur, k3, h));
    cur = combine(cur, k1, k2, k3, k4, h);
  }
  return cur;
}

}  // namespace

std::vector<L63State> integrate_truth(const L63State& init, const IntegratorConfig& cfg,
                                      int n_steps) {
  cfg.validate();
  if (n_steps < 0) throw std::invalid_argument("integrate_truth: n_steps must be >= 0");
  std::vector<L63State> traj;
  traj.reserve(n_steps + 1);
  traj.push_back(init);
  auto field = [](const L63State& s) {
    const Eigen::Vector3d v = l63_vector_field(s);
    return L63State{v[0], v[1], v[2]};
  };
  for (int n = 0; n < n_steps; ++n) {
    L63State next = rk4_full_step(traj.back(), field, cfg.dt, cfg.substeps);
    if (!finite(next))
      throw std::runtime_error("integrate_truth: L63 state blew up at step " +
                               std::to_string(n + 1));
    traj.push_back(next);
  }
  return traj;
}

std::vector<L96State> integrate_truth(const L96State& init, const L96Params& p,
                                      const IntegratorConfig& cfg, int n_steps) {
  cfg.validate();
  p.validate();
  if (n_steps < 0) throw std::invalid_argument("integrate_truth: n_steps must be >= 0");
  std::vector<L96State> traj;
  traj.reserve(n_steps + 1);
  traj.push_back(init);
  auto field = [&p](const L96State& s) { return l96_vector_field(s, p); };
  for (int n = 0; n < n_steps; ++n) {
    L96State next = rk4_full_step(traj.back(), field, cfg.dt, cfg.substeps);
    if (!finite(next))
      throw std::runtime_error("integrate_truth: L96 state blew up at step " +
                               std::to_string(n + 1));
    traj.push_back(next);
  }
  return traj;
}

std::pair<Eigen::Vector2d, double> palmer_gaussian_step(const Eigen::Vector2d& x,
                                                        double sigma, double dt,
                                                        std::mt19937_64& rng,
                                                        bool euler) {
  if (sigma < 0.0)
    throw std::invalid_argument("palmer_gaussian_step: sigma must be nonnegative");
  double z = 0.0;
  if (sigma > 0.0) {
    std::normal_distribution<double> normal(0.0, sigma);
    z = normal(rng);
  }
  Eigen::Vector2d next;
  if (euler) {
    next = x + dt * l63_resolved_field(x, z);
  } else {
    auto field = [](const Eigen::VectorXd& xx, const Eigen::VectorXd& zz) {
      return Eigen::VectorXd(l63_resolved_field(xx.head<2>(), zz[0]));
    };
    Eigen::VectorXd zz(1);
    zz[0] = z;
    next = rk4_step(field, x, zz, dt).head<2>();
  }
  return {next, z};
}

}  // namespace qmcl

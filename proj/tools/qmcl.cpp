// Command-line driver: generate-data, train, simulate, diagnose.
//
// All commands read a flat key-value config file (--config) with CLI flags
// taking precedence; they are deterministic given (config, inputs, seed) and
// exit nonzero with a one-line `error: ...` message on failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "qmcl/closure.hpp"
#include "qmcl/config.hpp"
#include "qmcl/csv.hpp"
#include "qmcl/diagnostics.hpp"
#include "qmcl/dynamics.hpp"
#include "qmcl/model_io.hpp"

namespace {

using namespace qmcl;

L96Params l96_params_from(const Config& cfg) {
  L96Params p;
  p.K = cfg.get_int("l96.K", 9);
  p.J = cfg.get_int("l96.J", 8);
  p.F = cfg.get_double("l96.F", 10.0);
  p.h_x = cfg.get_double("l96.h_x", -0.8);
  p.h_y = cfg.get_double("l96.h_y", 1.0);
  p.epsilon_scale = cfg.get_double("l96.epsilon", 1.0 / 128.0);
  p.validate();
  return p;
}

void write_meta(const std::string& path, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "'");
  for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
}

// ---------------------------------------------------------------------------
// generate-data

int cmd_generate_data(const Config& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string system = cfg.get_string("system");
  const double dt = cfg.get_double("dt", 0.01);
  const int n_samples = cfg.get_int("gen.n_samples");
  const std::string traj_path = out_dir + "/traj.csv";

  if (system == "l63") {
    const int substeps = cfg.get_int("gen.substeps", 4);
    const double equil = cfg.get_double("gen.equilibration_time", 500.0);
    std::vector<double> init = {2.0, 2.0, 2.0};
    if (cfg.has("gen.initial")) init = cfg.get_doubles("gen.initial");
    if (init.size() != 3) throw std::runtime_error("gen.initial needs 3 components");

    IntegratorConfig icfg{dt, substeps};
    const int burn_steps = static_cast<int>(std::llround(equil / dt));
    auto burn = integrate_truth(L63State{init[0], init[1], init[2]}, icfg, burn_steps);
    auto traj = integrate_truth(burn.back(), icfg, n_samples - 1);

    Eigen::MatrixXd data(n_samples, 4);
    for (int i = 0; i < n_samples; ++i)
      data.row(i) << i * dt, traj[i].a1, traj[i].a2, traj[i].a3;
    write_csv(traj_path, {"t", "a1", "a2", "a3"}, data);

    write_meta(out_dir + "/dataset.txt",
               {{"system", "l63"},
                {"dt", format_g17(dt)},
                {"n_samples", std::to_string(n_samples)},
                {"substeps", std::to_string(substeps)},
                {"equilibration_time", format_g17(equil)},
                {"observed", cfg.get_string("gen.observed", "full")}});
  } else if (system == "l96") {
    const L96Params p = l96_params_from(cfg);
    const int substeps = cfg.get_int("gen.substeps", 16);
    const double equil = cfg.get_double("gen.equilibration_time", 200.0);

    L96State init{Eigen::VectorXd::Zero(p.K), Eigen::MatrixXd::Zero(p.J, p.K)};
    init.x[0] = 1.0;
    init.y(0, 0) = 1.1;
    if (cfg.has("gen.initial")) {
      const auto v = cfg.get_doubles("gen.initial");
      if (static_cast<int>(v.size()) != p.K && static_cast<int>(v.size()) != p.K + p.J * p.K)
        throw std::runtime_error("gen.initial needs K or K + J*K components");
      for (int k = 0; k < p.K; ++k) init.x[k] = v[k];
      if (static_cast<int>(v.size()) == p.K + p.J * p.K)
        for (int k = 0; k < p.K; ++k)
          for (int j = 0; j < p.J; ++j) init.y(j, k) = v[p.K + k * p.J + j];
    }

    IntegratorConfig icfg{dt, substeps};
    const int burn_steps = static_cast<int>(std::llround(equil / dt));
    auto burn = integrate_truth(init, p, icfg, burn_steps);
    auto traj = integrate_truth(burn.back(), p, icfg, n_samples - 1);

    Eigen::MatrixXd data(n_samples, 1 + 2 * p.K);
    std::vector<std::string> header = {"t"};
    for (int k = 1; k <= p.K; ++k) header.push_back("x" + std::to_string(k));
    for (int k = 1; k <= p.K; ++k) header.push_back("z" + std::to_string(k));
    for (int i = 0; i < n_samples; ++i) {
      data(i, 0) = i * dt;
      data.block(i, 1, 1, p.K) = traj[i].x.transpose();
      data.block(i, 1 + p.K, 1, p.K) = l96_flux(traj[i].y).transpose();
    }
    write_csv(traj_path, header, data);

    write_meta(out_dir + "/dataset.txt",
               {{"system", "l96"},
                {"dt", format_g17(dt)},
                {"n_samples", std::to_string(n_samples)},
                {"substeps", std::to_string(substeps)},
                {"equilibration_time", format_g17(equil)},
                {"l96.K", std::to_string(p.K)},
                {"l96.J", std::to_string(p.J)},
                {"l96.F", format_g17(p.F)},
                {"l96.h_x", format_g17(p.h_x)},
                {"l96.h_y", format_g17(p.h_y)},
                {"l96.epsilon", format_g17(p.epsilon_scale)}});
  } else {
    throw std::runtime_error("unknown system '" + system + "'");
  }
  std::cout << "wrote " << traj_path << " (" << n_samples << " samples)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

TrajectoryDataset load_dataset(const std::string& dir) {
  Config meta = Config::load(dir + "/dataset.txt");
  CsvTable traj = read_csv(dir + "/traj.csv");

  TrajectoryDataset data;
  data.dt = meta.get_double("dt");
  data.system = meta.get_string("system");
  const int n = static_cast<int>(traj.data.rows());

  if (data.system == "l63") {
    const int a1 = traj.column("a1"), a2 = traj.column("a2"), a3 = traj.column("a3");
    data.x.resize(n, 2);
    data.x.col(0) = traj.data.col(a1);
    data.x.col(1) = traj.data.col(a2);
    data.z = traj.data.col(a3);
    const std::string observed = meta.get_string("observed", "full");
    if (observed == "full") {
      data.w.resize(n, 3);
      data.w << traj.data.col(a1), traj.data.col(a2), traj.data.col(a3);
    } else if (observed == "a1") {
      data.w = traj.data.col(a1);
    } else {
      throw std::runtime_error("dataset: unknown observed mode '" + observed + "'");
    }
  } else if (data.system == "l96") {
    const int k = meta.get_int("l96.K");
    data.x.resize(n, k);
    data.z.resize(n, k);
    for (int c = 0; c < k; ++c) {
      data.x.col(c) = traj.data.col(traj.column("x" + std::to_string(c + 1)));
      data.z.col(c) = traj.data.col(traj.column("z" + std::to_string(c + 1)));
    }
    data.w = data.x;  // basis built from the slow variables
  } else {
    throw std::runtime_error("dataset: unknown system '" + data.system + "'");
  }
  return data;
}

int cmd_train(const Config& cfg, const std::string& data_dir, const std::string& out_dir) {
  TrajectoryDataset data = load_dataset(data_dir);

  TrainingConfig tcfg;
  tcfg.L = cfg.get_int("train.L");
  tcfg.k_nn = cfg.get_int("train.k_nn", 0);
  const double bw = cfg.get_double("train.basis_bandwidth", 0.0);
  if (bw > 0.0) tcfg.basis_bandwidth = bw;
  tcfg.feature_bandwidth = cfg.get_double("train.feature_bandwidth");
  tcfg.delays = cfg.get_int("train.delays", 0);
  tcfg.steps_per_conditioning = cfg.get_int("train.r", 1);
  const std::string solver = cfg.get_string("train.solver", "auto");
  if (solver == "dense")
    tcfg.solver = EigSolver::Dense;
  else if (solver == "iterative")
    tcfg.solver = EigSolver::Iterative;
  else if (solver != "auto")
    throw std::runtime_error("train.solver must be auto|dense|iterative");

  ClosureModel model = train(data, tcfg);
  if (data.system == "l96") {
    Config meta = Config::load(data_dir + "/dataset.txt");
    model.l96.K = meta.get_int("l96.K");
    model.l96.J = meta.get_int("l96.J");
    model.l96.F = meta.get_double("l96.F");
    model.l96.h_x = meta.get_double("l96.h_x");
    model.l96.h_y = meta.get_double("l96.h_y");
    model.l96.epsilon_scale = meta.get_double("l96.epsilon");
  }

  std::map<std::string, std::string> extra;
  extra["dataset_fingerprint"] = file_fingerprint(data_dir + "/traj.csv");
  extra["train.L"] = std::to_string(tcfg.L);
  extra["train.k_nn"] = std::to_string(tcfg.k_nn);
  extra["train.delays"] = std::to_string(tcfg.delays);
  extra["train.r"] = std::to_string(tcfg.steps_per_conditioning);
  extra["train.solver"] = solver;
  save_model(model, out_dir, extra);

  std::cout << "basis bandwidth = " << model.basis_bandwidth << "\n";
  std::cout << "top eigenvalues:";
  for (int l = 0; l < std::min(10, model.basis->L); ++l)
    std::cout << " " << model.basis->lambda[l];
  std::cout << "\nmodel written to " << out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const Config& cfg, const std::string& model_dir,
                 const std::string& out_dir, const std::string& mode_flag,
                 std::uint64_t seed, bool recover) {
  std::filesystem::create_directories(out_dir);
  ClosureModel model = load_model(model_dir);
  const int n_steps = cfg.get_int("sim.n_steps");
  const std::string mode = !mode_flag.empty() ? mode_flag
                                              : cfg.get_string("sim.mode", "deterministic");

  Eigen::VectorXd x0;
  if (cfg.has("sim.initial_x")) {
    const auto v = cfg.get_doubles("sim.initial_x");
    x0 = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
  } else {
    x0 = model.effect_map.train_x.bottomRows(1).transpose();
  }

  std::mt19937_64 rng(seed);
  Eigen::MatrixXd x, flux;

  if (mode == "palmer-baseline") {
    if (model.resolved_field != "l63" || model.flux_dim() != 1)
      throw std::runtime_error("palmer-baseline requires a scalar-flux l63 model");
    const double sigma = cfg.get_double("sim.palmer_sigma", model.palmer_sigma);
    const bool euler = cfg.get_int("sim.palmer_euler", 0) != 0;
    x.resize(n_steps, 2);
    flux.resize(n_steps, 1);
    Eigen::Vector2d cur = x0;
    for (int n = 0; n < n_steps; ++n) {
      auto [next, z] = palmer_gaussian_step(cur, sigma, model.dt, rng, euler);
      cur = next;
      x.row(n) = cur.transpose();
      flux(n, 0) = z;
    }
  } else {
    RunOptions opt;
    if (mode == "deterministic")
      opt.mode = RunMode::Deterministic;  // seed is ignored by construction
    else if (mode == "stochastic")
      opt.mode = RunMode::Stochastic;
    else
      throw std::runtime_error("sim.mode must be deterministic|stochastic|palmer-baseline");
    opt.recover_uninformative = recover;
    std::ofstream events(out_dir + "/events.log");
    opt.event_log = &events;

    const std::string init_mode = cfg.get_string("sim.init_mode", "uninformative");
    InitMode im = InitMode::Uninformative;
    if (init_mode == "feature-map")
      im = InitMode::FeatureMap;
    else if (init_mode != "uninformative")
      throw std::runtime_error("sim.init_mode must be uninformative|feature-map");

    ClosureState state = initialize(model, x0, im);
    RunResult result = run(model, state, n_steps, opt, rng);
    x = std::move(result.x);
    flux = std::move(result.flux);
    if (result.recoveries > 0)
      std::cout << "recoveries = " << result.recoveries << "\n";
  }

  const int dx = static_cast<int>(x.cols());
  const int d = static_cast<int>(flux.cols());
  std::vector<std::string> header = {"step", "t"};
  for (int c = 1; c <= dx; ++c) header.push_back("x" + std::to_string(c));
  for (int c = 1; c <= d; ++c) header.push_back("z" + std::to_string(c));
  Eigen::MatrixXd data(n_steps, 2 + dx + d);
  for (int n = 0; n < n_steps; ++n) {
    data(n, 0) = n + 1;
    data(n, 1) = (n + 1) * model.dt;
    data.block(n, 2, 1, dx) = x.row(n);
    data.block(n, 2 + dx, 1, d) = flux.row(n);
  }
  const std::string run_path = out_dir + "/run.csv";
  write_csv(run_path, header, data);
  std::cout << "wrote " << run_path << " (" << n_steps << " steps)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// diagnose

int cmd_diagnose(const Config& cfg, const std::string& truth_path,
                 const std::string& run_path, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  CsvTable truth = read_csv(truth_path);
  CsvTable run = read_csv(run_path);

  auto non_time_columns = [](const CsvTable& t) {
    std::vector<std::string> cols;
    for (const auto& h : t.header)
      if (h != "t" && h != "step") cols.push_back(h);
    return cols;
  };

  std::vector<std::string> truth_cols, run_cols;
  if (cfg.has("diag.truth_cols")) {
    std::stringstream ss(cfg.get_string("diag.truth_cols"));
    std::string cell;
    while (std::getline(ss, cell, ',')) truth_cols.push_back(cell);
    std::stringstream ss2(cfg.get_string("diag.run_cols"));
    while (std::getline(ss2, cell, ',')) run_cols.push_back(cell);
  } else {
    truth_cols = non_time_columns(truth);
    run_cols = non_time_columns(run);
  }
  if (truth_cols.size() != run_cols.size())
    throw std::runtime_error("diagnose: column lists have different lengths");

  const int bins = cfg.get_int("diag.bins", 45);
  const int max_lag = cfg.get_int("diag.max_lag_steps", 200);

  // Timestep from the time column spacing.
  auto dt_of = [](const CsvTable& t) {
    const int tc = t.column("t");
    return t.data.rows() > 1 ? t.data(1, tc) - t.data(0, tc) : 1.0;
  };
  const double truth_dt = dt_of(truth);
  const double run_dt = dt_of(run);

  std::ofstream summary(out_dir + "/summary.csv");
  summary << "pair,tv_distance,max_autocorr_dev\n";

  for (std::size_t i = 0; i < truth_cols.size(); ++i) {
    const Eigen::VectorXd a = truth.data.col(truth.column(truth_cols[i]));
    const Eigen::VectorXd b = run.data.col(run.column(run_cols[i]));

    // Histograms on common edges spanning both series.
    const double lo = std::min(a.minCoeff(), b.minCoeff());
    const double hi = std::max(a.maxCoeff(), b.maxCoeff());
    Histogram ha = histogram_with_range(a, lo, hi, bins);
    Histogram hb = histogram_with_range(b, lo, hi, bins);
    const double tv = total_variation_distance(ha, hb);

    const int lag_a = std::min<int>(max_lag, static_cast<int>(a.size()) - 1);
    const int lag_b = std::min<int>(max_lag, static_cast<int>(b.size()) - 1);
    AutocorrSeries ca = autocorrelation(a, lag_a, truth_dt);
    AutocorrSeries cb = autocorrelation(b, lag_b, run_dt);
    const int lags = std::min(lag_a, lag_b);
    double dev = 0.0;
    for (int j = 0; j <= lags; ++j)
      dev = std::max(dev, std::abs(ca.values[j] - cb.values[j]));

    const std::string pair = truth_cols[i] + ":" + run_cols[i];
    auto write_hist = [&](const Histogram& h, const std::string& path) {
      Eigen::MatrixXd csv(h.density.size(), 3);
      for (int bno = 0; bno < h.density.size(); ++bno)
        csv.row(bno) << h.edges[bno], h.edges[bno + 1], h.density[bno];
      write_csv(path, {"bin_left", "bin_right", "density"}, csv);
    };
    write_hist(ha, out_dir + "/hist_truth_" + pair + ".csv");
    write_hist(hb, out_dir + "/hist_run_" + pair + ".csv");

    auto write_corr = [&](const AutocorrSeries& c, int count, const std::string& path) {
      Eigen::MatrixXd csv(count + 1, 2);
      for (int j = 0; j <= count; ++j) csv.row(j) << c.lags[j], c.values[j];
      write_csv(path, {"lag", "value"}, csv);
    };
    write_corr(ca, lag_a, out_dir + "/autocorr_truth_" + pair + ".csv");
    write_corr(cb, lag_b, out_dir + "/autocorr_run_" + pair + ".csv");

    summary << pair << "," << format_g17(tv) << "," << format_g17(dev) << "\n";
    std::cout << pair << ": tv=" << tv << " max_autocorr_dev=" << dev << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum mechanical closure of multiscale dynamical systems"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_dir, model_dir, truth_path, run_path;
  std::string mode_flag;
  std::uint64_t seed = 0;
  bool recover = false;
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--set", overrides, "override a config key: --set key=value");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--out", out_dir, "output directory")->required();
  };

  CLI::App* gen = app.add_subcommand("generate-data", "integrate a truth trajectory");
  add_common(gen);

  CLI::App* tr = app.add_subcommand("train", "train a closure model");
  add_common(tr);
  tr->add_option("--data", data_dir, "dataset directory")->required();

  CLI::App* sim = app.add_subcommand("simulate", "run the parameterized system");
  add_common(sim);
  sim->add_option("--model", model_dir, "model directory")->required();
  sim->add_option("--mode", mode_flag, "deterministic|stochastic|palmer-baseline");
  sim->add_flag("--recover-uninformative", recover,
                "reset the quantum state instead of aborting on effect annihilation");

  CLI::App* diag = app.add_subcommand("diagnose", "compare equilibrium statistics");
  add_common(diag);
  diag->add_option("--truth", truth_path, "truth CSV")->required();
  diag->add_option("--run", run_path, "model run CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg;
    if (!config_path.empty()) cfg = Config::load(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }

    if (gen->parsed()) return cmd_generate_data(cfg, out_dir);
    if (tr->parsed()) return cmd_train(cfg, data_dir, out_dir);
    if (sim->parsed()) return cmd_simulate(cfg, model_dir, out_dir, mode_flag, seed, recover);
    if (diag->parsed()) return cmd_diagnose(cfg, truth_path, run_path, out_dir);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}

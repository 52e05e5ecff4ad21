#include "qmcl/model_io.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qmcl/csv.hpp"

namespace qmcl {

namespace {

constexpr int kFormatVersion = 1;

void write_blob(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open '" + path + "'");
  // Row-major stream so the layout is independent of Eigen's storage order.
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  if (!out) throw std::runtime_error("save_model: write failed for '" + path + "'");
}

Eigen::MatrixXd read_blob(const std::string& path, Eigen::Index rows,
                          Eigen::Index cols) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("load_model: cannot open '" + path + "'");
  const std::int64_t bytes = static_cast<std::int64_t>(in.tellg());
  const std::int64_t expect = static_cast<std::int64_t>(rows) * cols * sizeof(double);
  if (bytes != expect)
    throw std::runtime_error("load_model: blob '" + path + "' holds " +
                             std::to_string(bytes) + " bytes, manifest expects " +
                             std::to_string(expect));
  in.seekg(0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      m(r, c) = v;
    }
  if (!in) throw std::runtime_error("load_model: read failed for '" + path + "'");
  return m;
}

struct Manifest {
  std::map<std::string, std::string> keys;

  const std::string& at(const std::string& key) const {
    auto it = keys.find(key);
    if (it == keys.end())
      throw std::runtime_error("load_model: manifest key '" + key + "' missing");
    return it->second;
  }
  double number(const std::string& key) const { return std::stod(at(key)); }
  int integer(const std::string& key) const { return std::stoi(at(key)); }
};

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open '" + path + "'");
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("load_model: malformed manifest line '" + line + "'");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    m.keys[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return m;
}

void declare_array(std::ostream& out, const std::string& name,
                   const Eigen::MatrixXd& m) {
  out << "array." << name << " = float64 little " << m.rows() << " " << m.cols()
      << " " << name << ".f64\n";
}

Eigen::MatrixXd load_array(const Manifest& manifest, const std::string& dir,
                           const std::string& name) {
  std::istringstream ss(manifest.at("array." + name));
  std::string dtype, order, file;
  Eigen::Index rows, cols;
  ss >> dtype >> order >> rows >> cols >> file;
  if (!ss || dtype != "float64" || order != "little")
    throw std::runtime_error("load_model: unsupported array descriptor for '" + name +
                             "'");
  return read_blob(dir + "/" + file, rows, cols);
}

}  // namespace

void save_model(const ClosureModel& model, const std::string& dir,
                const std::map<std::string, std::string>& extra_manifest) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/manifest.txt");
  if (!out) throw std::runtime_error("save_model: cannot open manifest in '" + dir + "'");

  out << "format_version = " << kFormatVersion << "\n";
  out << "kind = qmcl-model\n";
  out << "dt = " << format_g17(model.dt) << "\n";
  out << "r = " << model.steps_per_conditioning << "\n";
  out << "delays = " << model.delays << "\n";
  out << "basis_bandwidth = " << format_g17(model.basis_bandwidth) << "\n";
  out << "feature_bandwidth = " << format_g17(model.effect_map.kernel.bandwidth)
      << "\n";
  out << "resolved_field = " << model.resolved_field << "\n";
  out << "flux_dim = " << model.flux_dim() << "\n";
  out << "palmer_sigma = " << format_g17(model.palmer_sigma) << "\n";
  if (model.resolved_field == "l96") {
    out << "l96.K = " << model.l96.K << "\n";
    out << "l96.J = " << model.l96.J << "\n";
    out << "l96.F = " << format_g17(model.l96.F) << "\n";
    out << "l96.h_x = " << format_g17(model.l96.h_x) << "\n";
    out << "l96.h_y = " << format_g17(model.l96.h_y) << "\n";
    out << "l96.epsilon = " << format_g17(model.l96.epsilon_scale) << "\n";
  }
  for (const auto& [key, value] : extra_manifest) out << key << " = " << value << "\n";

  declare_array(out, "Phi", model.basis->Phi);
  write_blob(dir + "/Phi.f64", model.basis->Phi);
  declare_array(out, "lambda", model.basis->lambda);
  write_blob(dir + "/lambda.f64", model.basis->lambda);
  declare_array(out, "U", model.koopman.U);
  write_blob(dir + "/U.f64", model.koopman.U);
  declare_array(out, "train_x", model.effect_map.train_x);
  write_blob(dir + "/train_x.f64", model.effect_map.train_x);
  for (int i = 0; i < model.flux_dim(); ++i) {
    const std::string tag = std::to_string(i);
    declare_array(out, "Z" + tag, model.flux_observables[i].A);
    write_blob(dir + "/Z" + tag + ".f64", model.flux_observables[i].A);
    declare_array(out, "Zspec_vals" + tag, model.flux_spectra[i].eigenvalues);
    write_blob(dir + "/Zspec_vals" + tag + ".f64", model.flux_spectra[i].eigenvalues);
    declare_array(out, "Zspec_vecs" + tag, model.flux_spectra[i].eigenvectors);
    write_blob(dir + "/Zspec_vecs" + tag + ".f64", model.flux_spectra[i].eigenvectors);
  }
  if (!out) throw std::runtime_error("save_model: manifest write failed");
}

ClosureModel load_model(const std::string& dir) {
  Manifest manifest = read_manifest(dir + "/manifest.txt");
  if (manifest.integer("format_version") != kFormatVersion)
    throw std::runtime_error("load_model: unsupported format version");

  ClosureModel model;
  model.dt = manifest.number("dt");
  model.steps_per_conditioning = manifest.integer("r");
  model.delays = manifest.integer("delays");
  model.basis_bandwidth = manifest.number("basis_bandwidth");
  model.resolved_field = manifest.at("resolved_field");
  model.palmer_sigma = manifest.number("palmer_sigma");
  if (model.resolved_field == "l96") {
    model.l96.K = manifest.integer("l96.K");
    model.l96.J = manifest.integer("l96.J");
    model.l96.F = manifest.number("l96.F");
    model.l96.h_x = manifest.number("l96.h_x");
    model.l96.h_y = manifest.number("l96.h_y");
    model.l96.epsilon_scale = manifest.number("l96.epsilon");
  }

  auto basis = std::make_shared<EigenBasis>();
  basis->Phi = load_array(manifest, dir, "Phi");
  basis->lambda = load_array(manifest, dir, "lambda");
  basis->N = static_cast<int>(basis->Phi.rows());
  basis->L = static_cast<int>(basis->Phi.cols());
  if (basis->lambda.size() != basis->L)
    throw std::runtime_error("load_model: lambda length does not match basis width");
  model.basis = basis;

  model.koopman.U = load_array(manifest, dir, "U");
  if (model.koopman.U.rows() != basis->L || model.koopman.U.cols() != basis->L)
    throw std::runtime_error("load_model: Koopman matrix shape mismatch");

  model.effect_map.basis = basis;
  model.effect_map.train_x = load_array(manifest, dir, "train_x");
  if (model.effect_map.train_x.rows() != basis->N)
    throw std::runtime_error("load_model: train_x row count does not match basis");
  model.effect_map.kernel = KernelConfig{manifest.number("feature_bandwidth")};

  const int d = manifest.integer("flux_dim");
  for (int i = 0; i < d; ++i) {
    const std::string tag = std::to_string(i);
    ObservableMatrix z{load_array(manifest, dir, "Z" + tag)};
    if (z.A.rows() != basis->L || z.A.cols() != basis->L)
      throw std::runtime_error("load_model: flux observable shape mismatch");
    SpectralDecomposition spec;
    spec.eigenvalues = load_array(manifest, dir, "Zspec_vals" + tag);
    spec.eigenvectors = load_array(manifest, dir, "Zspec_vecs" + tag);
    if (spec.eigenvalues.size() != basis->L || spec.eigenvectors.rows() != basis->L)
      throw std::runtime_error("load_model: flux spectrum shape mismatch");
    model.flux_observables.push_back(std::move(z));
    model.flux_spectra.push_back(std::move(spec));
  }
  return model;
}

std::string file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file_fingerprint: cannot open '" + path + "'");
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a offset basis
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ULL;
    }
    if (!in) break;
  }
  std::ostringstream out;
  out << std::hex << hash;
  return out.str();
}

}  // namespace qmcl

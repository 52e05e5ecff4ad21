#include "qmcl/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qmcl {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: malformed line " + std::to_string(lineno) +
                               " in '" + path + "'");
    cfg.values_[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& Config::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw std::runtime_error("config: missing key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double Config::get_double(const std::string& key) const {
  try {
    return std::stod(raw(key));
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("config: key '" + key + "' is not a number");
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  try {
    return std::stoi(raw(key));
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("config: key '" + key + "' is not an integer");
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_uint64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  return std::stoull(raw(key));
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(raw(key));
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(trim(cell)));
  return out;
}

}  // namespace qmcl

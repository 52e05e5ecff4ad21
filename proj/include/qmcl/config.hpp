#ifndef QMCL_CONFIG_HPP
#define QMCL_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qmcl {

// Flat key-value configuration: one `key = value` per line, '#' comments.
// CLI flags override file values through set().
class Config {
 public:
  Config() = default;
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;  // comma list

 private:
  const std::string& raw(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

}  // namespace qmcl

#endif

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace clusterpool {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sectioned key = value file. Every key must be consumed by the reader,
// so typos surface as errors instead of silently falling back to defaults.
class Config {
 public:
  static Config load(const std::string& path);
  static Config parse(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key, const std::string& def);
  double get_double(const std::string& section, const std::string& key, double def);
  std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t def);
  bool get_bool(const std::string& section, const std::string& key, bool def);
  std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                    const std::vector<std::string>& def);

  // Throws ConfigError naming every key that was never read.
  void require_all_consumed() const;
  // Resolved values in a stable order, for the run manifest.
  std::string dump() const;
  void set(const std::string& section, const std::string& key, const std::string& value);

 private:
  std::optional<std::string> take(const std::string& section, const std::string& key);
  std::map<std::string, std::map<std::string, std::string>> values_;
  std::set<std::pair<std::string, std::string>> consumed_;
  std::map<std::string, std::map<std::string, std::string>> resolved_;
};

}  // namespace clusterpool

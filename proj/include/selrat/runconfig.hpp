#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace selrat {

// Flat key=value configuration: '#' comments, blank lines ignored,
// later assignments win. Unknown keys are rejected against the caller's
// key set.
class RunConfig {
 public:
  static RunConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  void validate_keys(const std::set<std::string>& known) const;

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  long get_int(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  // Canonical serialized form, one sorted key=value per line.
  std::string echo() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace selrat

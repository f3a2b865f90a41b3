#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key-value configuration with dotted section keys, e.g.
//   emitter.tau_x0_ns = 2.1
// '#' starts a comment; blank lines ignored. Duplicate keys are errors.
// Every key must be consumed by the experiment builder; leftovers are
// reported as unknown keys (strict parsing).
class Config {
  public:
    static Config parse(const std::string& text);
    static Config parse_file(const std::string& path);  // throws ConfigError (I/O too)

    bool has(const std::string& key) const;

    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    // Comma-separated list of numbers.
    std::vector<double> get_list(const std::string& key,
                                 const std::vector<double>& fallback) const;

    // Throws ConfigError naming every key never consumed by a getter.
    void check_all_consumed() const;

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    std::string require_raw(const std::string& key) const;
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    mutable std::set<std::string> consumed_;
};

}  // namespace qdsim

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qspace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// INI-style experiment config: `[section]` headers, `key = value` entries,
// `#` comments. Keys are addressed as "section.key". Every key must be
// consumed by the experiment schema; leftovers are reported as errors.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key) const;
    std::vector<std::string> get_string_list(const std::string& key) const;

    // Section names appearing as [prefix.<name>].
    std::vector<std::string> subsections(const std::string& prefix) const;

    void override_value(const std::string& key, const std::string& value);

    // Marks every key under [section] as consumed (eg acceptance thresholds
    // read by a different layer than the experiment driver).
    void consume_section(const std::string& section) const;

    // Throws ConfigError naming every key never consumed.
    void check_all_consumed() const;

private:
    std::string raw(const std::string& key) const;
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

} // namespace qspace

#include "qspace/config.hpp"

#include <fstream>
#include <sstream>

namespace qspace {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream is(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.values_.count(full))
            throw ConfigError("config: duplicate key '" + full + "'");
        cfg.values_[full] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_string(buf.str());
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config: missing key '" + key + "'");
    consumed_.insert(key);
    return it->second;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
}

double Config::get_double(const std::string& key) const {
    const std::string v = raw(key);
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' is not a number: " + v);
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
    const std::string v = raw(key);
    try {
        std::size_t pos = 0;
        const std::int64_t x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' is not an integer: " + v);
    }
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    return static_cast<std::uint64_t>(get_int(key));
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = raw(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: key '" + key + "' is not a boolean: " + v);
}

std::vector<double> Config::get_list(const std::string& key) const {
    std::vector<double> out;
    std::istringstream is(raw(key));
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' has a non-numeric entry: " + tok);
        }
    }
    if (out.empty()) throw ConfigError("config: key '" + key + "' is an empty list");
    return out;
}

std::vector<std::string> Config::get_string_list(const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream is(raw(key));
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

std::vector<std::string> Config::subsections(const std::string& prefix) const {
    std::set<std::string> names;
    const std::string want = prefix + ".";
    for (const auto& [key, value] : values_) {
        if (key.rfind(want, 0) != 0) continue;
        const auto rest = key.substr(want.size());
        const auto dot = rest.find('.');
        if (dot != std::string::npos) names.insert(rest.substr(0, dot));
    }
    return {names.begin(), names.end()};
}

void Config::override_value(const std::string& key, const std::string& value) {
    values_[key] = value;
}

void Config::consume_section(const std::string& section) const {
    const std::string want = section + ".";
    for (const auto& [key, value] : values_) {
        if (key.rfind(want, 0) == 0) consumed_.insert(key);
    }
}

void Config::check_all_consumed() const {
    std::string unknown;
    for (const auto& [key, value] : values_) {
        if (!consumed_.count(key)) {
            if (!unknown.empty()) unknown += ", ";
            unknown += key;
        }
    }
    if (!unknown.empty()) throw ConfigError("config: unknown keys: " + unknown);
}

} // namespace qspace

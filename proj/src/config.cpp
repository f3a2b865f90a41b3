#include "qdsim/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace qdsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
            return false;
    return true;
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_key(key))
            throw ConfigError("line " + std::to_string(line_no) + ": bad key '" + key + "'");
        if (cfg.values_.count(key))
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key +
                              "' (first at line " + std::to_string(cfg.lines_[key]) + ")");
        cfg.values_[key] = value;
        cfg.lines_[key] = line_no;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::require_raw(const std::string& key) const {
    consumed_.insert(key);
    return values_.at(key);
}

double Config::get_double(const std::string& key, double fallback) const {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(it->second, &pos);
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(lines_.at(key)) + ": key '" + key +
                          "' is not a number: '" + it->second + "'");
    }
    if (pos != it->second.size())
        throw ConfigError("line " + std::to_string(lines_.at(key)) + ": key '" + key +
                          "' has trailing junk: '" + it->second + "'");
    return v;
}

int Config::get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError("key '" + key + "' must be an integer");
    return i;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("key '" + key + "' must be true/false");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    consumed_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& fallback) const {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' has a non-numeric list item: '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("key '" + key + "' is an empty list");
    return out;
}

void Config::check_all_consumed() const {
    std::string unknown;
    for (const auto& [key, value] : values_) {
        if (consumed_.count(key)) continue;
        if (!unknown.empty()) unknown += ", ";
        unknown += "'" + key + "' (line " + std::to_string(lines_.at(key)) + ")";
    }
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

}  // namespace qdsim

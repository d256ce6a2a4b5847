#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "detflow/errors.hpp"

namespace detflow {

/// Key-value config with [section] headers, `key = value` lines, and `#`
/// comments. Values are stored verbatim; typed access parses on demand.
class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str());
    }

    static Config parse_string(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": empty section name");
                cfg.sections_[section];
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
                value = value.substr(1, value.size() - 2);
            if (key.empty())
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": empty key");
            cfg.sections_[section][key] = value;
        }
        return cfg;
    }

    bool has(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }
    bool has_section(const std::string& section) const {
        return sections_.count(section) > 0;
    }

    std::string get_str(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
        auto s = sections_.find(section);
        if (s == sections_.end()) return fallback;
        auto k = s->second.find(key);
        return k == s->second.end() ? fallback : k->second;
    }
    std::string require_str(const std::string& section,
                            const std::string& key) const {
        if (!has(section, key))
            throw ConfigError("missing config key [" + section + "] " + key);
        return get_str(section, key, "");
    }

    double get_double(const std::string& section, const std::string& key,
                      double fallback) const {
        if (!has(section, key)) return fallback;
        return to_double(section, key, get_str(section, key, ""));
    }
    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get_str(section, key, "");
        try {
            size_t pos = 0;
            const long long r = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError("config [" + section + "] " + key +
                              ": not an integer: " + v);
        }
    }
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get_str(section, key, "");
        try {
            size_t pos = 0;
            const unsigned long long r = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError("config [" + section + "] " + key +
                              ": not an unsigned integer: " + v);
        }
    }

    std::vector<double> get_doubles(const std::string& section,
                                    const std::string& key) const {
        std::vector<double> out;
        std::istringstream in(get_str(section, key, ""));
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(to_double(section, key, item));
        }
        return out;
    }
    std::vector<int> get_ints(const std::string& section,
                              const std::string& key) const {
        std::vector<int> out;
        for (double d : get_doubles(section, key))
            out.push_back(static_cast<int>(d));
        return out;
    }

    void set(const std::string& section, const std::string& key,
             const std::string& value) {
        sections_[section][key] = value;
    }

    /// Canonical sorted text form, for report echoes.
    std::string echo() const {
        std::ostringstream os;
        for (const auto& [sec, kv] : sections_) {
            os << "[" << sec << "]\n";
            for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
        }
        return os.str();
    }

private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }
    double to_double(const std::string& section, const std::string& key,
                     const std::string& v) const {
        try {
            size_t pos = 0;
            const double r = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError("config [" + section + "] " + key +
                              ": not a number: " + v);
        }
    }

    std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace detflow

#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tddr/common.hpp"

namespace tddr {

// Plain-text run configuration: "[section]" headers and "key = value" lines,
// flattened to dotted keys. Access is tracked so commands can report any
// leftover (unknown) keys by name.
class RunConfig {
public:
    static RunConfig parse_text(const std::string& text) {
        RunConfig cfg;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const size_t comment = line.find_first_of("#;");
            if (comment != std::string::npos) line = line.substr(0, comment);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw config_error("config line " + std::to_string(lineno) + ": unterminated section");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw config_error("config line " + std::to_string(lineno) + ": empty key");
            cfg.set(section.empty() ? key : section + "." + key, value);
        }
        return cfg;
    }

    static RunConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw io_error("config: cannot open '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_text(ss.str());
    }

    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : entries_)
            if (k == key) {
                v = value;
                return;
            }
        entries_.emplace_back(key, value);
    }

    bool has(const std::string& key) const {
        for (const auto& [k, v] : entries_)
            if (k == key) return true;
        return false;
    }

    std::string get(const std::string& key, const std::string& fallback) const {
        accessed_.insert(key);
        for (const auto& [k, v] : entries_)
            if (k == key) return v;
        return fallback;
    }

    int get_int(const std::string& key, int fallback) const {
        const std::string v = get(key, "");
        if (v.empty()) return fallback;
        try {
            return std::stoi(v);
        } catch (const std::exception&) {
            throw config_error("config: key '" + key + "' is not an integer: " + v);
        }
    }

    double get_double(const std::string& key, double fallback) const {
        const std::string v = get(key, "");
        if (v.empty()) return fallback;
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            throw config_error("config: key '" + key + "' is not a number: " + v);
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        const std::string v = get(key, "");
        if (v.empty()) return fallback;
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
            throw config_error("config: key '" + key + "' is not an unsigned integer: " + v);
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        const std::string v = get(key, "");
        if (v.empty()) return fallback;
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw config_error("config: key '" + key + "' is not a boolean: " + v);
    }

    // keys present in the input that no command ever read
    std::vector<std::string> unknown_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries_)
            if (accessed_.find(k) == accessed_.end()) out.push_back(k);
        return out;
    }

    void reject_unknown_keys() const {
        const auto unknown = unknown_keys();
        if (unknown.empty()) return;
        std::string msg = "config: unknown keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw config_error(msg);
    }

private:
    static std::string trim(const std::string& s) {
        const size_t a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const size_t b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    std::vector<std::pair<std::string, std::string>> entries_;
    mutable std::set<std::string> accessed_;
};

}  // namespace tddr

#pragma once

#include <cstdint>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bopert/errors.hpp"

namespace bopert {

/// Flat key-value run configuration with dotted section prefixes, e.g.
///   solver.N = 128
///   # comment
/// Every key has a documented default; unknown keys are errors at validation.
class Config {
public:
    Config() = default;

    static Config from_string(std::string_view text) {
        Config cfg;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t eol = text.find('\n', pos);
            std::string_view line =
                text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
            pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
            ++line_no;
            line = trim(line);
            if (line.empty() || line.front() == '#') continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
            const std::string key{trim(line.substr(0, eq))};
            const std::string value{trim(line.substr(eq + 1))};
            if (key.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            cfg.entries_[key] = value;
        }
        return cfg;
    }

    static Config from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path.string());
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return from_string(buffer.str());
    }

    void set(const std::string& key, const std::string& value) { entries_[key] = value; }

    /// Accepts "key=value" as passed on the command line.
    void apply_override(std::string_view keyval) {
        const std::size_t eq = keyval.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw ConfigError("override must have the form key=value: '" + std::string(keyval) + "'");
        entries_[std::string(trim(keyval.substr(0, eq)))] = std::string(trim(keyval.substr(eq + 1)));
    }

    /// Later entries win; used to layer file and overrides on top of defaults.
    void merge_from(const Config& other) {
        for (const auto& [key, value] : other.entries_) entries_[key] = value;
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        return parse_double(key, it->second);
    }

    int get_int(const std::string& key, int fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        const double v = parse_double(key, it->second);
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            throw ConfigError("config key '" + key + "': expected an integer, got '" + it->second + "'");
        return i;
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
        if (end == it->second.c_str() || *end != '\0')
            throw ConfigError("config key '" + key + "': expected an unsigned integer");
        return v;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        const std::string& v = it->second;
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
    }

    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        std::vector<double> out;
        std::string token;
        std::istringstream stream(it->second);
        while (std::getline(stream, token, ','))
            out.push_back(parse_double(key, std::string(trim(token))));
        if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
        return out;
    }

    /// Reject any key outside the documented set.
    void require_known(const std::set<std::string>& known) const {
        for (const auto& [key, value] : entries_)
            if (known.count(key) == 0) throw ConfigError("unknown config key '" + key + "'");
    }

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

private:
    static std::string_view trim(std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    }

    static double parse_double(const std::string& key, const std::string& text) {
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (end == text.c_str() || *end != '\0')
            throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
        return v;
    }

    std::map<std::string, std::string> entries_;
};

} // namespace bopert

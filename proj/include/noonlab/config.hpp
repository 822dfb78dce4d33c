#pragma once
/// \file config.hpp
/// Flat key = value run configuration shared by the CLI and config files.

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "noonlab/errors.hpp"

namespace noonlab
{

/// String-valued parameters keyed by their CLI flag name (without dashes).
/// Values are kept verbatim so serialize(parse(text)) reproduces the
/// canonical text byte for byte.
class RunConfig
{
public:
    using Map = std::map<std::string, std::string>;

    RunConfig() = default;
    explicit RunConfig(Map values) : values_(std::move(values)) {}

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    const Map& values() const { return values_; }

    /// Entries of `other` replace ours.
    void overlay(const RunConfig& other)
    {
        for (const auto& [k, v] : other.values_)
            values_[k] = v;
    }

    std::string get_string(const std::string& key) const
    {
        auto it = values_.find(key);
        if (it == values_.end())
            throw InvalidArgument("missing required parameter '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key) const
    {
        const std::string s = get_string(key);
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
            throw InvalidArgument("parameter '" + key + "' expects a number, got '" + s + "'");
        return v;
    }

    long long get_int(const std::string& key) const
    {
        const std::string s = get_string(key);
        long long v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw InvalidArgument("parameter '" + key + "' expects an integer, got '" + s + "'");
        return v;
    }

    /// Canonical text form: one `key = value` line per entry, sorted by key.
    std::string serialize() const
    {
        std::string out;
        for (const auto& [k, v] : values_)
            out += k + " = " + v + "\n";
        return out;
    }

    /// Parses `key = value` lines; blank lines and lines starting with `#` are skipped.
    static RunConfig parse(std::string_view text)
    {
        RunConfig cfg;
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            const std::string t = trim(line);
            if (t.empty() || t.front() == '#')
                continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw InvalidArgument("config line " + std::to_string(lineno) + ": expected 'key = value'");
            std::string key = trim(t.substr(0, eq));
            std::string value = trim(t.substr(eq + 1));
            if (key.empty())
                throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
            cfg.values_[std::move(key)] = std::move(value);
        }
        return cfg;
    }

private:
    static std::string trim(std::string_view s)
    {
        const auto b = s.find_first_not_of(" \t");
        if (b == std::string_view::npos)
            return {};
        const auto e = s.find_last_not_of(" \t");
        return std::string(s.substr(b, e - b + 1));
    }

    Map values_;
};

} // namespace noonlab

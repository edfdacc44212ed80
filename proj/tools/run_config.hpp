#pragma once

// Run configuration: built-in defaults, overridden by a key = value config
// file, overridden in turn by command-line flags.

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"
#include "pgeval/error.hpp"
#include "pgeval/osm.hpp"
#include "pgeval/placement.hpp"

namespace pgeval::cli {

struct RunConfig {
    FilterParams filter;
    double grid_m = 2.0;
    double resample_m = kDefaultResampleM;
    std::uint64_t master_seed = 0;
    unsigned jobs = 1;
    std::string report_path = "report.json";
    std::string geojson_path;
    std::string trace_path = "trace.csv";

    void validate() const {
        filter.validate();
        if (!(grid_m > 0.0)) throw ParameterError("grid_m must be positive");
        if (!(resample_m > 0.0)) throw ParameterError("resample_m must be positive");
        if (jobs < 1) throw ParameterError("jobs must be >= 1");
    }

    /// Settings that influence results; echoed into reports. Output paths
    /// and parallelism are left out so reports do not depend on them.
    [[nodiscard]] nlohmann::json effective() const {
        return {{"grid_m", grid_m}, {"resample_m", resample_m}, {"master_seed", master_seed}};
    }
};

namespace detail {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T v{};
    in >> v;
    if (in.fail() || !(in >> std::ws).eof())
        throw ParseError("config key '" + key + "': cannot parse '" + value + "'");
    return v;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace detail

/// Applies one `key = value` setting. Unknown keys are rejected.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_number;
    auto& f = cfg.filter;
    const std::map<std::string, std::function<void()>> setters = {
        {"n_particles", [&] { f.n_particles = parse_number<int>(key, value); }},
        {"sigma_xy", [&] { f.sigma_xy = parse_number<double>(key, value); }},
        {"sigma_theta", [&] { f.sigma_theta = parse_number<double>(key, value); }},
        {"rho_r", [&] { f.rho_r = parse_number<double>(key, value); }},
        {"rho_c", [&] { f.rho_c = parse_number<double>(key, value); }},
        {"q_tilde", [&] { f.q_tilde = parse_number<double>(key, value); }},
        {"t_max", [&] { f.t_max = parse_number<int>(key, value); }},
        {"q_d", [&] { f.q_d = parse_number<double>(key, value); }},
        {"lambda0", [&] { f.lambda0 = parse_number<double>(key, value); }},
        {"alpha_decay", [&] { f.alpha_decay = parse_number<double>(key, value); }},
        {"grid_m", [&] { cfg.grid_m = parse_number<double>(key, value); }},
        {"resample_m", [&] { cfg.resample_m = parse_number<double>(key, value); }},
        {"master_seed", [&] { cfg.master_seed = parse_number<std::uint64_t>(key, value); }},
        {"jobs", [&] { cfg.jobs = parse_number<unsigned>(key, value); }},
        {"report", [&] { cfg.report_path = value; }},
        {"geojson", [&] { cfg.geojson_path = value; }},
        {"trace", [&] { cfg.trace_path = value; }},
    };
    const auto it = setters.find(key);
    if (it == setters.end()) throw ParseError("unknown config key '" + key + "'");
    it->second();
}

/// Parses a flat config file; `#` starts a comment.
inline void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(source + ":" + std::to_string(lineno) + ": expected key = value");
        try {
            apply_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        } catch (const ParseError& e) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

} // namespace pgeval::cli

#pragma once

// Subcommands of the pgeval CLI. Each returns a process exit code and
// writes human-readable output to the given streams.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pgeval/pgeval.hpp"
#include "run_config.hpp"

namespace pgeval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadInput = 2;

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct InputArgs {
    std::string map_path;
    std::string scenarios_path;
    std::string config_path;   // optional
    std::string map_meta_path; // optional; defaults to <map_path>.meta when present
    Overrides overrides;       // flag settings, applied after the config file
};

struct EvaluateArgs {
    InputArgs in;
    std::optional<double> reference_coverage;
    std::optional<double> reference_area;
};

struct PlaceArgs {
    InputArgs in;
    std::string scenario_id;
};

struct SweepArgs {
    InputArgs in;
    std::vector<int> particle_counts;
    std::size_t subset = 20;
    std::string out_path; // optional CSV
};

struct SynthArgs {
    std::string map_path; // required for on-road-path
    std::string kind = "on-road-path";
    int count = 10;
    std::uint64_t seed = 0;
    double min_length = 30.0;
    double max_length = 80.0;
    std::string out_path = "scenarios.json";
};

struct SynthMapArgs {
    std::string layout = "grid-city"; // grid-city | parallel
    int blocks = 10;
    double block_m = 80.0;
    double lat = 42.3;
    double lon = -83.7;
    std::string name;
    std::optional<double> area_acres;
    std::string out_path = "map.osm";
};

/// Unreadable input file.
class InputError : public Error {
public:
    using Error::Error;
};

[[nodiscard]] inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes via a temporary sibling and renames it into place.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write '" + path + "'");
        out << content;
        if (!out.flush()) throw InputError("cannot write '" + path + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw InputError("cannot write '" + path + "': " + ec.message());
}

[[nodiscard]] inline std::string format_double(double v, int precision = 6) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << v;
    return s.str();
}

namespace detail {

struct Loaded {
    RunConfig cfg;
    RoadStructure map;
    RoadModel road;
    ScenarioLoadResult scenarios;
};

[[nodiscard]] inline RunConfig resolve_config(const InputArgs& in) {
    RunConfig cfg;
    if (!in.config_path.empty()) apply_config_text(cfg, read_file(in.config_path), in.config_path);
    for (const auto& [k, v] : in.overrides) apply_setting(cfg, k, v);
    cfg.validate();
    return cfg;
}

[[nodiscard]] inline RoadStructure load_map(const std::string& path, const std::string& meta_path, double resample_m) {
    RoadStructure map;
    try {
        map = parse_osm(read_file(path), resample_m);
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    map.name = std::filesystem::path(path).stem().string();
    std::string meta = meta_path;
    if (meta.empty() && std::filesystem::exists(path + ".meta")) meta = path + ".meta";
    if (!meta.empty()) {
        try {
            const auto md = parse_map_metadata(read_file(meta));
            if (md.name) map.name = *md.name;
            map.area_acres = md.area_acres;
        } catch (const InputError&) {
            throw;
        } catch (const Error& e) {
            throw ValidationError(meta + ": " + e.what());
        }
    }
    return map;
}

[[nodiscard]] inline Loaded load_inputs(const InputArgs& in, std::ostream& err) {
    Loaded l;
    l.cfg = resolve_config(in);
    l.map = load_map(in.map_path, in.map_meta_path, l.cfg.resample_m);
    l.road = build_road_model(l.map, l.cfg.grid_m);
    try {
        l.scenarios = load_scenarios(read_file(in.scenarios_path), l.cfg.resample_m);
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError(in.scenarios_path + ": " + e.what());
    }
    for (const auto& r : l.scenarios.rejected) err << "rejected scenario " << r << "\n";
    for (const auto& w : l.scenarios.warnings) err << "warning: " << w << "\n";
    return l;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitFailure;
    }
}

} // namespace detail

/// Runs the full evaluation and writes the report (and optional GeoJSON).
inline int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        auto l = detail::load_inputs(args.in, err);
        FilterParams params = l.cfg.filter;
        params.seed = l.cfg.master_seed;
        BenchOptions opts;
        opts.jobs = l.cfg.jobs;
        opts.area_acres = l.map.area_acres;
        if (args.reference_coverage || args.reference_area) {
            if (!args.reference_coverage || !args.reference_area)
                throw ParameterError("--reference-coverage and --reference-area go together");
            opts.reference = std::pair{*args.reference_coverage, *args.reference_area};
        }
        const auto report = baseline_effectiveness(l.scenarios.set, l.road, params, l.map.name, opts);

        auto j = to_json(report);
        j["config"] = l.cfg.effective();
        write_file_atomic(l.cfg.report_path, j.dump(2) + "\n");
        if (!l.cfg.geojson_path.empty())
            write_file_atomic(l.cfg.geojson_path,
                              placements_geojson(l.scenarios.set, l.road, l.map, report).dump(1) + "\n");

        out << "map: " << report.map_name << "\n";
        out << "category  count  effectiveness\n";
        for (const auto& [k, c] : report.per_category) {
            out << std::setw(8) << k << "  " << std::setw(5) << c.count << "  "
                << (c.effectiveness ? format_double(*c.effectiveness, 4) : std::string("absent")) << "\n";
        }
        out << "scenario coverage: " << format_double(report.coverage, 4) << "\n";
        if (report.land_efficiency) out << "land efficiency: " << format_double(*report.land_efficiency, 4) << "\n";
        out << "report written to " << l.cfg.report_path << "\n";
        return kExitOk;
    });
}

/// Places one scenario and writes its per-iteration trace.
inline int cmd_place(const PlaceArgs& args, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        auto l = detail::load_inputs(args.in, err);
        const Scenario* z = l.scenarios.set.find(args.scenario_id);
        if (!z) {
            err << "error: unknown scenario id '" << args.scenario_id << "'; available:";
            for (const auto* s : l.scenarios.set.all()) err << " " << s->id;
            err << "\n";
            return kExitBadInput;
        }
        FilterParams params = l.cfg.filter;
        params.seed = scenario_seed(l.cfg.master_seed, z->id); // same stream as in `evaluate`
        PlacementOptions opts;
        opts.workers = l.cfg.jobs;
        const auto r = compute_single_scenario(*z, l.road, params, opts);

        std::ostringstream csv;
        csv << "t,q_star,q_mean,gamma\n";
        for (const auto& row : r.trace) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g\n", row.t, row.q_star, row.q_mean, row.gamma);
            csv << buf;
        }
        write_file_atomic(l.cfg.trace_path, csv.str());

        out << "scenario: " << r.scenario_id << "\n";
        out << "best pose: tx=" << format_double(r.best_pose.tx(), 3) << " ty=" << format_double(r.best_pose.ty(), 3)
            << " theta=" << format_double(r.best_pose.theta(), 6) << "\n";
        out << "compatibility: " << format_double(r.compatibility, 4) << "\n";
        out << "iterations: " << r.iterations << "\n";
        out << "termination: " << to_string(r.termination) << "\n";
        out << "trace written to " << l.cfg.trace_path << "\n";
        return kExitOk;
    });
}

struct SweepRow {
    int n_particles = 0;
    double coverage = 0.0;
    std::optional<double> rel_change; // |delta| / previous coverage
};

/// Coverage of a seeded scenario subset at each particle count.
inline int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        if (args.particle_counts.size() < 2) throw ParameterError("sweep needs at least two particle counts");
        for (int n : args.particle_counts)
            if (n < 2) throw ParameterError("particle counts must be >= 2");
        auto l = detail::load_inputs(args.in, err);

        auto all = l.scenarios.set.all();
        std::sort(all.begin(), all.end(), [](const Scenario* a, const Scenario* b) { return a->id < b->id; });
        std::mt19937_64 rng(mix_seed(l.cfg.master_seed, 0x5357454550ull));
        std::shuffle(all.begin(), all.end(), rng);
        if (args.subset > 0 && all.size() > args.subset) all.resize(args.subset);
        std::vector<Scenario> picked;
        for (const auto* z : all) picked.push_back(*z);
        const auto subset = make_clustered_set(std::move(picked));

        std::vector<SweepRow> rows;
        for (int n : args.particle_counts) {
            FilterParams params = l.cfg.filter;
            params.n_particles = n;
            params.seed = l.cfg.master_seed;
            BenchOptions opts;
            opts.jobs = l.cfg.jobs;
            const auto rep = baseline_effectiveness(subset, l.road, params, l.map.name, opts);
            SweepRow row{n, rep.coverage, std::nullopt};
            if (!rows.empty() && rows.back().coverage > 0.0)
                row.rel_change = std::abs(row.coverage - rows.back().coverage) / rows.back().coverage;
            rows.push_back(row);
        }

        std::optional<int> settled;
        std::ostringstream csv;
        csv << "n_particles,coverage,rel_change,below_1pct\n";
        for (const auto& r : rows) {
            const bool below = r.rel_change && *r.rel_change < 0.01;
            if (below && !settled) settled = r.n_particles;
            csv << r.n_particles << "," << format_double(r.coverage, 6) << ","
                << (r.rel_change ? format_double(*r.rel_change, 6) : std::string()) << "," << (below ? 1 : 0) << "\n";
        }
        out << "subset: " << subset.size() << " scenarios\n" << csv.str();
        if (settled) out << "first particle count with change < 1%: " << *settled << "\n";
        else out << "no particle count reached a change below 1%\n";
        if (!args.out_path.empty()) write_file_atomic(args.out_path, csv.str());
        return kExitOk;
    });
}

/// Writes `count` synthetic scenarios plus a sidecar of planted poses.
inline int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const auto kind = parse_synth_kind(args.kind);
        if (!kind) throw ParameterError("unknown scenario kind '" + args.kind + "' (on-road-path, two-crossing, two-parallel)");
        if (args.count < 1) throw ParameterError("count must be >= 1");
        if (!(args.min_length >= kMinTrajectoryLengthM) || args.max_length < args.min_length)
            throw ParameterError("lengths must satisfy 5 <= min-length <= max-length");
        RoadStructure map;
        if (!args.map_path.empty()) map = detail::load_map(args.map_path, "", kDefaultResampleM);
        else if (*kind == SynthKind::on_road_path) throw ParameterError("on-road-path synthesis needs --map");

        std::vector<Scenario> scenarios;
        nlohmann::json planted = nlohmann::json::object();
        const int width = static_cast<int>(std::to_string(args.count - 1).size());
        for (int i = 0; i < args.count; ++i) {
            const std::uint64_t s = mix_seed(args.seed, static_cast<std::uint64_t>(i));
            std::mt19937_64 len_rng(s);
            const double len =
                args.min_length + (args.max_length - args.min_length) * std::uniform_real_distribution<double>(0, 1)(len_rng);
            auto syn = synthesize_scenario(map, *kind, len, s);
            std::ostringstream id;
            id << args.kind << "-" << std::setw(width) << std::setfill('0') << i;
            syn.scenario.id = id.str();
            if (syn.planted) planted[syn.scenario.id] = to_json(*syn.planted);
            scenarios.push_back(std::move(syn.scenario));
        }
        std::vector<const Scenario*> ptrs;
        for (const auto& z : scenarios) ptrs.push_back(&z);
        write_file_atomic(args.out_path, dump_scenarios(ptrs));
        write_file_atomic(args.out_path + ".planted.json", planted.dump(1) + "\n");
        out << "wrote " << scenarios.size() << " " << args.kind << " scenarios to " << args.out_path << "\n";
        return kExitOk;
    });
}

/// Writes a synthetic OSM map (and metadata sidecar when named or sized).
inline int cmd_synth_map(const SynthMapArgs& args, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        if (args.blocks < 1 || !(args.block_m > 0.0)) throw ParameterError("blocks and block size must be positive");
        RoadStructure map;
        if (args.layout == "grid-city") map = make_grid_city(args.blocks, args.blocks, args.block_m);
        else if (args.layout == "parallel")
            map = make_parallel_roads(args.blocks + 1, args.block_m, args.blocks * args.block_m);
        else throw ParameterError("unknown layout '" + args.layout + "' (grid-city, parallel)");
        // One node per block corner is enough; parse_osm resamples.
        for (auto& road : map.roads) {
            Polyline sparse;
            for (std::size_t i = 0; i < road.size(); ++i) {
                const double along = road[i].x + road[i].y; // one coordinate is constant per road
                if (i == 0 || i + 1 == road.size() || std::fmod(along, args.block_m) == 0.0) sparse.push_back(road[i]);
            }
            road = std::move(sparse);
        }
        write_file_atomic(args.out_path, write_osm(map, {args.lat, args.lon}));
        if (!args.name.empty() || args.area_acres) {
            std::ostringstream meta;
            if (!args.name.empty()) meta << "name = " << args.name << "\n";
            if (args.area_acres) meta << "area_acres = " << *args.area_acres << "\n";
            write_file_atomic(args.out_path + ".meta", meta.str());
        }
        out << "wrote " << args.layout << " map with " << map.roads.size() << " roads to " << args.out_path << "\n";
        return kExitOk;
    });
}

} // namespace pgeval::cli

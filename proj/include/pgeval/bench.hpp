#pragma once

// Whole-map evaluation over a clustered scenario set and the aggregate
// metrics derived from it.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgeval/error.hpp"
#include "pgeval/parallel.hpp"
#include "pgeval/placement.hpp"
#include "pgeval/roadnet.hpp"
#include "pgeval/scenario.hpp"

namespace pgeval {

struct CategoryResult {
    std::optional<double> effectiveness; // absent for an empty category
    std::size_t count = 0;
    std::vector<PlacementResult> results; // ordered by scenario id
};

struct EffectivenessReport {
    std::string map_name;
    std::map<int, CategoryResult> per_category;
    double coverage = 0.0;
    std::optional<double> coverage_by_category_mean;
    std::optional<double> land_efficiency;
    FilterParams params_used;
};

/// Seed of one scenario's run; independent of which other scenarios exist.
[[nodiscard]] inline std::uint64_t scenario_seed(std::uint64_t master_seed, std::string_view scenario_id) noexcept {
    return mix_seed(master_seed, stable_hash(scenario_id));
}

/// Mean compatibility over every scenario, each weighted equally.
[[nodiscard]] inline double scenario_coverage(const EffectivenessReport& report) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [k, c] : report.per_category)
        for (const auto& r : c.results) {
            sum += r.compatibility;
            ++n;
        }
    if (n == 0) throw ValidationError("scenario coverage of a report without scenarios");
    return sum / static_cast<double>(n);
}

/// Coverage per acre relative to a reference facility.
[[nodiscard]] inline double land_efficiency(double coverage, double area_acres, double reference_coverage,
                                            double reference_area_acres) {
    if (!(area_acres > 0.0) || !(reference_area_acres > 0.0)) throw ParameterError("land areas must be positive");
    if (!(reference_coverage > 0.0)) throw ParameterError("reference coverage must be positive");
    return (coverage / area_acres) / (reference_coverage / reference_area_acres);
}

struct BenchOptions {
    unsigned jobs = 1;
    /// Area of the evaluated map; land efficiency is absent without it.
    std::optional<double> area_acres;
    /// (coverage, area) of the reference facility; defaults to the map itself.
    std::optional<std::pair<double, double>> reference;
};

/// Runs the placement search for every scenario (seeded from params.seed and
/// the scenario id) and aggregates per-category effectiveness and coverage.
[[nodiscard]] inline EffectivenessReport baseline_effectiveness(const ClusteredScenarioSet& set, const RoadModel& road,
                                                                const FilterParams& params,
                                                                const std::string& map_name,
                                                                const BenchOptions& opts = {}) {
    params.validate();
    const auto scenarios = set.all();
    if (scenarios.empty()) throw ValidationError("no scenarios to evaluate");

    std::vector<PlacementResult> results(scenarios.size());
    parallel_for(scenarios.size(), opts.jobs, [&](std::size_t i) {
        FilterParams p = params;
        p.seed = scenario_seed(params.seed, scenarios[i]->id);
        results[i] = compute_single_scenario(*scenarios[i], road, p);
    });

    EffectivenessReport report;
    report.map_name = map_name;
    report.params_used = params;
    for (int k = 1; k <= set.K; ++k) report.per_category[k];
    for (std::size_t i = 0; i < scenarios.size(); ++i)
        report.per_category[scenarios[i]->category].results.push_back(std::move(results[i]));

    double cat_sum = 0.0;
    int cat_n = 0;
    for (auto& [k, c] : report.per_category) {
        std::sort(c.results.begin(), c.results.end(),
                  [](const PlacementResult& a, const PlacementResult& b) { return a.scenario_id < b.scenario_id; });
        c.count = c.results.size();
        if (c.count == 0) continue;
        double sum = 0.0;
        for (const auto& r : c.results) sum += r.compatibility;
        c.effectiveness = sum / static_cast<double>(c.count);
        cat_sum += *c.effectiveness;
        ++cat_n;
    }
    report.coverage = scenario_coverage(report);
    if (cat_n > 0) report.coverage_by_category_mean = cat_sum / cat_n;
    if (opts.area_acres && report.coverage > 0.0) {
        const auto ref = opts.reference.value_or(std::pair{report.coverage, *opts.area_acres});
        report.land_efficiency = land_efficiency(report.coverage, *opts.area_acres, ref.first, ref.second);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Serialization

[[nodiscard]] inline nlohmann::json to_json(const FilterParams& p) {
    return {{"n_particles", p.n_particles}, {"sigma_xy", p.sigma_xy},   {"sigma_theta", p.sigma_theta},
            {"rho_r", p.rho_r},             {"rho_c", p.rho_c},         {"q_tilde", p.q_tilde},
            {"t_max", p.t_max},             {"q_d", p.q_d},             {"lambda0", p.lambda0},
            {"alpha_decay", p.alpha_decay}, {"seed", p.seed}};
}

[[nodiscard]] inline nlohmann::json to_json(const Pose& x) {
    return {{"tx", x.tx()}, {"ty", x.ty()}, {"theta", x.theta()}};
}

[[nodiscard]] inline nlohmann::json to_json(const PlacementResult& r) {
    return {{"scenario_id", r.scenario_id},
            {"best_pose", to_json(r.best_pose)},
            {"compatibility", r.compatibility},
            {"iterations", r.iterations},
            {"termination", to_string(r.termination)}};
}

[[nodiscard]] inline nlohmann::json to_json(const EffectivenessReport& rep) {
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json cats = json::object();
    for (const auto& [k, c] : rep.per_category) {
        json results = json::array();
        for (const auto& r : c.results) results.push_back(to_json(r));
        cats[std::to_string(k)] = {{"effectiveness", opt(c.effectiveness)}, {"count", c.count}, {"results", results}};
    }
    return {{"map_name", rep.map_name},
            {"per_category", cats},
            {"coverage", rep.coverage},
            {"coverage_by_category_mean", opt(rep.coverage_by_category_mean)},
            {"land_efficiency", opt(rep.land_efficiency)},
            {"params_used", to_json(rep.params_used)}};
}

/// GeoJSON FeatureCollection of every best placement: each placed trajectory
/// and its matching road segment (cell centers) as LineStrings. Coordinates
/// are lon/lat when the map came from GPS, map meters otherwise.
[[nodiscard]] inline nlohmann::json placements_geojson(const ClusteredScenarioSet& set, const RoadModel& road,
                                                       const RoadStructure& map, const EffectivenessReport& rep) {
    using nlohmann::json;
    auto coord = [&](const Point2& p) {
        if (map.central_meridian) {
            const LatLon ll = unproject_sinusoidal(p, *map.central_meridian);
            return json::array({ll.lon, ll.lat});
        }
        return json::array({p.x, p.y});
    };
    json features = json::array();
    for (const auto& [k, c] : rep.per_category) {
        for (const auto& r : c.results) {
            const Scenario* z = set.find(r.scenario_id);
            if (!z) continue;
            for (const auto& v : z->vehicles) {
                const auto placed = apply_pose(v.points, r.best_pose);
                const auto matched = matching_segment(rasterize(placed, road.spec()), road.index);
                json line = json::array(), seg = json::array();
                for (const auto& p : placed) line.push_back(coord(p));
                for (const auto& cell : matched) seg.push_back(coord(road.spec().cell_center(cell)));
                json props = {{"scenario_id", z->id}, {"category", z->category}, {"vehicle_id", v.vehicle_id},
                              {"compatibility", r.compatibility}};
                props["role"] = "trajectory";
                features.push_back({{"type", "Feature"}, {"properties", props},
                                    {"geometry", {{"type", "LineString"}, {"coordinates", line}}}});
                props["role"] = "matching_segment";
                features.push_back({{"type", "Feature"}, {"properties", props},
                                    {"geometry", {{"type", "LineString"}, {"coordinates", seg}}}});
            }
        }
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

} // namespace pgeval

#pragma once

// Multi-vehicle scenarios: ingestion, validation, serialization and
// synthetic fixtures carved from (or shaped like) road layouts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pgeval/error.hpp"
#include "pgeval/geo.hpp"
#include "pgeval/osm.hpp"
#include "pgeval/roadnet.hpp"

namespace pgeval {

/// Scenarios whose vehicles all travel less than this are not informative.
inline constexpr double kMinTrajectoryLengthM = 5.0;

struct Trajectory {
    std::string vehicle_id;
    std::vector<Point2> points; // scenario-local meters
};

struct Scenario {
    std::string id;
    int category = 1;
    std::vector<Trajectory> vehicles;
};

struct ClusteredScenarioSet {
    std::map<int, std::vector<Scenario>> clusters; // category -> scenarios, every k in [1, K] present
    int K = 0;

    [[nodiscard]] std::size_t size() const noexcept {
        std::size_t n = 0;
        for (const auto& [k, c] : clusters) n += c.size();
        return n;
    }

    /// All scenarios ordered by category, then by file order.
    [[nodiscard]] std::vector<const Scenario*> all() const {
        std::vector<const Scenario*> out;
        for (const auto& [k, c] : clusters)
            for (const auto& z : c) out.push_back(&z);
        return out;
    }

    [[nodiscard]] const Scenario* find(std::string_view id) const noexcept {
        for (const auto& [k, c] : clusters)
            for (const auto& z : c)
                if (z.id == id) return &z;
        return nullptr;
    }
};

/// Groups scenarios by category; K is the largest category present.
[[nodiscard]] inline ClusteredScenarioSet make_clustered_set(std::vector<Scenario> scenarios) {
    ClusteredScenarioSet set;
    for (auto& z : scenarios) {
        if (z.category < 1) throw ValidationError("scenario " + z.id + ": category must be >= 1");
        set.K = std::max(set.K, z.category);
        set.clusters[z.category].push_back(std::move(z));
    }
    for (int k = 1; k <= set.K; ++k) set.clusters[k];
    return set;
}

/// One diagnostic per violated scenario invariant; empty when valid.
[[nodiscard]] inline std::vector<std::string> validate_scenario(const Scenario& z) {
    std::vector<std::string> out;
    if (z.category < 1) out.push_back("category " + std::to_string(z.category) + " is below 1");
    if (z.vehicles.empty()) {
        out.emplace_back("empty vehicle list");
        return out;
    }
    bool long_enough = false;
    for (const auto& v : z.vehicles) {
        if (v.points.size() < 2) out.push_back("vehicle " + v.vehicle_id + " has fewer than 2 points");
        bool finite = true;
        for (std::size_t i = 0; i < v.points.size(); ++i) {
            if (!v.points[i].finite()) {
                out.push_back("non-finite point at vehicle " + v.vehicle_id + ", index " + std::to_string(i));
                finite = false;
                break;
            }
        }
        if (finite && polyline_length(v.points) > kMinTrajectoryLengthM) long_enough = true;
    }
    if (!long_enough) out.emplace_back("min-length: no vehicle trajectory is longer than 5 m");
    return out;
}

/// Shifts all trajectories so that the centroid of every point is the origin.
inline void center_scenario(Scenario& z) {
    Point2 sum;
    std::size_t n = 0;
    for (const auto& v : z.vehicles)
        for (const auto& p : v.points) {
            sum += p;
            ++n;
        }
    if (n == 0) return;
    const Point2 c = (1.0 / static_cast<double>(n)) * sum;
    for (auto& v : z.vehicles)
        for (auto& p : v.points) p -= c;
}

enum class Crs { gps, local_meters };

struct ScenarioLoadResult {
    ClusteredScenarioSet set;
    std::vector<std::string> rejected; // "<scenario id>: <diagnostic>"
    std::vector<std::string> warnings;
};

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
    throw ParseError("scenario file: " + path + ": " + what);
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) schema_error(path, std::string("missing key '") + key + "'");
    return *it;
}

} // namespace detail

/// Parses a scenario file, projecting GPS input per scenario about its own
/// mean longitude, resampling at `resample_m` and centering each scenario.
/// Scenarios that fail validation are dropped and listed in `rejected`.
[[nodiscard]] inline ScenarioLoadResult load_scenarios(std::string_view document,
                                                       double resample_m = kDefaultResampleM) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario file is not valid JSON: ") + e.what(), e.byte);
    }
    if (!doc.is_object()) detail::schema_error("$", "expected an object");
    const auto& crs_node = detail::require(doc, "crs", "$");
    if (!crs_node.is_string()) detail::schema_error("$.crs", "expected a string");
    Crs crs;
    if (crs_node == "gps") crs = Crs::gps;
    else if (crs_node == "local_meters") crs = Crs::local_meters;
    else detail::schema_error("$.crs", "expected \"gps\" or \"local_meters\"");

    const auto& list = detail::require(doc, "scenarios", "$");
    if (!list.is_array()) detail::schema_error("$.scenarios", "expected an array");
    if (list.empty()) throw ValidationError("scenario file contains no scenarios");

    ScenarioLoadResult result;
    std::vector<Scenario> accepted;
    std::vector<std::string> seen_ids;
    for (std::size_t s = 0; s < list.size(); ++s) {
        const std::string sp = "$.scenarios[" + std::to_string(s) + "]";
        const auto& node = list[s];
        if (!node.is_object()) detail::schema_error(sp, "expected an object");
        const auto& id = detail::require(node, "id", sp);
        if (!id.is_string()) detail::schema_error(sp + ".id", "expected a string");
        const auto& cat = detail::require(node, "category", sp);
        if (!cat.is_number_integer()) detail::schema_error(sp + ".category", "expected an integer");
        if (cat.get<long long>() < 1) throw ValidationError(sp + ".category: category must be >= 1");
        if (cat.get<long long>() > 1'000'000) detail::schema_error(sp + ".category", "category out of range");
        const auto& vehicles = detail::require(node, "vehicles", sp);
        if (!vehicles.is_array()) detail::schema_error(sp + ".vehicles", "expected an array");

        Scenario z;
        z.id = id.get<std::string>();
        z.category = cat.get<int>();
        if (std::find(seen_ids.begin(), seen_ids.end(), z.id) != seen_ids.end())
            throw ValidationError(sp + ".id: duplicate scenario id '" + z.id + "'");
        seen_ids.push_back(z.id);

        std::vector<std::vector<LatLon>> gps;
        for (std::size_t v = 0; v < vehicles.size(); ++v) {
            const std::string vp = sp + ".vehicles[" + std::to_string(v) + "]";
            const auto& vn = vehicles[v];
            if (!vn.is_object()) detail::schema_error(vp, "expected an object");
            const auto& vid = detail::require(vn, "id", vp);
            if (!vid.is_string()) detail::schema_error(vp + ".id", "expected a string");
            const auto& traj = detail::require(vn, "trajectory", vp);
            if (!traj.is_array()) detail::schema_error(vp + ".trajectory", "expected an array");
            Trajectory t{vid.get<std::string>(), {}};
            std::vector<LatLon> ll;
            for (std::size_t i = 0; i < traj.size(); ++i) {
                const auto& pair = traj[i];
                const std::string pp = vp + ".trajectory[" + std::to_string(i) + "]";
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
                    detail::schema_error(pp, "expected a pair of numbers");
                const double a = pair[0].get<double>(), b = pair[1].get<double>();
                if (crs == Crs::gps) ll.push_back({a, b});
                else t.points.push_back({a, b});
            }
            gps.push_back(std::move(ll));
            z.vehicles.push_back(std::move(t));
        }

        if (crs == Crs::gps) {
            std::vector<LatLon> all;
            for (const auto& g : gps) all.insert(all.end(), g.begin(), g.end());
            const double meridian = mean_longitude(all);
            try {
                for (std::size_t v = 0; v < gps.size(); ++v) z.vehicles[v].points = project_sinusoidal(gps[v], meridian);
            } catch (const ValidationError& e) {
                result.rejected.push_back(z.id + ": " + e.what());
                continue;
            }
        }

        auto diags = validate_scenario(z);
        if (!diags.empty()) {
            for (auto& d : diags) result.rejected.push_back(z.id + ": " + d);
            continue;
        }
        for (auto& v : z.vehicles) v.points = resample_polyline(v.points, resample_m);
        center_scenario(z);
        accepted.push_back(std::move(z));
    }
    if (accepted.empty()) throw ValidationError("scenario file has no valid scenarios");

    result.set = make_clustered_set(std::move(accepted));
    for (const auto& [k, c] : result.set.clusters)
        if (c.empty()) result.warnings.push_back("category " + std::to_string(k) + " has no scenarios");
    return result;
}

/// Serializes scenarios in the local-meter form of the scenario file.
[[nodiscard]] inline std::string dump_scenarios(const std::vector<const Scenario*>& scenarios) {
    using nlohmann::json;
    json list = json::array();
    for (const Scenario* z : scenarios) {
        json vehicles = json::array();
        for (const auto& v : z->vehicles) {
            json traj = json::array();
            for (const auto& p : v.points) traj.push_back({p.x, p.y});
            vehicles.push_back({{"id", v.vehicle_id}, {"trajectory", std::move(traj)}});
        }
        list.push_back({{"id", z->id}, {"category", z->category}, {"vehicles", std::move(vehicles)}});
    }
    json doc = {{"crs", "local_meters"}, {"scenarios", std::move(list)}};
    return doc.dump(1) + "\n";
}

[[nodiscard]] inline std::string dump_scenarios(const ClusteredScenarioSet& set) { return dump_scenarios(set.all()); }

// ---------------------------------------------------------------------------
// Synthetic scenarios

enum class SynthKind { on_road_path, two_crossing, two_parallel };

[[nodiscard]] inline std::optional<SynthKind> parse_synth_kind(std::string_view s) noexcept {
    if (s == "on-road-path") return SynthKind::on_road_path;
    if (s == "two-crossing") return SynthKind::two_crossing;
    if (s == "two-parallel") return SynthKind::two_parallel;
    return std::nullopt;
}

[[nodiscard]] inline const char* to_string(SynthKind k) noexcept {
    switch (k) {
    case SynthKind::on_road_path: return "on-road-path";
    case SynthKind::two_crossing: return "two-crossing";
    case SynthKind::two_parallel: return "two-parallel";
    }
    return "?";
}

/// Category label given to each synthetic kind.
[[nodiscard]] inline int synth_category(SynthKind k) noexcept {
    return k == SynthKind::two_parallel ? 4 : 1;
}

inline constexpr double kParallelGapM = 4.0;

struct SynthesizedScenario {
    Scenario scenario;
    /// Pose mapping the local frame back onto the source road (on-road-path only).
    std::optional<Pose> planted;
};

/// Builds a scenario that the given map can host (on-road-path) or one of two
/// analytic two-vehicle layouts. Deterministic per seed.
[[nodiscard]] inline SynthesizedScenario synthesize_scenario(const RoadStructure& map, SynthKind kind,
                                                             double length_m, std::uint64_t seed,
                                                             double resample_m = kDefaultResampleM) {
    if (!(length_m >= kMinTrajectoryLengthM))
        throw ParameterError("synthetic scenario length must be at least 5 m");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SynthesizedScenario out;
    Scenario& z = out.scenario;
    z.id = std::string(to_string(kind)) + "-" + std::to_string(seed);
    z.category = synth_category(kind);

    if (kind == SynthKind::on_road_path) {
        if (map.roads.empty()) throw EmptyMapError("cannot carve a path from an empty map");
        std::vector<std::size_t> candidates;
        for (std::size_t r = 0; r < map.roads.size(); ++r)
            if (polyline_length(map.roads[r]) >= length_m - 1e-9) candidates.push_back(r);
        if (candidates.empty())
            throw ValidationError("requested path length " + std::to_string(length_m) + " m exceeds every road");
        const auto& road = map.roads[candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)]];

        // Last knot from which `length_m` of road still remains.
        std::vector<double> arc(road.size(), 0.0);
        for (std::size_t i = 1; i < road.size(); ++i) arc[i] = arc[i - 1] + distance(road[i - 1], road[i]);
        std::size_t last_start = 0;
        while (last_start + 1 < road.size() && arc.back() - arc[last_start + 1] >= length_m - 1e-9) ++last_start;
        const std::size_t start = std::uniform_int_distribution<std::size_t>(0, last_start)(rng);
        std::vector<Point2> pts;
        for (std::size_t i = start; i < road.size(); ++i) {
            pts.push_back(road[i]);
            if (arc[i] - arc[start] >= length_m - 1e-9) break;
        }

        Point2 c;
        for (const auto& p : pts) c += p;
        c = (1.0 / static_cast<double>(pts.size())) * c;
        const Pose planted(c.x, c.y, kTwoPi * unit(rng));
        z.vehicles.push_back({"a", apply_pose(pts, planted.inverse())});
        out.planted = planted;
        return out;
    }

    const double half = 0.5 * length_m;
    auto segment = [&](Point2 a, Point2 b) {
        const Point2 ends[2] = {a, b};
        return resample_polyline(ends, resample_m);
    };
    if (kind == SynthKind::two_crossing) {
        // Two perpendicular passes whose crossing point sits somewhere in the
        // middle half of each path.
        const double sa = (unit(rng) - 0.5) * half;
        const double sb = (unit(rng) - 0.5) * half;
        Point2 a0{-half + sa, 0.0}, a1{half + sa, 0.0};
        Point2 b0{0.0, -half + sb}, b1{0.0, half + sb};
        if (unit(rng) < 0.5) std::swap(a0, a1);
        if (unit(rng) < 0.5) std::swap(b0, b1);
        z.vehicles.push_back({"a", segment(a0, a1)});
        z.vehicles.push_back({"b", segment(b0, b1)});
    } else {
        const double shift = (unit(rng) - 0.5) * half;
        Point2 a0{-half, 0.0}, a1{half, 0.0};
        Point2 b0{-half + shift, kParallelGapM}, b1{half + shift, kParallelGapM};
        if (unit(rng) < 0.5) std::swap(b0, b1);
        z.vehicles.push_back({"a", segment(a0, a1)});
        z.vehicles.push_back({"b", segment(b0, b1)});
    }
    center_scenario(z);
    const Pose spin(0.0, 0.0, kTwoPi * unit(rng));
    for (auto& v : z.vehicles) v.points = apply_pose(v.points, spin);
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic road maps

/// Manhattan layout of `nx` x `ny` square blocks; one straight road per grid line.
[[nodiscard]] inline RoadStructure make_grid_city(int nx, int ny, double block_m, double resample_m = kDefaultResampleM) {
    RoadStructure map;
    map.name = "grid-city";
    const double w = nx * block_m, h = ny * block_m;
    for (int j = 0; j <= ny; ++j) {
        const Point2 ends[2] = {{0.0, j * block_m}, {w, j * block_m}};
        map.roads.push_back(resample_polyline(ends, resample_m));
    }
    for (int i = 0; i <= nx; ++i) {
        const Point2 ends[2] = {{i * block_m, 0.0}, {i * block_m, h}};
        map.roads.push_back(resample_polyline(ends, resample_m));
    }
    return map;
}

/// `count` disjoint parallel roads running along x.
[[nodiscard]] inline RoadStructure make_parallel_roads(int count, double spacing_m, double length_m,
                                                       double resample_m = kDefaultResampleM) {
    RoadStructure map;
    map.name = "parallel-roads";
    for (int j = 0; j < count; ++j) {
        const Point2 ends[2] = {{0.0, j * spacing_m}, {length_m, j * spacing_m}};
        map.roads.push_back(resample_polyline(ends, resample_m));
    }
    return map;
}

} // namespace pgeval

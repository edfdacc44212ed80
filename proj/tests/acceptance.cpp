// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "pgeval/pgeval.hpp"

using namespace pgeval;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

// 1. Unconstrained FastDTW against the exact DP.
Outcome dtw_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> len(1, 64);
    std::uniform_real_distribution<double> coord(-50.0, 50.0);
    double worst = 0.0;
    const int pairs = 500;
    for (int k = 0; k < pairs; ++k) {
        std::vector<Point2> x(static_cast<std::size_t>(len(rng))), y(static_cast<std::size_t>(len(rng)));
        for (auto& p : x) p = {coord(rng), coord(rng)};
        for (auto& p : y) p = {coord(rng), coord(rng)};
        worst = std::max(worst, std::abs(dtw_fast(x, y).distance - dtw_exact(x, y).distance));
    }
    const double secs = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d pairs, max |fast - exact| = %.3g, %.2f s", pairs, worst, secs);
    return {worst <= 1e-9 && secs < 10.0, buf};
}

// 2. Nearest road cell against an exhaustive scan.
Outcome nearest_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(77);
    int mismatches = 0, queries = 0;
    for (int set = 0; set < 10; ++set) {
        std::uniform_int_distribution<int> count(1, 200);
        std::uniform_int_distribution<std::int64_t> c(-60, 60);
        std::vector<Cell> occ(static_cast<std::size_t>(count(rng)));
        for (auto& cell : occ) cell = {c(rng), c(rng)};
        const NearestRoadIndex idx(occ, 16);
        std::uniform_int_distribution<std::int64_t> q(-120, 120);
        for (int i = 0; i < 100; ++i, ++queries) {
            const Cell query{q(rng), q(rng)};
            Cell best = occ.front();
            for (const auto& cell : occ) {
                const auto d = squared_distance(query, cell), bd = squared_distance(query, best);
                if (d < bd || (d == bd && cell < best)) best = cell;
            }
            const Cell got = nearest_road_cell(idx, query);
            if (squared_distance(query, got) != squared_distance(query, best) || !(got == best)) ++mismatches;
        }
    }
    const double secs = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d queries, %d mismatches, %.2f s", queries, mismatches, secs);
    return {mismatches == 0 && secs < 5.0, buf};
}

// 3. Planted on-road paths on a 10x10 grid city.
Outcome planted_recovery() {
    const auto map = make_grid_city(10, 10, 80.0);
    const auto road = build_road_model(map, 2.0);
    std::mt19937_64 len_rng(3);
    std::uniform_real_distribution<double> len(30.0, 80.0);
    int good = 0;
    double slowest = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto syn = synthesize_scenario(map, SynthKind::on_road_path, len(len_rng), 1000 + s);
        FilterParams p;
        p.seed = scenario_seed(0, syn.scenario.id);
        const auto t0 = Clock::now();
        const auto r = compute_single_scenario(syn.scenario, road, p);
        const double secs = seconds_since(t0);
        slowest = std::max(slowest, secs);
        if (r.compatibility >= 0.9 && r.iterations <= 300 && secs < 60.0) ++good;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d/20 runs reached compatibility >= 0.9, slowest %.2f s", good, slowest);
    return {good >= 18 && slowest < 60.0, buf};
}

// 4. Likelihood on hand-derived fixtures.
Outcome likelihood_fixtures() {
    const GridSpec spec{2.0, 2.0, {0.0, 0.0}};
    RoadStructure map;
    const Point2 ends[2] = {{0, 1}, {20, 1}};
    map.roads.push_back(resample_polyline(ends, 1.0));
    auto [grid, index] = build_road_index(map, spec);
    const RoadModel road{bounding_box(map), std::move(grid), std::move(index)};

    std::vector<Point2> on, off, half;
    for (int i = 0; i < 10; ++i) {
        on.push_back({1.0 + 2.0 * i, 1.0});
        off.push_back({1.0 + 2.0 * i, 3.0});
        half.push_back({1.0 + 2.0 * i, i < 5 ? 1.0 : 3.0});
    }
    const double xi_on = dtw_feasibility(on, Pose{}, road);
    const double xi_off = dtw_feasibility(off, Pose{}, road);
    const double xi_half = dtw_feasibility(half, Pose{}, road);
    const Scenario z{"z", 1, {{"a", on}, {"b", off}, {"c", half}}};
    const double l = likelihood(road, Pose{}, z);
    const bool mean_ok = l == (xi_on + xi_off + xi_half) / 3.0;
    char buf[200];
    std::snprintf(buf, sizeof buf, "xi(overlap) = %g, xi(1-cell offset) = %g, L = %.6f vs mean %.6f", xi_on, xi_off, l,
                  (xi_on + xi_off + xi_half) / 3.0);
    return {xi_on == 1.0 && xi_off == 0.0 && mean_ok, buf};
}

// 5. Filter invariants.
Outcome filter_invariants() {
    const FilterParams defaults;
    const double g1 = decay_factor(10, 0.3, defaults);
    const double g2 = decay_factor(0, 0.6, defaults);
    bool decay_ok = std::abs(g1 - 0.90909) <= 1e-5 && std::abs(g2 - std::pow(5e-6, 0.1)) <= 1e-6;

    bool preserved = true;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n : {10, 37, 100, 500}) {
        std::vector<Pose> props;
        std::vector<double> w;
        for (int i = 0; i < n; ++i) {
            props.emplace_back(u(rng), u(rng), u(rng));
            w.push_back(u(rng));
        }
        const auto out = partial_resample(std::span<const Pose>(props), std::span<const double>(w), defaults, rng);
        std::vector<std::size_t> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return w[a] < w[b]; });
        const auto keep = static_cast<std::size_t>(std::ceil(0.4 * n - 1e-9));
        for (std::size_t k = static_cast<std::size_t>(n) - keep; k < static_cast<std::size_t>(n); ++k) {
            const Pose& a = out.particles[k];
            const Pose& b = props[order[k]];
            if (a.tx() != b.tx() || a.ty() != b.ty() || a.theta() != b.theta() || out.weights[k] != w[order[k]])
                preserved = false;
        }
    }

    bool monotone = true;
    const auto map = make_grid_city(4, 4, 60.0);
    const auto road = build_road_model(map, 2.0);
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto z = synthesize_scenario(map, s == 0 ? SynthKind::on_road_path : SynthKind::two_parallel, 40.0, s).scenario;
        FilterParams p;
        p.n_particles = 200;
        p.seed = s;
        const auto r = compute_single_scenario(z, road, p);
        for (std::size_t i = 1; i < r.trace.size(); ++i)
            if (r.trace[i].q_star < r.trace[i - 1].q_star) monotone = false;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "q* monotone: %s, top 40%% preserved: %s, gamma(10,0.3) = %.6f, gamma(0,0.6) = %.7f",
                  monotone ? "yes" : "no", preserved ? "yes" : "no", g1, g2);
    return {decay_ok && preserved && monotone, buf};
}

// 6. Land efficiency for two facilities measured against a 32-acre reference.
Outcome report_math() {
    const double mid_site = land_efficiency(0.9862, 42.0, 1.0, 32.0);
    const double large_site = land_efficiency(0.9943, 88.0, 1.0, 32.0);
    char buf[120];
    std::snprintf(buf, sizeof buf, "0.9862 @ 42 ac -> %.4f, 0.9943 @ 88 ac -> %.4f", mid_site, large_site);
    return {std::abs(mid_site - 0.7514) <= 1e-4 && std::abs(large_site - 0.3616) <= 1e-4, buf};
}

// 7. Two evaluate runs with the same inputs give the same bytes.
Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "pgeval_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ostringstream sink;
    cli::SynthMapArgs m;
    m.blocks = 5;
    m.block_m = 60.0;
    m.area_acres = 30.0;
    m.out_path = (dir / "map.osm").string();
    cli::SynthArgs s;
    s.map_path = m.out_path;
    s.count = 6;
    s.seed = 12;
    s.out_path = (dir / "scenarios.json").string();
    cli::SynthArgs c = s;
    c.kind = "two-crossing";
    c.count = 3;
    c.out_path = (dir / "crossing.json").string();
    if (cli::cmd_synth_map(m, sink, sink) != 0 || cli::cmd_synth(s, sink, sink) != 0) return {false, "setup failed"};

    auto run = [&](const std::string& report, const std::string& jobs) {
        cli::EvaluateArgs a;
        a.in.map_path = m.out_path;
        a.in.scenarios_path = s.out_path;
        a.in.overrides = {{"master_seed", "31"}, {"report", (dir / report).string()}, {"jobs", jobs}};
        return cli::cmd_evaluate(a, sink, sink);
    };
    if (run("a.json", "1") != 0 || run("b.json", "1") != 0 || run("c.json", "2") != 0)
        return {false, "evaluate failed: " + sink.str()};
    const auto a = cli::read_file((dir / "a.json").string());
    const bool same = a == cli::read_file((dir / "b.json").string());
    const bool same_jobs = a == cli::read_file((dir / "c.json").string());
    fs::remove_all(dir);
    return {same && same_jobs, std::string("repeat run identical: ") + (same ? "yes" : "no") +
                                   ", jobs=2 identical: " + (same_jobs ? "yes" : "no") + ", " +
                                   std::to_string(a.size()) + " bytes"};
}

// 8. Crossing scenarios fit a map with intersections better than parallel roads.
Outcome relative_capability() {
    std::vector<Scenario> zs;
    for (std::uint64_t s = 0; s < 4; ++s) zs.push_back(synthesize_scenario({}, SynthKind::two_crossing, 40.0, 500 + s).scenario);
    for (std::uint64_t s = 0; s < 2; ++s) zs.push_back(synthesize_scenario({}, SynthKind::two_parallel, 40.0, 600 + s).scenario);
    const auto set = make_clustered_set(std::move(zs));
    const auto grid = build_road_model(make_grid_city(4, 4, 60.0), 2.0);
    const auto parallel = build_road_model(make_parallel_roads(5, 60.0, 240.0), 2.0);
    const int crossing_category = synth_category(SynthKind::two_crossing);
    double sum_grid = 0.0, sum_par = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        FilterParams p;
        p.seed = seed;
        sum_grid += *baseline_effectiveness(set, grid, p, "grid").per_category.at(crossing_category).effectiveness;
        sum_par += *baseline_effectiveness(set, parallel, p, "parallel").per_category.at(crossing_category).effectiveness;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "crossing category E: grid %.4f vs parallel %.4f (mean of 5 seeds)", sum_grid / 5,
                  sum_par / 5);
    return {sum_grid > sum_par, buf};
}

} // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"dtw-oracle", dtw_oracle},
        {"nearest-road-oracle", nearest_oracle},
        {"planted-recovery", planted_recovery},
        {"likelihood-fixtures", likelihood_fixtures},
        {"filter-invariants", filter_invariants},
        {"land-efficiency", report_math},
        {"determinism", determinism},
        {"relative-capability", relative_capability},
    };
    int failed = 0;
    int i = 1;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", i++, name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

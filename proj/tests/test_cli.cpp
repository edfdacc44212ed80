#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"

using namespace pgeval;
using namespace pgeval::cli;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("pgeval_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    [[nodiscard]] std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void make_map(int blocks = 4, double block_m = 60.0) {
        SynthMapArgs a;
        a.blocks = blocks;
        a.block_m = block_m;
        a.name = "demo";
        a.area_acres = 32.0;
        a.out_path = path("map.osm");
        ASSERT_EQ(cmd_synth_map(a, sink_, sink_), kExitOk);
    }

    void make_scenarios(const std::string& kind, int count, std::uint64_t seed, const std::string& name) {
        SynthArgs a;
        if (kind == "on-road-path") a.map_path = path("map.osm");
        a.kind = kind;
        a.count = count;
        a.seed = seed;
        a.min_length = 30.0;
        a.max_length = 50.0;
        a.out_path = path(name);
        ASSERT_EQ(cmd_synth(a, sink_, sink_), kExitOk);
    }

    InputArgs inputs(const std::string& scenarios = "scenarios.json") const {
        InputArgs in;
        in.map_path = path("map.osm");
        in.scenarios_path = path(scenarios);
        return in;
    }

    fs::path dir_;
    std::ostringstream sink_;
};

} // namespace

TEST(RunConfig, Precedence) {
    RunConfig cfg;
    apply_config_text(cfg, "# comment\nn_particles = 300\nsigma_xy=4 # inline\n\nmaster_seed = 9\n", "cfg");
    EXPECT_EQ(cfg.filter.n_particles, 300);
    EXPECT_EQ(cfg.filter.sigma_xy, 4.0);
    EXPECT_EQ(cfg.master_seed, 9u);
    EXPECT_EQ(cfg.filter.rho_r, 0.6); // untouched default
    apply_setting(cfg, "n_particles", "500");
    EXPECT_EQ(cfg.filter.n_particles, 500);
    EXPECT_THROW(apply_config_text(cfg, "n_particle = 3\n", "cfg"), ParseError);
    EXPECT_THROW(apply_config_text(cfg, "n_particles = lots\n", "cfg"), ParseError);
    EXPECT_THROW(apply_config_text(cfg, "just words\n", "cfg"), ParseError);
    try {
        apply_config_text(cfg, "\n\nbogus = 1\n", "run.cfg");
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("run.cfg:3"), std::string::npos);
    }
}

TEST_F(CliTest, EvaluatePlantedScenarios) {
    make_map(6, 60.0);
    make_scenarios("on-road-path", 10, 5, "scenarios.json");
    write_file_atomic(path("run.cfg"), "n_particles = 200\nmaster_seed = 4\n");
    EvaluateArgs a;
    a.in = inputs();
    a.in.config_path = path("run.cfg");
    a.in.overrides = {{"n_particles", "500"}, {"report", path("report.json")}, {"geojson", path("out.geojson")}};
    std::ostringstream out, err;
    ASSERT_EQ(cmd_evaluate(a, out, err), kExitOk) << err.str();
    const auto rep = nlohmann::json::parse(read_file(path("report.json")));
    EXPECT_EQ(rep["params_used"]["n_particles"], 500);
    EXPECT_EQ(rep["config"]["master_seed"], 4);
    EXPECT_EQ(rep["map_name"], "demo");
    EXPECT_GE(rep["coverage"].get<double>(), 0.9);
    EXPECT_DOUBLE_EQ(rep["land_efficiency"].get<double>(), 1.0);
    EXPECT_EQ(rep["per_category"]["1"]["count"], 10);
    EXPECT_TRUE(fs::exists(path("out.geojson")));
    EXPECT_NE(out.str().find("scenario coverage"), std::string::npos);
}

TEST_F(CliTest, EvaluateIsByteIdentical) {
    make_map(3, 50.0);
    make_scenarios("two-crossing", 3, 1, "scenarios.json");
    EvaluateArgs a;
    a.in = inputs();
    a.in.overrides = {{"n_particles", "100"}, {"t_max", "40"}, {"master_seed", "8"}, {"report", path("r1.json")}};
    std::ostringstream out, err;
    ASSERT_EQ(cmd_evaluate(a, out, err), kExitOk) << err.str();
    a.in.overrides.back().second = path("r2.json");
    a.in.overrides.push_back({"jobs", "2"});
    ASSERT_EQ(cmd_evaluate(a, out, err), kExitOk) << err.str();
    EXPECT_EQ(read_file(path("r1.json")), read_file(path("r2.json")));
}

TEST_F(CliTest, BadInputsExitTwo) {
    make_map(2, 40.0);
    EvaluateArgs a;
    a.in = inputs("missing.json");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_evaluate(a, out, err), kExitBadInput);
    EXPECT_NE(err.str().find("cannot open"), std::string::npos);

    write_file_atomic(path("bad.json"), "{\"crs\": \"local_meters\", \"scenarios\": [{\"id\": 1}]}");
    a.in = inputs("bad.json");
    EXPECT_EQ(cmd_evaluate(a, out, err), kExitBadInput);

    make_scenarios("two-crossing", 1, 1, "scenarios.json");
    a.in = inputs();
    a.in.overrides = {{"rho_r", "2"}};
    EXPECT_EQ(cmd_evaluate(a, out, err), kExitBadInput);
    a.in.overrides = {{"nonsense", "2"}};
    EXPECT_EQ(cmd_evaluate(a, out, err), kExitBadInput);

    write_file_atomic(path("broken.osm"), "<osm><node id='1'");
    a.in = inputs();
    a.in.map_path = path("broken.osm");
    EXPECT_EQ(cmd_evaluate(a, out, err), kExitBadInput);
}

TEST_F(CliTest, PlaceWritesTrace) {
    make_map(4, 60.0);
    make_scenarios("on-road-path", 2, 3, "scenarios.json");
    PlaceArgs a;
    a.in = inputs();
    a.in.overrides = {{"trace", path("trace.csv")}};
    a.scenario_id = "on-road-path-1";
    std::ostringstream out, err;
    ASSERT_EQ(cmd_place(a, out, err), kExitOk) << err.str();
    std::istringstream csv(read_file(path("trace.csv")));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "t,q_star,q_mean,gamma");
    double prev = -1.0;
    int rows = 0;
    while (std::getline(csv, line)) {
        int t;
        double q_star, q_mean, gamma;
        ASSERT_EQ(std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &t, &q_star, &q_mean, &gamma), 4);
        EXPECT_EQ(t, rows);
        if (rows == 0) {
            EXPECT_EQ(gamma, 1.0);
        }
        EXPECT_GE(q_star, prev);
        prev = q_star;
        ++rows;
    }
    EXPECT_GE(rows, 1);

    a.scenario_id = "nope";
    std::ostringstream err2;
    EXPECT_EQ(cmd_place(a, out, err2), kExitBadInput);
    EXPECT_NE(err2.str().find("on-road-path-0"), std::string::npos);
}

TEST_F(CliTest, Sweep) {
    make_map(3, 50.0);
    make_scenarios("on-road-path", 4, 2, "scenarios.json");
    SweepArgs a;
    a.in = inputs();
    a.in.overrides = {{"t_max", "30"}};
    a.particle_counts = {50};
    std::ostringstream out, err;
    EXPECT_EQ(cmd_sweep(a, out, err), kExitBadInput);

    a.particle_counts = {50, 100};
    a.subset = 3;
    a.out_path = path("s1.csv");
    ASSERT_EQ(cmd_sweep(a, out, err), kExitOk) << err.str();
    a.out_path = path("s2.csv");
    ASSERT_EQ(cmd_sweep(a, out, err), kExitOk) << err.str();
    const auto s1 = read_file(path("s1.csv"));
    EXPECT_EQ(s1, read_file(path("s2.csv")));
    EXPECT_EQ(s1.rfind("n_particles,coverage,rel_change,below_1pct\n", 0), 0u);
    EXPECT_EQ(std::count(s1.begin(), s1.end(), '\n'), 3);
}

TEST_F(CliTest, SynthRoundTrip) {
    make_map(3, 50.0);
    make_scenarios("on-road-path", 5, 7, "a.json");
    make_scenarios("on-road-path", 5, 7, "b.json");
    EXPECT_EQ(read_file(path("a.json")), read_file(path("b.json")));
    const auto loaded = load_scenarios(read_file(path("a.json")));
    EXPECT_EQ(loaded.set.size(), 5u);
    EXPECT_EQ(loaded.set.K, 1);
    EXPECT_EQ(loaded.set.clusters.at(1).size(), 5u);
    const auto planted = nlohmann::json::parse(read_file(path("a.json.planted.json")));
    EXPECT_EQ(planted.size(), 5u);

    make_scenarios("two-crossing", 2, 7, "c.json");
    EXPECT_EQ(load_scenarios(read_file(path("c.json"))).set.clusters.at(1).size(), 2u);
    make_scenarios("two-parallel", 2, 7, "d.json");
    EXPECT_EQ(load_scenarios(read_file(path("d.json"))).set.K, 4);

    SynthArgs bad;
    bad.kind = "u-turn";
    bad.out_path = path("x.json");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_synth(bad, out, err), kExitBadInput);
    bad.kind = "on-road-path"; // without --map
    EXPECT_EQ(cmd_synth(bad, out, err), kExitBadInput);
}

TEST_F(CliTest, SynthMapRoundTrip) {
    make_map(2, 40.0);
    const auto map = parse_osm(read_file(path("map.osm")));
    EXPECT_EQ(map.roads.size(), 6u);
    for (const auto& r : map.roads) EXPECT_NEAR(polyline_length(r), 80.0, 1e-3);
    const auto meta = parse_map_metadata(read_file(path("map.osm.meta")));
    EXPECT_EQ(*meta.name, "demo");
    EXPECT_EQ(*meta.area_acres, 32.0);
}

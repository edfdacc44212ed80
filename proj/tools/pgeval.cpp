#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using pgeval::cli::InputArgs;

/// Filter/run flags shared by evaluate, place and sweep. Each flag maps to a
/// config key; only flags actually given override the config file.
struct TuningFlags {
    std::vector<std::pair<std::string, CLI::Option*>> options;
    std::vector<std::pair<std::string, std::string>> values;

    void attach(CLI::App& app) {
        const std::pair<const char*, const char*> flags[] = {
            {"--particles", "n_particles"}, {"--sigma-xy", "sigma_xy"},       {"--sigma-theta", "sigma_theta"},
            {"--rho-r", "rho_r"},           {"--rho-c", "rho_c"},             {"--q-tilde", "q_tilde"},
            {"--t-max", "t_max"},           {"--q-d", "q_d"},                 {"--lambda0", "lambda0"},
            {"--alpha-decay", "alpha_decay"}, {"--grid-m", "grid_m"},         {"--resample-m", "resample_m"},
            {"--seed", "master_seed"},      {"--jobs", "jobs"},               {"--report", "report"},
            {"--geojson", "geojson"},       {"--trace", "trace"},
        };
        values.resize(std::size(flags));
        for (std::size_t i = 0; i < std::size(flags); ++i) {
            values[i].first = flags[i].second;
            options.emplace_back(flags[i].second,
                                 app.add_option(flags[i].first, values[i].second, std::string("override ") + flags[i].second));
        }
    }

    [[nodiscard]] pgeval::cli::Overrides given() const {
        pgeval::cli::Overrides out;
        for (std::size_t i = 0; i < options.size(); ++i)
            if (options[i].second->count() > 0) out.push_back(values[i]);
        return out;
    }
};

void add_inputs(CLI::App& app, InputArgs& in) {
    app.add_option("map", in.map_path, "OSM XML road map")->required();
    app.add_option("scenarios", in.scenarios_path, "scenario JSON file")->required();
    app.add_option("-c,--config", in.config_path, "key = value config file");
    app.add_option("--map-meta", in.map_meta_path, "map metadata file (default: <map>.meta if present)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evaluate how well a road network hosts a set of multi-vehicle driving scenarios"};
    app.require_subcommand(1);

    pgeval::cli::EvaluateArgs eval;
    TuningFlags eval_flags;
    auto* evaluate = app.add_subcommand("evaluate", "score every scenario and write the effectiveness report");
    add_inputs(*evaluate, eval.in);
    eval_flags.attach(*evaluate);
    evaluate->add_option("--reference-coverage", eval.reference_coverage, "coverage of the reference facility");
    evaluate->add_option("--reference-area", eval.reference_area, "area in acres of the reference facility");

    pgeval::cli::PlaceArgs place;
    TuningFlags place_flags;
    auto* place_cmd = app.add_subcommand("place", "place one scenario and write the iteration trace");
    add_inputs(*place_cmd, place.in);
    place_cmd->add_option("scenario_id", place.scenario_id, "scenario to place")->required();
    place_flags.attach(*place_cmd);

    pgeval::cli::SweepArgs sweep;
    TuningFlags sweep_flags;
    auto* sweep_cmd = app.add_subcommand("sweep", "coverage versus particle count on a random scenario subset");
    add_inputs(*sweep_cmd, sweep.in);
    sweep_cmd->add_option("--counts", sweep.particle_counts, "particle counts, e.g. --counts 100 200 400")->required();
    sweep_cmd->add_option("--subset", sweep.subset, "scenarios in the random subset (0 = all)");
    sweep_cmd->add_option("--out", sweep.out_path, "CSV output path");
    sweep_flags.attach(*sweep_cmd);

    pgeval::cli::SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "write synthetic scenarios");
    synth_cmd->add_option("--map", synth.map_path, "OSM map to carve on-road paths from");
    synth_cmd->add_option("--kind", synth.kind, "on-road-path | two-crossing | two-parallel");
    synth_cmd->add_option("--count", synth.count, "number of scenarios");
    synth_cmd->add_option("--seed", synth.seed, "random seed");
    synth_cmd->add_option("--min-length", synth.min_length, "shortest path length in meters");
    synth_cmd->add_option("--max-length", synth.max_length, "longest path length in meters");
    synth_cmd->add_option("-o,--out", synth.out_path, "scenario file to write");

    pgeval::cli::SynthMapArgs smap;
    auto* smap_cmd = app.add_subcommand("synth-map", "write a synthetic OSM road map");
    smap_cmd->add_option("--layout", smap.layout, "grid-city | parallel");
    smap_cmd->add_option("--blocks", smap.blocks, "blocks per side");
    smap_cmd->add_option("--block-m", smap.block_m, "block size in meters");
    smap_cmd->add_option("--lat", smap.lat, "anchor latitude");
    smap_cmd->add_option("--lon", smap.lon, "anchor longitude");
    smap_cmd->add_option("--name", smap.name, "map name for the metadata file");
    smap_cmd->add_option("--area-acres", smap.area_acres, "area for the metadata file");
    smap_cmd->add_option("-o,--out", smap.out_path, "OSM file to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pgeval::cli::kExitBadInput;
    }

    if (*evaluate) {
        eval.in.overrides = eval_flags.given();
        return pgeval::cli::cmd_evaluate(eval, std::cout, std::cerr);
    }
    if (*place_cmd) {
        place.in.overrides = place_flags.given();
        return pgeval::cli::cmd_place(place, std::cout, std::cerr);
    }
    if (*sweep_cmd) {
        sweep.in.overrides = sweep_flags.given();
        return pgeval::cli::cmd_sweep(sweep, std::cout, std::cerr);
    }
    if (*synth_cmd) return pgeval::cli::cmd_synth(synth, std::cout, std::cerr);
    if (*smap_cmd) return pgeval::cli::cmd_synth_map(smap, std::cout, std::cerr);
    return pgeval::cli::kExitFailure;
}

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mmson/pipeline.hpp"
#include "mmson/serialize.hpp"

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> reward;
    std::optional<std::string> eval_mode;
    std::optional<int> threads;
};

struct ClusterFlags {
    std::optional<double> unit_distance;
    std::optional<double> outband_distance;
    std::optional<double> arrival_window;
};

struct SweepFlags {
    std::optional<int> seeds_per_size;
    std::optional<int> size_min;
    std::optional<int> size_max;
};

mmson::RunConfig build_config(const Globals& g, const ClusterFlags& cf, const SweepFlags& sf,
                              std::optional<int> episodes) {
    mmson::RunConfig c = g.config_path.empty() ? mmson::RunConfig{} : mmson::load_config(g.config_path);
    if (g.seed) c.seed = *g.seed;
    if (g.out) c.out_dir = *g.out;
    if (g.reward) c.reward_kind = mmson::parse_reward_kind(*g.reward);
    if (g.eval_mode) c.eval_mode = mmson::parse_eval_mode(*g.eval_mode);
    if (g.threads) c.threads = *g.threads;
    if (cf.unit_distance) c.floc.unit_distance_m = *cf.unit_distance;
    if (cf.outband_distance) c.floc.outband_distance_m = *cf.outband_distance;
    if (cf.arrival_window) c.floc.arrival_window = mmson::from_seconds(*cf.arrival_window);
    if (sf.seeds_per_size) c.sweep.seeds_per_size = *sf.seeds_per_size;
    if (sf.size_min || sf.size_max) {
        const int lo = sf.size_min.value_or(c.sweep.sizes.front());
        const int hi = sf.size_max.value_or(c.sweep.sizes.back());
        c.sweep.sizes.clear();
        for (int s = lo; s <= hi; ++s) c.sweep.sizes.push_back(s);
    }
    if (episodes) c.learning.episodes_max = *episodes;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mmWave self-organizing network simulator: FLOC clustering and Q-learning power allocation"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    ClusterFlags cf;
    SweepFlags sf;
    std::optional<int> episodes;

    app.add_option("--config", g.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--out", g.out, "artifact directory");
    app.add_option("--reward", g.reward, "reward function")->check(CLI::IsMember({"cdpq", "expq"}));
    app.add_option("--eval-mode", g.eval_mode, "interference scope for evaluation")
        ->check(CLI::IsMember({"in-cluster", "full-network"}));
    app.add_option("--threads", g.threads, "worker threads for training and sweeps");

    auto* deploy = app.add_subcommand("deploy", "draw a Poisson deployment and write layout.json");
    auto* cluster = app.add_subcommand("cluster", "run FLOC on layout.json and write clusters.json");
    cluster->add_option("--unit-distance", cf.unit_distance, "in-band radius [m]");
    cluster->add_option("--outband-distance", cf.outband_distance, "out-band radius [m]");
    cluster->add_option("--arrival-window", cf.arrival_window, "node arrival window [s]");
    auto* train = app.add_subcommand("train", "train one Q-learning agent per BS, cluster by cluster");
    train->add_option("--episodes", episodes, "maximum training rounds per cluster");
    auto* evaluate = app.add_subcommand("evaluate", "evaluate the learned powers");
    auto* sweep = app.add_subcommand("sweep", "cluster-size sweep comparing CDP-Q and EXP-Q");
    sweep->add_option("--seeds-per-size", sf.seeds_per_size, "seeds per cluster size");
    sweep->add_option("--size-min", sf.size_min, "smallest cluster size");
    sweep->add_option("--size-max", sf.size_max, "largest cluster size");
    sweep->add_option("--episodes", episodes, "maximum training rounds per cell");
    auto* report = app.add_subcommand("report", "summarize an artifact directory");
    auto* run = app.add_subcommand("run", "deploy, cluster, train and evaluate in one go");
    run->add_option("--episodes", episodes, "maximum training rounds per cluster");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? mmson::kExitOk : mmson::kExitValidation;
    }

    mmson::RunConfig config;
    try {
        config = build_config(g, cf, sf, episodes);
    } catch (const std::exception& e) {
        std::cerr << "[validate] " << e.what() << '\n';
        return mmson::kExitValidation;
    }

    try {
        if (deploy->parsed()) {
            mmson::stage_deploy(config);
        } else if (cluster->parsed()) {
            mmson::stage_cluster(config);
        } else if (train->parsed()) {
            mmson::stage_train(config);
        } else if (evaluate->parsed()) {
            mmson::stage_evaluate(config);
            std::cout << mmson::report(config.out_dir);
        } else if (run->parsed()) {
            mmson::run_pipeline(config);
            std::cout << mmson::report(config.out_dir);
        } else if (sweep->parsed()) {
            std::filesystem::create_directories(config.out_dir);
            mmson::write_text(std::filesystem::path(config.out_dir) / mmson::artifact::kConfig,
                              mmson::serialize_config(config));
            const auto result = mmson::sweep_cluster_sizes(config);
            mmson::write_sweep(config.out_dir, result);
            std::cout << mmson::report(config.out_dir);
        } else if (report->parsed()) {
            std::cout << mmson::report(config.out_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return mmson::exit_code_for(e);
    }
    return mmson::kExitOk;
}

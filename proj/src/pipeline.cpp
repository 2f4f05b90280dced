#include "mmson/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <future>
#include <map>
#include <sstream>

#include "mmson/channel.hpp"
#include "mmson/serialize.hpp"

namespace fs = std::filesystem;

namespace mmson {

const char* to_string(Stage s) noexcept {
    switch (s) {
        case Stage::Validate: return "validate";
        case Stage::Deploy: return "deploy";
        case Stage::Cluster: return "cluster";
        case Stage::Train: return "train";
        case Stage::Evaluate: return "evaluate";
        case Stage::Sweep: return "sweep";
        case Stage::Report: return "report";
    }
    return "?";
}

int exit_code_for(const std::exception& e) noexcept {
    if (const auto* s = dynamic_cast<const StageError*>(&e)) return s->exit_code();
    if (dynamic_cast<const ConfigError*>(&e)) return kExitValidation;
    if (dynamic_cast<const ConvergenceError*>(&e)) return kExitNonConvergence;
    return kExitStageFailure;
}

namespace {

template <class Fn>
void run_stage(Stage stage, const RunConfig& config, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, exit_code_for(e), e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    const fs::path timing = fs::path(config.out_dir) / artifact::kTiming;
    json j = fs::exists(timing) ? read_json(timing) : json::object();
    j[to_string(stage)] = {{"wall_ms", ms}};
    write_json(timing, j);
}

fs::path out(const RunConfig& c, const char* name) { return fs::path(c.out_dir) / name; }

void validate_or_throw(const RunConfig& config) {
    try {
        config.validate();
    } catch (const std::exception& e) {
        throw StageError(Stage::Validate, kExitValidation, e.what());
    }
}

NetworkLayout load_layout(const RunConfig& c) {
    auto layout = layout_from_json(read_json(out(c, artifact::kLayout)));
    if (layout.empty()) throw EmptyNetworkError();
    return layout;
}

std::uint64_t floc_seed(std::uint64_t seed) { return derive_seed(seed, {0xf10c}); }

}  // namespace

void stage_deploy(const RunConfig& config) {
    validate_or_throw(config);
    fs::create_directories(config.out_dir);
    run_stage(Stage::Deploy, config, [&] {
        write_text(out(config, artifact::kConfig), serialize_config(config));
        const auto layout = generate_layout(config.deployment, config.seed);
        write_json(out(config, artifact::kLayout), to_json(layout));
        if (layout.empty()) throw EmptyNetworkError();
    });
}

void stage_cluster(const RunConfig& config) {
    validate_or_throw(config);
    run_stage(Stage::Cluster, config, [&] {
        const auto layout = load_layout(config);
        const auto assignment = run_clustering(layout, config.floc, floc_seed(config.seed));
        const auto violations =
            verify_assignment(assignment, layout, config.floc.unit_distance_m, config.floc.outband_distance_m);
        if (!violations.empty())
            throw Error("clustering produced " + std::to_string(violations.size()) +
                        " invariant violations, first: " + violations.front().detail);
        write_json(out(config, artifact::kClusters), to_json(assignment));
    });
}

void stage_train(const RunConfig& config) {
    validate_or_throw(config);
    run_stage(Stage::Train, config, [&] {
        const auto layout = load_layout(config);
        const auto assignment = assignment_from_json(read_json(out(config, artifact::kClusters)));
        const auto gains = build_gain_matrix(layout, config.channel);
        const auto trainings =
            train_all(assignment, layout, gains, config.training_setup(), config.seed, config.threads);
        write_json(out(config, artifact::kPolicy), policy_to_json(trainings));
        write_text(out(config, artifact::kTrace), trace_csv(trainings));
    });
}

void stage_evaluate(const RunConfig& config) {
    validate_or_throw(config);
    run_stage(Stage::Evaluate, config, [&] {
        const auto layout = load_layout(config);
        const auto assignment = assignment_from_json(read_json(out(config, artifact::kClusters)));
        const auto trainings = policy_from_json(read_json(out(config, artifact::kPolicy)));
        const auto gains = build_gain_matrix(layout, config.channel);

        PowerVector powers{std::vector<double>(layout.size(), config.channel.p_min_dbm)};
        std::vector<bool> set(layout.size(), false);
        for (const auto& t : trainings)
            for (std::size_t k = 0; k < t.bs_ids.size(); ++k) {
                const auto id = static_cast<std::size_t>(t.bs_ids[k]);
                if (id >= layout.size()) throw Error("policy references unknown BS " + std::to_string(id));
                powers.p_dbm[id] = t.powers.p_dbm[k];
                set[id] = true;
            }
        for (std::size_t i = 0; i < set.size(); ++i)
            if (!set[i]) throw Error("policy has no power for BS " + std::to_string(i));
        if (!powers.within(config.channel)) throw Error("policy powers violate [p_min, p_max]");

        const auto report =
            evaluate(layout, gains, assignment, powers, config.eval_mode, config.channel.noise_power_dbm);
        write_text(out(config, artifact::kUsers), users_csv(report));
        write_text(out(config, artifact::kClusterEval), clusters_csv(report));
        json summary = summary_to_json(report);
        summary["seed"] = config.seed;
        summary["reward"] = to_string(config.reward_kind);
        summary["convergence_time_s"] = to_seconds(assignment.convergence_time);
        int early = 0;
        std::uint64_t episodes = 0;
        for (const auto& t : trainings) {
            early += t.early_stopped ? 1 : 0;
            episodes += static_cast<std::uint64_t>(t.episodes_run);
        }
        summary["clusters_early_stopped"] = early;
        summary["total_training_episodes"] = episodes;
        write_json(out(config, artifact::kSummary), summary);
    });
}

void run_pipeline(const RunConfig& config) {
    validate_or_throw(config);
    fs::create_directories(config.out_dir);
    fs::remove(out(config, artifact::kTiming));
    stage_deploy(config);
    stage_cluster(config);
    stage_train(config);
    stage_evaluate(config);
}

// ---------------------------------------------------------------------------
// Cluster-size sweep

SyntheticCluster synthesize_cluster(int size, const RunConfig& config, std::uint64_t seed) {
    if (size < 1) throw ConfigError("sweep: cluster size must be >= 1");
    const Region& region = config.deployment.region;
    const Point2D center{region.width_m / 2.0, region.height_m / 2.0};
    Rng rng(derive_seed(seed, {0x57e0}));

    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<Point2D> positions{center};
        for (int i = 1; i < size; ++i) positions.push_back(uniform_in_disc(center, config.floc.outband_distance_m, rng));

        SyntheticCluster sc;
        sc.layout = layout_from_stations(region, positions, config.deployment.ue_radius_m, config.deployment.qos_sinr,
                                         derive_seed(seed, {0x57e1, static_cast<std::uint64_t>(attempt)}));
        Cluster cluster;
        cluster.head = 0;
        for (int i = 1; i < size; ++i) {
            const double d = distance(positions[static_cast<std::size_t>(i)], center);
            cluster.members.push_back({i, d <= config.floc.unit_distance_m ? Band::InBand : Band::OutBand});
        }
        sc.assignment.clusters.push_back(std::move(cluster));
        if (verify_assignment(sc.assignment, sc.layout, config.floc.unit_distance_m, config.floc.outband_distance_m)
                .empty())
            return sc;
    }
    throw Error("sweep: could not synthesize a valid cluster of size " + std::to_string(size));
}

namespace {

SweepCell run_cell(const RunConfig& config, int size, RewardKind reward, int seed_index) {
    SweepCell cell;
    cell.size = size;
    cell.reward = reward;
    cell.seed_index = seed_index;
    cell.seed = derive_seed(config.seed, {0x5eed, static_cast<std::uint64_t>(size),
                                          static_cast<std::uint64_t>(seed_index)});
    try {
        const auto sc = synthesize_cluster(size, config, cell.seed);
        const auto gains = build_gain_matrix(sc.layout, config.channel);
        const auto& cluster = sc.assignment.clusters.front();
        const auto t = train_cluster(cluster, sc.layout, gains, config.training_setup(reward),
                                     cluster_seed(cell.seed, cluster.head));
        PowerVector powers{std::vector<double>(sc.layout.size())};
        for (std::size_t k = 0; k < t.bs_ids.size(); ++k)
            powers.p_dbm[static_cast<std::size_t>(t.bs_ids[k])] = t.powers.p_dbm[k];
        const auto report =
            evaluate(sc.layout, gains, sc.assignment, powers, EvalMode::InCluster, config.channel.noise_power_dbm);

        cell.jain_index = report.per_cluster.front().jain_index;
        cell.sum_capacity = report.per_cluster.front().sum_capacity;
        cell.all_qos_met = report.per_cluster.front().all_qos_met;
        cell.episodes_run = t.episodes_run;
        cell.min_sinr = report.per_user.front().sinr_linear;
        for (const auto& u : report.per_user) {
            cell.bs_ids.push_back(u.bs_id);
            cell.capacities.push_back(u.capacity);
            cell.sinrs.push_back(u.sinr_linear);
            cell.powers_dbm.push_back(powers.p_dbm[static_cast<std::size_t>(u.bs_id)]);
            cell.qos_met.push_back(u.qos_met);
            cell.min_sinr = std::min(cell.min_sinr, u.sinr_linear);
        }
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.failure = e.what();
    }
    return cell;
}

}  // namespace

SweepResult sweep_cluster_sizes(const RunConfig& config) {
    validate_or_throw(config);
    struct Job {
        int size;
        RewardKind reward;
        int seed_index;
    };
    std::vector<Job> jobs;
    for (int size : config.sweep.sizes)
        for (int s = 0; s < config.sweep.seeds_per_size; ++s)
            for (auto reward : config.sweep.rewards) jobs.push_back({size, reward, s});

    SweepResult result;
    result.cells.resize(jobs.size());
    auto work = [&](std::size_t i) { result.cells[i] = run_cell(config, jobs[i].size, jobs[i].reward, jobs[i].seed_index); };
    if (config.threads <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> pool;
        for (int t = 0; t < config.threads; ++t)
            pool.push_back(std::async(std::launch::async, [&] {
                for (std::size_t i = next++; i < jobs.size(); i = next++) work(i);
            }));
        for (auto& f : pool) f.get();
    }
    return result;
}

std::vector<SweepSummaryRow> SweepResult::summary() const {
    std::map<std::pair<int, int>, SweepSummaryRow> rows;
    for (const auto& c : cells) {
        auto& r = rows[{c.size, static_cast<int>(c.reward)}];
        r.size = c.size;
        r.reward = c.reward;
        ++r.cells;
        if (!c.ok) {
            ++r.failures;
            continue;
        }
        r.mean_jain += c.jain_index;
        r.mean_sum_capacity += c.sum_capacity;
        r.fraction_all_qos += c.all_qos_met ? 1.0 : 0.0;
    }
    std::vector<SweepSummaryRow> out;
    for (auto& [key, r] : rows) {
        const int ok = r.cells - r.failures;
        if (ok > 0) {
            r.mean_jain /= ok;
            r.mean_sum_capacity /= ok;
            r.fraction_all_qos /= ok;
        }
        out.push_back(r);
    }
    return out;
}

void write_sweep(const fs::path& dir, const SweepResult& result) {
    std::string cells = "size,reward,seed_index,seed,status,jain_index,sum_capacity,min_sinr_db,all_qos_met,"
                        "episodes_run,failure\n";
    std::string members = "size,reward,seed_index,bs_id,power_dbm,sinr_db,capacity,qos_met\n";
    for (const auto& c : result.cells) {
        std::string failure = c.failure;
        for (char& ch : failure)
            if (ch == ',' || ch == '\n') ch = ';';
        cells += std::to_string(c.size) + ',' + to_string(c.reward) + ',' + std::to_string(c.seed_index) + ',' +
                 std::to_string(c.seed) + ',' + (c.ok ? "ok" : "failed") + ',' + format_number(c.jain_index) + ',' +
                 format_number(c.sum_capacity) + ',' + format_number(c.ok ? linear_to_db(c.min_sinr) : 0.0) + ',' +
                 (c.all_qos_met ? "1" : "0") + ',' + std::to_string(c.episodes_run) + ',' + failure + '\n';
        for (std::size_t k = 0; k < c.bs_ids.size(); ++k)
            members += std::to_string(c.size) + ',' + to_string(c.reward) + ',' + std::to_string(c.seed_index) + ',' +
                       std::to_string(c.bs_ids[k]) + ',' + format_number(c.powers_dbm[k]) + ',' +
                       format_number(linear_to_db(c.sinrs[k])) + ',' + format_number(c.capacities[k]) + ',' +
                       (c.qos_met[k] ? "1" : "0") + '\n';
    }
    std::string summary = "size,reward,cells,failures,mean_jain,mean_sum_capacity,fraction_all_qos\n";
    for (const auto& r : result.summary())
        summary += std::to_string(r.size) + ',' + to_string(r.reward) + ',' + std::to_string(r.cells) + ',' +
                   std::to_string(r.failures) + ',' + format_number(r.mean_jain) + ',' +
                   format_number(r.mean_sum_capacity) + ',' + format_number(r.fraction_all_qos) + '\n';
    write_text(dir / artifact::kSweepCells, cells);
    write_text(dir / artifact::kSweepMembers, members);
    write_text(dir / artifact::kSweepSummary, summary);
}

// ---------------------------------------------------------------------------
// Report

namespace {

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string sweep_report(const fs::path& dir) {
    const auto t = parse_csv(read_text(dir / artifact::kSweepSummary));
    const auto c_size = t.column("size"), c_reward = t.column("reward"), c_jain = t.column("mean_jain"),
               c_sum = t.column("mean_sum_capacity"), c_qos = t.column("fraction_all_qos"),
               c_fail = t.column("failures");
    struct Pair {
        std::map<std::string, std::vector<std::string>> by_reward;
    };
    std::map<int, Pair> sizes;
    for (const auto& row : t.rows) sizes[std::stoi(row[c_size])].by_reward[row[c_reward]] = row;

    auto cell = [](const Pair& p, const std::string& reward, std::size_t col) -> std::string {
        auto it = p.by_reward.find(reward);
        return it == p.by_reward.end() ? "-" : it->second[col];
    };
    auto num = [](const std::string& s) { return s == "-" ? std::string("     -") : fmt("%6.3f", std::stod(s)); };

    std::string outs = "cluster-size sweep: CDP-Q vs EXP-Q (means over seeds)\n";
    outs += "size | jain cdpq | jain expq | sumC cdpq | sumC expq | qos cdpq | qos expq | failures\n";
    outs += "-----+-----------+-----------+-----------+-----------+----------+----------+---------\n";
    for (const auto& [size, p] : sizes) {
        int failures = 0;
        for (const auto& [r, row] : p.by_reward) failures += std::stoi(row[c_fail]);
        outs += fmt("%4d |    %s |    %s |   %s |   %s |   %s |   %s | %d\n", size,
                    num(cell(p, "cdpq", c_jain)).c_str(), num(cell(p, "expq", c_jain)).c_str(),
                    fmt("%7.3f", cell(p, "cdpq", c_sum) == "-" ? 0.0 : std::stod(cell(p, "cdpq", c_sum))).c_str(),
                    fmt("%7.3f", cell(p, "expq", c_sum) == "-" ? 0.0 : std::stod(cell(p, "expq", c_sum))).c_str(),
                    num(cell(p, "cdpq", c_qos)).c_str(), num(cell(p, "expq", c_qos)).c_str(), failures);
    }
    return outs;
}

std::string pipeline_report(const fs::path& dir) {
    std::string outs;
    if (fs::exists(dir / artifact::kTiming)) {
        outs += "stage timing (wall clock)\n";
        const auto timing = read_json(dir / artifact::kTiming);
        for (const auto& [stage, v] : timing.items())
            outs += fmt("  %-9s %10.1f ms\n", stage.c_str(), v.at("wall_ms").get<double>());
    }
    if (fs::exists(dir / artifact::kLayout)) {
        const auto layout = layout_from_json(read_json(dir / artifact::kLayout));
        outs += fmt("layout: %zu base stations in %.0f x %.0f m (seed %llu)\n", layout.size(), layout.region.width_m,
                    layout.region.height_m, static_cast<unsigned long long>(layout.seed));
    }
    if (fs::exists(dir / artifact::kClusters)) {
        const auto a = assignment_from_json(read_json(dir / artifact::kClusters));
        std::map<std::size_t, int> hist;
        for (const auto& c : a.clusters) ++hist[c.size()];
        outs += fmt("clustering: %zu clusters, converged at %.3f s virtual time\n", a.clusters.size(),
                    to_seconds(a.convergence_time));
        outs += "cluster-size histogram\n";
        for (const auto& [size, count] : hist) outs += fmt("  %3zu | %4d %s\n", size, count, std::string(count, '#').c_str());
    }
    if (fs::exists(dir / artifact::kClusterEval)) {
        const auto t = parse_csv(read_text(dir / artifact::kClusterEval));
        const auto c_id = t.column("cluster_id"), c_size = t.column("size"), c_sum = t.column("sum_capacity"),
                   c_jain = t.column("jain_index"), c_qos = t.column("all_qos_met");
        outs += "cluster | size | sum capacity | jain  | qos\n";
        for (const auto& row : t.rows)
            outs += fmt("%7s | %4s | %12.3f | %.3f | %s\n", row[c_id].c_str(), row[c_size].c_str(),
                        std::stod(row[c_sum]), std::stod(row[c_jain]), row[c_qos] == "1" ? "met" : "MISSED");
    }
    if (fs::exists(dir / artifact::kSummary)) {
        const auto s = read_json(dir / artifact::kSummary);
        outs += fmt("network (%s): total capacity %.3f, QoS met %.1f%%, mean Jain %.3f, "
                    "cross/in-cluster interference %.3g\n",
                    s.at("eval_mode").get<std::string>().c_str(), s.at("total_capacity").get<double>(),
                    100.0 * s.at("fraction_qos_met").get<double>(), s.at("mean_jain_index").get<double>(),
                    s.at("cross_cluster_interference_ratio").get<double>());
    }
    return outs;
}

}  // namespace

std::string report(const fs::path& dir) {
    try {
        if (!fs::is_directory(dir) || fs::is_empty(dir)) throw Error("no artifacts in " + dir.string());
        if (fs::exists(dir / artifact::kSweepSummary)) return sweep_report(dir);
        std::string r = pipeline_report(dir);
        if (r.empty()) throw Error("no artifacts in " + dir.string());
        return r;
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(Stage::Report, kExitStageFailure, e.what());
    }
}

}  // namespace mmson

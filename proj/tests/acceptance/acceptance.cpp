// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "mmson/channel.hpp"
#include "mmson/deployment.hpp"
#include "mmson/floc.hpp"
#include "mmson/pipeline.hpp"
#include "mmson/qlearn.hpp"
#include "mmson/serialize.hpp"

using namespace mmson;
namespace fs = std::filesystem;

namespace {

constexpr double kRewardTol = 1e-12;
constexpr double kQosSeedFraction = 0.90;
constexpr int kSweepSeeds = 20;
constexpr double kSizeRuntimeLimitS = 300.0;
constexpr double kJainFloor = 0.8;
constexpr int kFlocDeployments = 100;
constexpr double kConvergenceLimitS = 15.0;
constexpr double kScalabilityRatio = 2.0;
constexpr int kScalabilitySeeds = 20;
constexpr int kChurnTrials = 100;
constexpr double kClusterSizeShare = 0.99;
constexpr std::size_t kMaxClusterSize = 14;
constexpr double kFixedPointTol = 1e-6;
constexpr int kSingletonSeeds = 100;
constexpr double kSingletonShare = 0.95;
constexpr double kFriisTol = 0.01;
constexpr double kNlosTol = 0.01;
constexpr int kKsDraws = 10000;
constexpr double kKsCritical1pct = 1.6276;  // Kolmogorov distribution, alpha = 0.01

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int worker_threads() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

// ---------------------------------------------------------------------------

struct SweepStats {
    std::map<int, double> qos_seed_share;  // CDP-Q cells with every member at QoS
    std::map<int, std::map<RewardKind, double>> jain, sum_capacity;
    std::map<int, double> seconds_per_size;  // CDP-Q wall time per size
};

SweepStats run_sweep() {
    RunConfig config;
    config.threads = worker_threads();
    config.sweep.seeds_per_size = kSweepSeeds;
    SweepStats stats;
    SweepResult all;
    for (int size : config.sweep.sizes) {
        for (auto kind : {RewardKind::Cdpq, RewardKind::Expq}) {
            RunConfig c = config;
            c.sweep.sizes = {size};
            c.sweep.rewards = {kind};
            const auto t0 = std::chrono::steady_clock::now();
            auto r = sweep_cluster_sizes(c);
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (kind == RewardKind::Cdpq) stats.seconds_per_size[size] = s * config.threads;
            for (auto& cell : r.cells) all.cells.push_back(std::move(cell));
        }
    }
    std::map<int, int> cdpq_cells, cdpq_ok;
    for (const auto& c : all.cells) {
        if (c.reward != RewardKind::Cdpq) continue;
        ++cdpq_cells[c.size];
        if (c.ok && c.all_qos_met) ++cdpq_ok[c.size];
    }
    for (const auto& [size, n] : cdpq_cells) stats.qos_seed_share[size] = static_cast<double>(cdpq_ok[size]) / n;
    for (const auto& row : all.summary()) {
        stats.jain[row.size][row.reward] = row.failures ? -1.0 : row.mean_jain;
        stats.sum_capacity[row.size][row.reward] = row.failures ? -1.0 : row.mean_sum_capacity;
    }
    return stats;
}

void criterion1(const SweepStats& s) {
    bool pass = true;
    std::string worst;
    double min_share = 1.0, max_seconds = 0.0;
    for (const auto& [size, share] : s.qos_seed_share) {
        if (share < kQosSeedFraction) pass = false;
        if (share < min_share) {
            min_share = share;
            worst = std::to_string(size);
        }
        max_seconds = std::max(max_seconds, s.seconds_per_size.at(size));
    }
    if (max_seconds >= kSizeRuntimeLimitS) pass = false;
    verdict(1, pass && s.qos_seed_share.size() == 13,
            fmt("min share of seeds with all members at QoS = %.2f (size %s, need >= %.2f); "
                "max CDP-Q cpu time per size %.1f s (< %.0f s)",
                min_share, worst.c_str(), kQosSeedFraction, max_seconds, kSizeRuntimeLimitS));
}

void criterion2() {
    const double q = 2.83, l = std::log2(q);
    const RewardSpec spec{RewardKind::Cdpq, q, 1.0};
    double err = 0.0;
    err = std::max(err, std::abs(spec(0.0) - (-1.0)));
    err = std::max(err, std::abs(spec(l) - 0.0));
    for (double c : {2 * l, 2 * l + 1e-9, 2 * l + 0.5, 3 * l, 10.0, 40.0, 1e3}) err = std::max(err, std::abs(spec(c) - 1.0));
    double slope_err = 0.0;
    for (double a = 0.0; a < 2 * l - 0.5; a += 0.1)
        for (double b = a + 0.5; b < 2 * l; b += 0.1) {
            const double slope = (spec(b) - spec(a)) / (b - a);
            slope_err = std::max(slope_err, std::abs(slope - 1.0 / l));
        }
    verdict(2, err <= kRewardTol && slope_err <= kRewardTol,
            fmt("max anchor error %.3g (tol %.0e); max slope error %.3g", err, kRewardTol, slope_err));
}

void criterion3(const SweepStats& s) {
    bool pass = true;
    std::string detail;
    double min_cdpq = 1.0;
    for (const auto& [size, by] : s.jain) {
        const double c = by.at(RewardKind::Cdpq), e = by.at(RewardKind::Expq);
        min_cdpq = std::min(min_cdpq, c);
        if (c < kJainFloor) pass = false;
        if (size >= 12 && size <= 14) {
            if (c < e) pass = false;
            detail += fmt("size %d cdpq %.4f vs expq %.4f; ", size, c, e);
        }
    }
    verdict(3, pass, detail + fmt("min CDP-Q mean Jain %.4f (>= %.1f)", min_cdpq, kJainFloor));
}

void criterion4(const SweepStats& s) {
    bool pass = true;
    int losing = 0;
    std::string detail;
    for (const auto& [size, by] : s.sum_capacity) {
        const double c = by.at(RewardKind::Cdpq), e = by.at(RewardKind::Expq);
        if (c < e) {
            pass = false;
            ++losing;
        }
        detail += fmt("%d:%.1f/%.1f ", size, c, e);
    }
    verdict(4, pass, fmt("sizes where CDP-Q < EXP-Q: %d of 13; size:cdpq/expq %s", losing, detail.c_str()));
}

// ---------------------------------------------------------------------------

std::vector<ClusterAssignment> deployments_at_default(const RunConfig& config, std::vector<NetworkLayout>& layouts) {
    std::vector<ClusterAssignment> out;
    for (int i = 0; i < kFlocDeployments; ++i) {
        layouts.push_back(generate_layout(config.deployment, 1000 + static_cast<std::uint64_t>(i)));
        out.push_back(run_clustering(layouts.back(), config.floc, derive_seed(1000 + i, {0xf10c})));
    }
    return out;
}

bool churn_is_local(const ClusterAssignment& before, const ClusterAssignment& after,
                    const std::vector<BaseStation>& stations, Point2D churned, double bound, double& worst) {
    std::map<int, Point2D> pos;
    for (const auto& s : stations) pos[s.id] = s.position;
    auto changed = [&](const ClusterAssignment& a, const ClusterAssignment& b) {
        std::vector<int> heads;
        for (const auto& c : a.clusters) {
            const Cluster* o = b.find_cluster(c.head);
            if (!o || !(o->members == c.members)) heads.push_back(c.head);
        }
        return heads;
    };
    bool ok = true;
    auto check = [&](const std::vector<int>& heads) {
        for (int h : heads) {
            const double d = distance(pos.at(h), churned);
            worst = std::max(worst, d);
            if (d > bound) ok = false;
        }
    };
    check(changed(before, after));
    check(changed(after, before));
    return ok;
}

void criterion5_and_6(const RunConfig& config) {
    std::vector<NetworkLayout> layouts;
    std::size_t violations = 0;
    double max_conv = 0.0;
    std::map<std::size_t, int> histogram;
    std::size_t clusters = 0, small = 0;
    bool floc_ok = true;
    std::string floc_error;
    std::vector<ClusterAssignment> assignments;
    try {
        assignments = deployments_at_default(config, layouts);
    } catch (const std::exception& e) {
        floc_ok = false;
        floc_error = e.what();
    }
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        violations += verify_assignment(assignments[i], layouts[i], config.floc.unit_distance_m,
                                        config.floc.outband_distance_m)
                          .size();
        max_conv = std::max(max_conv, to_seconds(assignments[i].convergence_time));
        for (const auto& c : assignments[i].clusters) {
            ++histogram[c.size()];
            ++clusters;
            if (c.size() <= kMaxClusterSize) ++small;
        }
    }

    // Scalability over exact node counts in the same region and arrival window.
    std::map<int, double> mean_conv;
    for (int n : {30, 60, 120, 240, 480}) {
        double sum = 0.0;
        for (int s = 0; s < kScalabilitySeeds; ++s) {
            Rng rng(derive_seed(77, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(s)}));
            std::vector<Point2D> pts;
            for (int i = 0; i < n; ++i)
                pts.push_back({uniform(rng, 0.0, config.deployment.region.width_m),
                               uniform(rng, 0.0, config.deployment.region.height_m)});
            const auto layout = layout_from_stations(config.deployment.region, pts, config.deployment.ue_radius_m,
                                                     config.deployment.qos_sinr, rng());
            try {
                sum += to_seconds(run_clustering(layout, config.floc, rng()).convergence_time);
            } catch (const std::exception& e) {
                floc_ok = false;
                floc_error = e.what();
            }
        }
        mean_conv[n] = sum / kScalabilitySeeds;
    }
    double lo = 1e300, hi = 0.0;
    for (const auto& [n, t] : mean_conv) {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }

    // Churn: alternating add and remove on fresh deployments.
    int local = 0, churn_violations = 0, churn_errors = 0;
    double worst = 0.0;
    const double bound = 2.0 * config.floc.outband_distance_m;
    for (int t = 0; t < kChurnTrials && !assignments.empty(); ++t) {
        const auto& layout = layouts[static_cast<std::size_t>(t) % layouts.size()];
        const auto& before = assignments[static_cast<std::size_t>(t) % assignments.size()];
        Rng rng(derive_seed(4242, {static_cast<std::uint64_t>(t)}));
        std::vector<BaseStation> stations = layout.stations;
        try {
            ClusterAssignment after;
            Point2D churned;
            if (t % 2 == 0) {
                BaseStation bs{static_cast<int>(stations.size()),
                               {uniform(rng, 0.0, layout.region.width_m), uniform(rng, 0.0, layout.region.height_m)}};
                after = add_node(before, stations, bs, config.floc, rng());
                stations.push_back(bs);
                churned = bs.position;
            } else {
                const int id = static_cast<int>(rng() % stations.size());
                churned = stations[static_cast<std::size_t>(id)].position;
                after = remove_node(before, stations, id, config.floc, rng());
                stations.erase(stations.begin() + id);
            }
            churn_violations += static_cast<int>(
                verify_assignment(after, stations, config.floc.unit_distance_m, config.floc.outband_distance_m).size());
            std::vector<BaseStation> all = layout.stations;
            if (t % 2 == 0) all.push_back(stations.back());
            if (churn_is_local(before, after, all, churned, bound, worst)) ++local;
        } catch (const std::exception&) {
            ++churn_errors;
        }
    }

    const bool pass5 = floc_ok && violations == 0 && max_conv < kConvergenceLimitS && hi < kScalabilityRatio * lo &&
                       local == kChurnTrials && churn_violations == 0 && churn_errors == 0;
    std::string means;
    for (const auto& [n, t] : mean_conv) means += fmt("N=%d:%.2fs ", n, t);
    verdict(5, pass5,
            fmt("violations %zu over %d deployments; max convergence %.3f s (< %.0f); mean convergence %s"
                "(max/min %.3f < %.1f); churn local %d/%d (worst changed head %.1f m, bound %.0f m), "
                "post-churn violations %d, churn errors %d%s%s",
                violations, kFlocDeployments, max_conv, kConvergenceLimitS, means.c_str(), hi / lo,
                kScalabilityRatio, local, kChurnTrials, worst, bound, churn_violations, churn_errors,
                floc_error.empty() ? "" : "; error: ", floc_error.c_str()));

    std::string hist;
    for (const auto& [size, count] : histogram) hist += fmt("%zu:%d ", size, count);
    const double share = clusters ? static_cast<double>(small) / clusters : 0.0;

    // Informational only: the same deployments with out-band joining disabled.
    FlocParams inband_only = config.floc;
    inband_only.outband_join = false;
    std::size_t v_clusters = 0, v_small = 0;
    for (std::size_t i = 0; i < layouts.size(); ++i)
        for (const auto& c : run_clustering(layouts[i], inband_only, derive_seed(1000 + i, {0xf10c})).clusters) {
            ++v_clusters;
            if (c.size() <= kMaxClusterSize) ++v_small;
        }
    verdict(6, floc_ok && share >= kClusterSizeShare,
            fmt("%.4f of %zu clusters have size <= %zu (need >= %.2f); histogram size:count %s"
                "[info: floc.outband_join = false gives %.4f of %zu]",
                share, clusters, kMaxClusterSize, kClusterSizeShare, hist.c_str(),
                v_clusters ? static_cast<double>(v_small) / v_clusters : 0.0, v_clusters));
}

// ---------------------------------------------------------------------------

void criterion7(const RunConfig& config) {
    double fp_err = 0.0;
    for (auto b : {Bootstrap::SameAction, Bootstrap::MaxAction}) {
        QTable t(1, 1, 0.0);
        for (int i = 0; i < 100000; ++i)
            if (q_update(t, AgentState{0}, 0, 1.0, AgentState{0}, 0.5, 0.9, b) < 1e-15) break;
        fp_err = std::max(fp_err, std::abs(t.at(0, 0) - 10.0));
    }

    int match = 0;
    const auto setup = config.training_setup(RewardKind::Cdpq);
    for (int s = 0; s < kSingletonSeeds; ++s) {
        const std::uint64_t seed = derive_seed(700, {static_cast<std::uint64_t>(s)});
        const auto sc = synthesize_cluster(1, config, seed);
        const auto gains = build_gain_matrix(sc.layout, config.channel);
        const auto& cluster = sc.assignment.clusters.front();
        const auto trained = train_cluster(cluster, sc.layout, gains, setup, cluster_seed(seed, cluster.head));

        std::vector<double> rewards;
        for (double p : setup.grid.levels_dbm()) {
            const double snr = sinr(0, PowerVector{{p}}, gains, {}, config.channel.noise_power_dbm);
            rewards.push_back(setup.reward(capacity(snr)));
        }
        // Smallest level attaining the maximum reward.
        const auto best = static_cast<std::size_t>(std::max_element(rewards.begin(), rewards.end()) - rewards.begin());
        if (trained.powers.p_dbm.front() == setup.grid.level_dbm(best)) ++match;
    }
    const double share = static_cast<double>(match) / kSingletonSeeds;
    verdict(7, fp_err <= kFixedPointTol && share >= kSingletonShare,
            fmt("fixed-point error %.3g (tol %.0e); singleton policy optimal in %d/%d seeds (need >= %.0f%%)", fp_err,
                kFixedPointTol, match, kSingletonSeeds, kSingletonShare * 100));
}

double normal_cdf(double x, double sigma) { return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0))); }

void criterion8(const RunConfig& config) {
    const double friis = pathloss_friis_db(10.0, 28e9);
    const double nlos = pathloss_nlos_db(100.0, config.channel, 0.0);

    std::vector<Point2D> pts(101, Point2D{500.0, 500.0});
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i].x += static_cast<double>(i);
    const auto layout = layout_from_stations(config.deployment.region, pts, 10.0, 2.83, 8675309);
    std::vector<double> draws;
    for (std::size_t i = 0; i < layout.size() && static_cast<int>(draws.size()) < kKsDraws; ++i)
        for (std::size_t k = 0; k < layout.size() && static_cast<int>(draws.size()) < kKsDraws; ++k)
            if (i != k) draws.push_back(config.channel.zeta_db * layout.shadowing(i, k));
    std::sort(draws.begin(), draws.end());
    double d = 0.0;
    const double n = static_cast<double>(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const double f = normal_cdf(draws[i], config.channel.zeta_db);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    const double critical = kKsCritical1pct / std::sqrt(n);
    verdict(8,
            std::abs(friis - 81.39) <= kFriisTol && std::abs(nlos - 130.4) <= kNlosTol && d < critical &&
                static_cast<int>(draws.size()) == kKsDraws,
            fmt("Friis(10 m) %.4f dB (81.39 +- %.2f); NLOS(100 m) %.4f dB (130.4 +- %.2f); "
                "KS D = %.5f on %zu draws (critical %.5f)",
                friis, kFriisTol, nlos, kNlosTol, d, draws.size(), critical));
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().filename() == artifact::kTiming) continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[e.path().filename().string()] = std::string(std::istreambuf_iterator<char>(in), {});
    }
    return files;
}

void criterion9(const RunConfig& base) {
    const fs::path root = fs::temp_directory_path() / ("mmson_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const int threads = worker_threads() > 1 ? worker_threads() : 3;
    bool rerun_identical = false, threaded_identical = false, records_identical = false;
    std::size_t nfiles = 0;
    std::string error;
    try {
        RunConfig a = base;
        a.out_dir = (root / "a").string();
        run_pipeline(a);
        const auto first = read_dir(a.out_dir);
        run_pipeline(a);
        const auto second = read_dir(a.out_dir);
        nfiles = first.size();
        rerun_identical = first == second && nfiles >= 8;

        // The threaded run differs only in run.threads and run.out_dir, which config.txt records.
        RunConfig b = base;
        b.out_dir = (root / "b").string();
        b.threads = threads;
        run_pipeline(b);
        auto fa = first, fb = read_dir(b.out_dir);
        fa.erase(artifact::kConfig);
        fb.erase(artifact::kConfig);
        threaded_identical = fa == fb;

        const auto layout = generate_layout(base.deployment, base.seed);
        const auto assignment = run_clustering(layout, base.floc, derive_seed(base.seed, {0xf10c}));
        const auto gains = build_gain_matrix(layout, base.channel);
        const auto setup = base.training_setup();
        const auto seq = train_all(assignment, layout, gains, setup, base.seed, 1);
        const auto par = train_all(assignment, layout, gains, setup, base.seed, 4);
        records_identical = seq == par && policy_to_json(seq) == policy_to_json(par) && trace_csv(seq) == trace_csv(par);
    } catch (const std::exception& e) {
        error = e.what();
    }
    fs::remove_all(root);
    verdict(9, rerun_identical && threaded_identical && records_identical,
            fmt("re-run byte-identical over %zu artifacts: %s; %d-thread run artifacts identical: %s; "
                "sequential vs 4-thread training records identical: %s%s%s",
                nfiles, rerun_identical ? "yes" : "no", threads, threaded_identical ? "yes" : "no",
                records_identical ? "yes" : "no", error.empty() ? "" : "; error: ", error.c_str()));
}

}  // namespace

int main() {
    const RunConfig config;
    const auto sweep = run_sweep();
    criterion1(sweep);
    criterion2();
    criterion3(sweep);
    criterion4(sweep);
    criterion5_and_6(config);
    criterion7(config);
    criterion8(config);
    criterion9(config);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mmson/config.hpp"
#include "mmson/errors.hpp"
#include "mmson/floc.hpp"
#include "mmson/metrics.hpp"
#include "mmson/qlearn.hpp"

namespace mmson {

enum class Stage { Validate, Deploy, Cluster, Train, Evaluate, Sweep, Report };

const char* to_string(Stage s) noexcept;

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitStageFailure = 2, kExitNonConvergence = 3 };

/// Maps an exception thrown by a stage onto the exit code contract.
int exit_code_for(const std::exception& e) noexcept;

/// Wraps any stage failure with the stage name.
class StageError : public Error {
public:
    StageError(Stage stage, int exit_code, const std::string& what)
        : Error(std::string("[") + to_string(stage) + "] " + what), stage_(stage), exit_code_(exit_code) {}

    Stage stage() const noexcept { return stage_; }
    int exit_code() const noexcept { return exit_code_; }

private:
    Stage stage_;
    int exit_code_;
};

/// Artifact file names inside the output directory.
namespace artifact {
inline constexpr const char* kConfig = "config.txt";
inline constexpr const char* kLayout = "layout.json";
inline constexpr const char* kClusters = "clusters.json";
inline constexpr const char* kPolicy = "policy.json";
inline constexpr const char* kTrace = "trace.csv";
inline constexpr const char* kUsers = "eval_users.csv";
inline constexpr const char* kClusterEval = "eval_clusters.csv";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kTiming = "timing.json";  // wall clock; the only non-deterministic file
inline constexpr const char* kSweepCells = "sweep_cells.csv";
inline constexpr const char* kSweepMembers = "sweep_members.csv";
inline constexpr const char* kSweepSummary = "sweep_summary.csv";
}  // namespace artifact

// Each stage reads its inputs from config.out_dir and writes its outputs
// there. Failures are rethrown as StageError.
void stage_deploy(const RunConfig& config);
void stage_cluster(const RunConfig& config);
void stage_train(const RunConfig& config);
void stage_evaluate(const RunConfig& config);

/// deploy -> cluster -> train -> evaluate. Re-running overwrites with identical bytes.
void run_pipeline(const RunConfig& config);

struct SweepCell {
    int size = 0;
    RewardKind reward = RewardKind::Cdpq;
    int seed_index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string failure;
    double jain_index = 0.0;
    double sum_capacity = 0.0;
    double min_sinr = 0.0;
    bool all_qos_met = false;
    int episodes_run = 0;
    std::vector<int> bs_ids;
    std::vector<double> capacities;
    std::vector<double> sinrs;
    std::vector<double> powers_dbm;
    std::vector<bool> qos_met;
};

struct SweepSummaryRow {
    int size = 0;
    RewardKind reward = RewardKind::Cdpq;
    int cells = 0;
    int failures = 0;
    double mean_jain = 0.0;
    double mean_sum_capacity = 0.0;
    double fraction_all_qos = 0.0;  // share of cells where every member met QoS
};

struct SweepResult {
    std::vector<SweepCell> cells;  // (size, reward, seed) order

    std::vector<SweepSummaryRow> summary() const;
};

/// One-cluster layout: the head at the region center and size - 1 members
/// uniform in the out-band disc around it. Bands follow distance to the head.
struct SyntheticCluster {
    NetworkLayout layout;
    ClusterAssignment assignment;
};
SyntheticCluster synthesize_cluster(int size, const RunConfig& config, std::uint64_t seed);

/// Trains and evaluates every (size, reward, seed) cell. Both reward kinds
/// see the same geometry for a given (size, seed).
SweepResult sweep_cluster_sizes(const RunConfig& config);
void write_sweep(const std::filesystem::path& dir, const SweepResult& result);

/// Human-readable summary of a pipeline or sweep output directory.
std::string report(const std::filesystem::path& dir);

}  // namespace mmson

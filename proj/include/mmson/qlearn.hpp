#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmson/channel.hpp"
#include "mmson/deployment.hpp"
#include "mmson/floc.hpp"
#include "mmson/rng.hpp"

namespace mmson {

/// Transmit power levels uniformly spaced in dB from p_min to p_max.
class ActionGrid {
public:
    ActionGrid() = default;
    ActionGrid(double p_min_dbm, double p_max_dbm, int levels);

    std::size_t size() const noexcept { return levels_dbm_.size(); }
    double level_dbm(std::size_t index) const { return levels_dbm_.at(index); }
    const std::vector<double>& levels_dbm() const noexcept { return levels_dbm_; }
    double step_db() const noexcept;

private:
    std::vector<double> levels_dbm_;
};

struct AgentState {
    int ring_index = 0;

    friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Ring index min(floor(d / r), n_r - 1) of a BS around its cluster head.
AgentState ring_state(Point2D bs_position, Point2D ch_position, double ring_spacing_m, int n_rings);

/// State x action value table.
class QTable {
public:
    QTable() = default;
    QTable(std::size_t states, std::size_t actions, double fill = 0.0)
        : states_(states), actions_(actions), q_(states * actions, fill) {}

    std::size_t states() const noexcept { return states_; }
    std::size_t actions() const noexcept { return actions_; }

    double& at(std::size_t s, std::size_t a) { return q_.at(s * actions_ + a); }
    double at(std::size_t s, std::size_t a) const { return q_.at(s * actions_ + a); }
    std::span<const double> row(std::size_t s) const { return {q_.data() + s * actions_, actions_}; }
    const std::vector<double>& values() const noexcept { return q_; }

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    std::size_t states_ = 0;
    std::size_t actions_ = 0;
    std::vector<double> q_;
};

enum class RewardKind : std::uint8_t { Cdpq, Expq };

const char* to_string(RewardKind k) noexcept;
RewardKind parse_reward_kind(const std::string& s);

/// Piecewise-linear QoS reward: C / log2(q) - 1 below 2 log2(q), +1 above.
double reward_cdpq(double capacity, double qos_sinr);

/// Exponential baseline 1 - exp(-shape (C - log2 q)).
double reward_expq(double capacity, double qos_sinr, double shape);

struct RewardSpec {
    RewardKind kind = RewardKind::Cdpq;
    double qos_sinr = 2.83;
    double exp_shape = 1.0;

    void validate() const;
    double operator()(double capacity) const;
    /// Least upper bound of the reward over capacity >= 0 (1 for both kinds).
    double supremum() const noexcept { return 1.0; }

    friend bool operator==(const RewardSpec&, const RewardSpec&) = default;
};

enum class Bootstrap : std::uint8_t { SameAction, MaxAction };

const char* to_string(Bootstrap b) noexcept;
Bootstrap parse_bootstrap(const std::string& s);

struct LearningConfig {
    double alpha = 0.5;
    double gamma = 0.9;
    int episodes_max = 50'000;
    double epsilon0 = 0.5;
    double epsilon_decay_fraction = 0.8;  // linear to zero over this share of episodes; <= 0 keeps epsilon0
    // Initial Q value: reward supremum / (1 - gamma) unless overridden; the
    // jitter draws uniform in [0, q_init_scale) and is subtracted.
    std::optional<double> q_init_value;
    double q_init_scale = 0.0;
    double early_stop_tolerance = 1e-5;
    int early_stop_window = 500;  // 0 disables early stopping
    Bootstrap bootstrap = Bootstrap::SameAction;
    int trace_stride = 500;

    void validate() const;
    double epsilon(int episode) const noexcept;
    double initial_q(double reward_supremum) const noexcept;

    friend bool operator==(const LearningConfig&, const LearningConfig&) = default;
};

/// Lowest-index argmax of a Q row.
std::size_t greedy_action(std::span<const double> row);

/// Epsilon-greedy choice over the state's row. epsilon(episode) == 0 is pure argmax.
std::size_t select_action(const QTable& table, AgentState state, int episode, const LearningConfig& config, Rng& rng);

/// One temporal-difference update of (state, action). Returns |delta Q|.
///
/// SameAction bootstraps from Q(next, action); MaxAction from max_a Q(next, a).
double q_update(QTable& table, AgentState state, std::size_t action, double reward, AgentState next_state,
                double alpha, double gamma, Bootstrap bootstrap = Bootstrap::SameAction);

struct TraceRow {
    int cluster_id = -1;
    int episode = 0;
    int bs_id = -1;
    int ring = 0;
    double action_dbm = 0.0;
    double sinr_db = 0.0;
    double capacity = 0.0;
    double reward = 0.0;

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct ClusterTraining {
    int cluster_id = -1;  // head id
    std::vector<int> bs_ids;  // head first
    std::vector<AgentState> states;
    std::vector<QTable> qtables;
    PowerVector powers;  // final greedy powers, aligned with bs_ids
    std::vector<TraceRow> trace;
    int episodes_run = 0;
    bool early_stopped = false;
    std::uint64_t rows_exchanged = 0;
    // Q row each agent last sent to its clustermates (bs_ids order).
    // Every clustermate receives the same row; it never drives selection.
    std::vector<std::vector<double>> published_rows;

    friend bool operator==(const ClusterTraining&, const ClusterTraining&) = default;
};

struct TrainingSetup {
    ActionGrid grid;
    RewardSpec reward;
    LearningConfig learning;
    double ring_spacing_m = 50.0;
    int n_rings = 4;
    double noise_power_dbm = -120.0;
};

/// Per-cluster independent learners playing synchronous rounds. Interference
/// comes from clustermates only. `seed` is the cluster's own stream seed.
ClusterTraining train_cluster(const Cluster& cluster, const NetworkLayout& layout, const GainMatrix& gains,
                              const TrainingSetup& setup, std::uint64_t seed);

/// Stream seed for one cluster: derived from the run seed and head id.
std::uint64_t cluster_seed(std::uint64_t run_seed, int head_id) noexcept;

/// Trains every cluster, on `threads` worker threads (1 = sequential).
/// Output order follows assignment order regardless of threading.
std::vector<ClusterTraining> train_all(const ClusterAssignment& assignment, const NetworkLayout& layout,
                                       const GainMatrix& gains, const TrainingSetup& setup,
                                       std::uint64_t run_seed, int threads);

PowerVector greedy_power_vector(std::span<const QTable> qtables, std::span<const AgentState> states,
                                const ActionGrid& grid);

}  // namespace mmson

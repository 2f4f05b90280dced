#include "mmson/qlearn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <thread>

#include "mmson/errors.hpp"

namespace mmson {

ActionGrid::ActionGrid(double p_min_dbm, double p_max_dbm, int levels) {
    if (levels < 2) throw ConfigError("qlearn: action grid needs at least 2 levels");
    if (!(p_min_dbm < p_max_dbm)) throw ConfigError("qlearn: action grid needs p_min < p_max");
    levels_dbm_.resize(static_cast<std::size_t>(levels));
    const double step = (p_max_dbm - p_min_dbm) / (levels - 1);
    for (int i = 0; i < levels; ++i) levels_dbm_[static_cast<std::size_t>(i)] = p_min_dbm + step * i;
    levels_dbm_.back() = p_max_dbm;
}

double ActionGrid::step_db() const noexcept {
    return levels_dbm_.size() < 2 ? 0.0 : levels_dbm_[1] - levels_dbm_[0];
}

AgentState ring_state(Point2D bs_position, Point2D ch_position, double ring_spacing_m, int n_rings) {
    if (!(ring_spacing_m > 0.0) || n_rings < 1) throw ConfigError("qlearn: ring spacing must be > 0 and n_rings >= 1");
    const double d = distance(bs_position, ch_position);
    const auto ring = static_cast<long long>(std::floor(d / ring_spacing_m));
    return {static_cast<int>(std::min<long long>(ring, n_rings - 1))};
}

const char* to_string(RewardKind k) noexcept { return k == RewardKind::Cdpq ? "cdpq" : "expq"; }

RewardKind parse_reward_kind(const std::string& s) {
    if (s == "cdpq") return RewardKind::Cdpq;
    if (s == "expq") return RewardKind::Expq;
    throw ConfigError("unknown reward kind '" + s + "' (expected cdpq or expq)");
}

const char* to_string(Bootstrap b) noexcept { return b == Bootstrap::SameAction ? "same-action" : "max-action"; }

Bootstrap parse_bootstrap(const std::string& s) {
    if (s == "same-action") return Bootstrap::SameAction;
    if (s == "max-action") return Bootstrap::MaxAction;
    throw ConfigError("unknown bootstrap '" + s + "' (expected same-action or max-action)");
}

namespace {
void check_qos(double qos_sinr) {
    if (!(qos_sinr > 1.0))
        throw ConfigError("reward: qos_sinr must be > 1 so that log2(q) > 0 (got " + std::to_string(qos_sinr) + ")");
}
}  // namespace

double reward_cdpq(double capacity, double qos_sinr) {
    check_qos(qos_sinr);
    const double qos_capacity = std::log2(qos_sinr);
    // (C - |C - 2L|) / 2L, split at the kink so the plateau is exactly 1.
    if (capacity >= 2.0 * qos_capacity) return 1.0;
    return capacity / qos_capacity - 1.0;
}

double reward_expq(double capacity, double qos_sinr, double shape) {
    check_qos(qos_sinr);
    return 1.0 - std::exp(-shape * (capacity - std::log2(qos_sinr)));
}

void RewardSpec::validate() const {
    check_qos(qos_sinr);
    if (kind == RewardKind::Expq && !(exp_shape > 0.0)) throw ConfigError("reward: exp_shape must be > 0");
}

double RewardSpec::operator()(double capacity) const {
    return kind == RewardKind::Cdpq ? reward_cdpq(capacity, qos_sinr) : reward_expq(capacity, qos_sinr, exp_shape);
}

void LearningConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("qlearn: alpha must be in (0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("qlearn: gamma must be in [0, 1)");
    if (episodes_max < 1) throw ConfigError("qlearn: episodes_max must be >= 1");
    if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) throw ConfigError("qlearn: epsilon0 must be in [0, 1]");
    if (!(q_init_scale >= 0.0)) throw ConfigError("qlearn: q_init_scale must be >= 0");
    if (early_stop_window < 0) throw ConfigError("qlearn: early_stop_window must be >= 0");
    if (trace_stride < 1) throw ConfigError("qlearn: trace_stride must be >= 1");
}

double LearningConfig::epsilon(int episode) const noexcept {
    if (epsilon_decay_fraction <= 0.0) return epsilon0;
    const double horizon = epsilon_decay_fraction * episodes_max;
    return epsilon0 * std::max(0.0, 1.0 - episode / horizon);
}

double LearningConfig::initial_q(double reward_supremum) const noexcept {
    return q_init_value.value_or(reward_supremum / (1.0 - gamma));
}

std::size_t greedy_action(std::span<const double> row) {
    return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::size_t select_action(const QTable& table, AgentState state, int episode, const LearningConfig& config, Rng& rng) {
    const double eps = config.epsilon(episode);
    if (eps > 0.0 && uniform01(rng) < eps)
        return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(table.actions()));
    return greedy_action(table.row(static_cast<std::size_t>(state.ring_index)));
}

double q_update(QTable& table, AgentState state, std::size_t action, double reward, AgentState next_state,
                double alpha, double gamma, Bootstrap bootstrap) {
    const auto s = static_cast<std::size_t>(state.ring_index);
    const auto next = static_cast<std::size_t>(next_state.ring_index);
    double future = table.at(next, action);
    if (bootstrap == Bootstrap::MaxAction) {
        auto row = table.row(next);
        future = *std::max_element(row.begin(), row.end());
    }
    double& q = table.at(s, action);
    const double updated = (1.0 - alpha) * q + alpha * (reward + gamma * future);
    const double delta = std::abs(updated - q);
    q = updated;
    return delta;
}

std::uint64_t cluster_seed(std::uint64_t run_seed, int head_id) noexcept {
    return derive_seed(run_seed, {0xc1u, static_cast<std::uint64_t>(head_id)});
}

ClusterTraining train_cluster(const Cluster& cluster, const NetworkLayout& layout, const GainMatrix& gains,
                              const TrainingSetup& setup, std::uint64_t seed) {
    setup.reward.validate();
    setup.learning.validate();
    if (setup.grid.size() == 0) throw ConfigError("qlearn: empty action grid");
    if (gains.size() != layout.size()) throw ConfigError("qlearn: gain matrix does not match layout");

    ClusterTraining out;
    out.cluster_id = cluster.head;
    out.bs_ids = cluster.node_ids();
    const std::size_t n = out.bs_ids.size();
    for (int id : out.bs_ids)
        if (id < 0 || static_cast<std::size_t>(id) >= layout.size())
            throw ConfigError("qlearn: cluster " + std::to_string(cluster.head) + " references unknown BS " +
                              std::to_string(id));

    const auto& lc = setup.learning;
    const Point2D ch = layout.stations[static_cast<std::size_t>(cluster.head)].position;
    Rng rng(seed);

    const std::size_t n_states = static_cast<std::size_t>(setup.n_rings);
    const std::size_t n_actions = setup.grid.size();
    const double q0 = lc.initial_q(setup.reward.supremum());
    for (int id : out.bs_ids) {
        out.states.push_back(ring_state(layout.stations[static_cast<std::size_t>(id)].position, ch,
                                        setup.ring_spacing_m, setup.n_rings));
        QTable table(n_states, n_actions, q0);
        if (lc.q_init_scale > 0.0)
            for (std::size_t s = 0; s < n_states; ++s)
                for (std::size_t a = 0; a < n_actions; ++a) table.at(s, a) -= lc.q_init_scale * uniform01(rng);
        out.qtables.push_back(std::move(table));
    }

    // Local views: gains restricted to the cluster, indexed by agent slot.
    std::vector<double> g(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            g[i * n + k] = gains(static_cast<std::size_t>(out.bs_ids[i]), static_cast<std::size_t>(out.bs_ids[k]));
    std::vector<double> level_mw(n_actions);
    for (std::size_t a = 0; a < n_actions; ++a) level_mw[a] = dbm_to_mw(setup.grid.level_dbm(a));
    const double noise_mw = dbm_to_mw(setup.noise_power_dbm);

    out.published_rows.assign(n, {});
    std::vector<std::size_t> actions(n, 0);
    std::vector<double> p_mw(n), sinr(n), cap(n), reward(n);
    int quiet = 0;

    for (int episode = 0; episode < lc.episodes_max; ++episode) {
        // Row exchange barrier; what clustermates receive is logged, not used.
        for (std::size_t k = 0; k < n; ++k) {
            auto row = out.qtables[k].row(static_cast<std::size_t>(out.states[k].ring_index));
            out.published_rows[k].assign(row.begin(), row.end());
        }
        out.rows_exchanged += n * (n - 1);

        for (std::size_t k = 0; k < n; ++k) {
            actions[k] = select_action(out.qtables[k], out.states[k], episode, lc, rng);
            p_mw[k] = level_mw[actions[k]];
        }

        double max_delta = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double interference = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (i != k) interference += p_mw[i] * g[i * n + k];
            sinr[k] = p_mw[k] * g[k * n + k] / (interference + noise_mw);
            cap[k] = capacity(sinr[k]);
            reward[k] = setup.reward(cap[k]);
            // Static geometry: the next state is the current one.
            max_delta = std::max(max_delta, q_update(out.qtables[k], out.states[k], actions[k], reward[k],
                                                     out.states[k], lc.alpha, lc.gamma, lc.bootstrap));
        }
        out.episodes_run = episode + 1;

        quiet = max_delta < lc.early_stop_tolerance ? quiet + 1 : 0;
        const bool stop = lc.early_stop_window > 0 && quiet >= lc.early_stop_window;
        const bool last = stop || episode + 1 == lc.episodes_max;

        if (episode % lc.trace_stride == 0 || last) {
            for (std::size_t k = 0; k < n; ++k)
                out.trace.push_back({cluster.head, episode, out.bs_ids[k], out.states[k].ring_index,
                                     setup.grid.level_dbm(actions[k]), linear_to_db(sinr[k]), cap[k], reward[k]});
        }
        if (stop) {
            out.early_stopped = true;
            break;
        }
    }

    out.powers = greedy_power_vector(out.qtables, out.states, setup.grid);
    return out;
}

std::vector<ClusterTraining> train_all(const ClusterAssignment& assignment, const NetworkLayout& layout,
                                       const GainMatrix& gains, const TrainingSetup& setup, std::uint64_t run_seed,
                                       int threads) {
    const auto& clusters = assignment.clusters;
    std::vector<ClusterTraining> out(clusters.size());
    auto work = [&](std::size_t i) {
        out[i] = train_cluster(clusters[i], layout, gains, setup, cluster_seed(run_seed, clusters[i].head));
    };
    if (threads <= 1 || clusters.size() <= 1) {
        for (std::size_t i = 0; i < clusters.size(); ++i) work(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), clusters.size());
    for (std::size_t t = 0; t < workers; ++t) {
        pool.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next++; i < clusters.size(); i = next++) work(i);
        }));
    }
    for (auto& f : pool) f.get();
    return out;
}

PowerVector greedy_power_vector(std::span<const QTable> qtables, std::span<const AgentState> states,
                                const ActionGrid& grid) {
    if (qtables.size() != states.size()) throw ConfigError("qlearn: one Q-table per agent state required");
    PowerVector p;
    p.p_dbm.reserve(qtables.size());
    for (std::size_t k = 0; k < qtables.size(); ++k)
        p.p_dbm.push_back(grid.level_dbm(greedy_action(qtables[k].row(static_cast<std::size_t>(states[k].ring_index)))));
    return p;
}

}  // namespace mmson

#include "mmson/metrics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "mmson/errors.hpp"

namespace mmson {

double jain_index(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("jain_index: empty input");
    double sum = 0.0, sum_sq = 0.0;
    for (double x : values) {
        if (x < 0.0) throw std::invalid_argument("jain_index: negative value");
        sum += x;
        sum_sq += x * x;
    }
    if (sum_sq == 0.0) throw std::invalid_argument("jain_index: undefined for an all-zero vector");
    return sum * sum / (static_cast<double>(values.size()) * sum_sq);
}

const char* to_string(EvalMode m) noexcept { return m == EvalMode::InCluster ? "in-cluster" : "full-network"; }

EvalMode parse_eval_mode(const std::string& s) {
    if (s == "in-cluster") return EvalMode::InCluster;
    if (s == "full-network") return EvalMode::FullNetwork;
    throw ConfigError("unknown eval mode '" + s + "' (expected in-cluster or full-network)");
}

EvaluationReport evaluate(const NetworkLayout& layout, const GainMatrix& gains, const ClusterAssignment& clusters,
                          const PowerVector& powers, EvalMode mode, double noise_power_dbm) {
    const std::size_t n = layout.size();
    if (n == 0) throw EmptyNetworkError();
    if (gains.size() != n) throw ConfigError("evaluate: gain matrix is " + std::to_string(gains.size()) +
                                             " but layout has " + std::to_string(n) + " stations");
    if (powers.size() != n) throw ConfigError("evaluate: power vector length does not match layout");
    if (clusters.node_count() != n || !clusters.unclustered.empty())
        throw ConfigError("evaluate: clusters must cover every station exactly once");

    std::vector<int> cluster_of(n, -1);
    for (const auto& c : clusters.clusters)
        for (int id : c.node_ids()) {
            if (id < 0 || static_cast<std::size_t>(id) >= n || cluster_of[static_cast<std::size_t>(id)] != -1)
                throw ConfigError("evaluate: clusters must cover every station exactly once");
            cluster_of[static_cast<std::size_t>(id)] = c.head;
        }

    const auto p_mw = powers.to_mw();
    const double noise_mw = dbm_to_mw(noise_power_dbm);

    EvaluationReport report;
    report.mode = mode;
    report.per_user.reserve(n);
    double ratio_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        UserEvaluation u;
        u.bs_id = static_cast<int>(k);
        u.cluster_id = cluster_of[k];
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const double rx = p_mw[i] * gains(i, k);
            (cluster_of[i] == cluster_of[k] ? u.in_cluster_interference_mw : u.out_cluster_interference_mw) += rx;
        }
        const double interference = u.in_cluster_interference_mw +
                                    (mode == EvalMode::FullNetwork ? u.out_cluster_interference_mw : 0.0);
        u.sinr_linear = p_mw[k] * gains(k, k) / (interference + noise_mw);
        u.capacity = capacity(u.sinr_linear);
        u.qos_met = u.sinr_linear >= layout.users[k].qos_sinr;
        if (u.in_cluster_interference_mw > 0.0) {
            ratio_sum += u.out_cluster_interference_mw / u.in_cluster_interference_mw;
            ++report.network.interference_ratio_users;
        }
        report.per_user.push_back(u);
    }

    int met = 0;
    for (const auto& c : clusters.clusters) {
        ClusterEvaluation ce;
        ce.cluster_id = c.head;
        ce.size = static_cast<int>(c.size());
        std::vector<double> caps;
        ce.all_qos_met = true;
        for (int id : c.node_ids()) {
            const auto& u = report.per_user[static_cast<std::size_t>(id)];
            caps.push_back(u.capacity);
            ce.sum_capacity += u.capacity;
            ce.all_qos_met = ce.all_qos_met && u.qos_met;
        }
        ce.jain_index = jain_index(caps);
        report.network.total_capacity += ce.sum_capacity;
        report.per_cluster.push_back(ce);
    }
    for (const auto& u : report.per_user) met += u.qos_met ? 1 : 0;
    report.network.fraction_qos_met = static_cast<double>(met) / static_cast<double>(n);
    if (report.network.interference_ratio_users > 0)
        report.network.cross_cluster_interference_ratio = ratio_sum / report.network.interference_ratio_users;
    return report;
}

}  // namespace mmson

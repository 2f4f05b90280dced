#pragma once

#include <span>
#include <string>
#include <vector>

#include "mmson/channel.hpp"
#include "mmson/deployment.hpp"
#include "mmson/floc.hpp"

namespace mmson {

/// Jain's index (sum x)^2 / (n sum x^2). Throws std::invalid_argument on
/// empty or all-zero input, or negative values.
double jain_index(std::span<const double> values);

enum class EvalMode : std::uint8_t { InCluster, FullNetwork };

const char* to_string(EvalMode m) noexcept;
EvalMode parse_eval_mode(const std::string& s);

struct UserEvaluation {
    int bs_id = -1;
    int cluster_id = -1;
    double sinr_linear = 0.0;
    double capacity = 0.0;
    bool qos_met = false;
    double in_cluster_interference_mw = 0.0;
    double out_cluster_interference_mw = 0.0;
};

struct ClusterEvaluation {
    int cluster_id = -1;
    int size = 0;
    double sum_capacity = 0.0;
    double jain_index = 0.0;
    bool all_qos_met = false;
};

struct NetworkEvaluation {
    double total_capacity = 0.0;
    double fraction_qos_met = 0.0;
    // Mean over users with nonzero in-cluster interference; 0 when none has any.
    double cross_cluster_interference_ratio = 0.0;
    int interference_ratio_users = 0;
};

struct EvaluationReport {
    EvalMode mode = EvalMode::InCluster;
    std::vector<UserEvaluation> per_user;  // sorted by bs_id
    std::vector<ClusterEvaluation> per_cluster;  // assignment order
    NetworkEvaluation network;
};

/// SINR, capacity and QoS for every user under `powers` (indexed by BS id).
EvaluationReport evaluate(const NetworkLayout& layout, const GainMatrix& gains, const ClusterAssignment& clusters,
                          const PowerVector& powers, EvalMode mode, double noise_power_dbm);

}  // namespace mmson

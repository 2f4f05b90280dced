#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmson/channel.hpp"
#include "mmson/deployment.hpp"
#include "mmson/floc.hpp"
#include "mmson/metrics.hpp"
#include "mmson/qlearn.hpp"

namespace mmson {

struct SweepConfig {
    std::vector<int> sizes{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14};
    int seeds_per_size = 20;
    std::vector<RewardKind> rewards{RewardKind::Cdpq, RewardKind::Expq};

    friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

/// Every tunable of the pipeline. Defaults reproduce the reference setup.
struct RunConfig {
    DeploymentConfig deployment;
    ChannelParams channel;
    FlocParams floc;
    int n_power = 31;
    double ring_spacing_m = 50.0;
    int n_rings = 4;
    LearningConfig learning;
    RewardKind reward_kind = RewardKind::Cdpq;
    double exp_shape = 1.0;
    EvalMode eval_mode = EvalMode::InCluster;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int threads = 1;
    SweepConfig sweep;

    /// Throws ConfigError naming the first violated precondition.
    void validate() const;

    RewardSpec reward_spec(RewardKind kind) const;
    RewardSpec reward_spec() const { return reward_spec(reward_kind); }
    TrainingSetup training_setup(RewardKind kind) const;
    TrainingSetup training_setup() const { return training_setup(reward_kind); }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses `key = value` lines with dotted section names; '#' starts a comment.
/// Unknown keys and malformed values throw ConfigError. Missing keys keep defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Emits every key; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

}  // namespace mmson

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmson/deployment.hpp"
#include "mmson/floc.hpp"
#include "mmson/metrics.hpp"
#include "mmson/qlearn.hpp"

namespace mmson {

using json = nlohmann::json;

json to_json(const NetworkLayout& layout);
NetworkLayout layout_from_json(const json& j);

json to_json(const ClusterAssignment& assignment);
ClusterAssignment assignment_from_json(const json& j);

/// Learned policy of every cluster: states, Q-tables and final powers.
json policy_to_json(const std::vector<ClusterTraining>& trainings);
std::vector<ClusterTraining> policy_from_json(const json& j);

json summary_to_json(const EvaluationReport& report);

/// cluster_id,episode,bs_id,ring,action_dbm,sinr_db,capacity,reward
std::string trace_csv(const std::vector<ClusterTraining>& trainings);
std::string users_csv(const EvaluationReport& report);
std::string clusters_csv(const EvaluationReport& report);

/// Shortest round-trip decimal form.
std::string format_number(double v);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);
json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

/// Minimal reader for the CSV files this library writes (no quoting).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
};
CsvTable parse_csv(const std::string& text);

}  // namespace mmson

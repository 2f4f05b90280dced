#include "mmson/serialize.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mmson/errors.hpp"

namespace mmson {

std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

json to_json(const NetworkLayout& layout) {
    json j;
    j["region"] = {{"width_m", layout.region.width_m}, {"height_m", layout.region.height_m}};
    j["seed"] = layout.seed;
    j["stations"] = json::array();
    for (const auto& bs : layout.stations)
        j["stations"].push_back({{"id", bs.id}, {"x", bs.position.x}, {"y", bs.position.y}});
    j["users"] = json::array();
    for (const auto& ue : layout.users)
        j["users"].push_back({{"id", ue.id},
                              {"x", ue.position.x},
                              {"y", ue.position.y},
                              {"serving_bs", ue.serving_bs},
                              {"qos_sinr", ue.qos_sinr}});
    json rows = json::array();
    for (std::size_t i = 0; i < layout.shadowing.size(); ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < layout.shadowing.size(); ++k) row.push_back(layout.shadowing(i, k));
        rows.push_back(std::move(row));
    }
    j["shadowing_std_normal"] = std::move(rows);
    return j;
}

NetworkLayout layout_from_json(const json& j) {
    NetworkLayout layout;
    layout.region = {j.at("region").at("width_m").get<double>(), j.at("region").at("height_m").get<double>()};
    layout.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("stations"))
        layout.stations.push_back({s.at("id").get<int>(), {s.at("x").get<double>(), s.at("y").get<double>()}});
    for (const auto& u : j.at("users"))
        layout.users.push_back({u.at("id").get<int>(),
                                {u.at("x").get<double>(), u.at("y").get<double>()},
                                u.at("serving_bs").get<int>(),
                                u.at("qos_sinr").get<double>()});
    const auto& rows = j.at("shadowing_std_normal");
    const std::size_t n = layout.stations.size();
    if (layout.users.size() != n || rows.size() != n) throw Error("layout: inconsistent station/user/shadowing sizes");
    layout.shadowing = SquareMatrix(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) throw Error("layout: shadowing matrix is not square");
        for (std::size_t k = 0; k < n; ++k) layout.shadowing(i, k) = rows[i][k].get<double>();
    }
    for (std::size_t i = 0; i < n; ++i)
        if (layout.stations[i].id != static_cast<int>(i) || layout.users[i].serving_bs != static_cast<int>(i))
            throw Error("layout: station ids must be dense 0..N-1 with one user each");
    return layout;
}

json to_json(const ClusterAssignment& a) {
    json j;
    j["convergence_time_s"] = to_seconds(a.convergence_time);
    j["convergence_time_us"] = a.convergence_time.count();
    j["clusters"] = json::array();
    for (const auto& c : a.clusters) {
        json members = json::array();
        for (const auto& m : c.members) members.push_back({{"id", m.id}, {"band", to_string(m.band)}});
        j["clusters"].push_back(
            {{"head", c.head}, {"head_announce_time_us", c.head_announce_time.count()}, {"members", members}});
    }
    j["unclustered"] = a.unclustered;
    return j;
}

ClusterAssignment assignment_from_json(const json& j) {
    ClusterAssignment a;
    a.convergence_time = VirtualTime(j.at("convergence_time_us").get<std::int64_t>());
    for (const auto& c : j.at("clusters")) {
        Cluster cluster;
        cluster.head = c.at("head").get<int>();
        cluster.head_announce_time = VirtualTime(c.at("head_announce_time_us").get<std::int64_t>());
        for (const auto& m : c.at("members")) {
            const auto band = m.at("band").get<std::string>();
            if (band != "IB" && band != "OB") throw Error("clusters: unknown band '" + band + "'");
            cluster.members.push_back({m.at("id").get<int>(), band == "IB" ? Band::InBand : Band::OutBand});
        }
        a.clusters.push_back(std::move(cluster));
    }
    a.unclustered = j.at("unclustered").get<std::vector<int>>();
    return a;
}

json policy_to_json(const std::vector<ClusterTraining>& trainings) {
    json j = json::array();
    for (const auto& t : trainings) {
        json qtables = json::array();
        for (const auto& q : t.qtables) {
            json rows = json::array();
            for (std::size_t s = 0; s < q.states(); ++s) {
                auto row = q.row(s);
                rows.push_back(std::vector<double>(row.begin(), row.end()));
            }
            qtables.push_back(std::move(rows));
        }
        std::vector<int> rings;
        for (const auto& s : t.states) rings.push_back(s.ring_index);
        j.push_back({{"cluster_id", t.cluster_id},
                     {"bs_ids", t.bs_ids},
                     {"rings", rings},
                     {"powers_dbm", t.powers.p_dbm},
                     {"episodes_run", t.episodes_run},
                     {"early_stopped", t.early_stopped},
                     {"rows_exchanged", t.rows_exchanged},
                     {"qtables", std::move(qtables)}});
    }
    return j;
}

std::vector<ClusterTraining> policy_from_json(const json& j) {
    std::vector<ClusterTraining> out;
    for (const auto& c : j) {
        ClusterTraining t;
        t.cluster_id = c.at("cluster_id").get<int>();
        t.bs_ids = c.at("bs_ids").get<std::vector<int>>();
        for (int r : c.at("rings").get<std::vector<int>>()) t.states.push_back({r});
        t.powers.p_dbm = c.at("powers_dbm").get<std::vector<double>>();
        t.episodes_run = c.at("episodes_run").get<int>();
        t.early_stopped = c.at("early_stopped").get<bool>();
        t.rows_exchanged = c.at("rows_exchanged").get<std::uint64_t>();
        for (const auto& rows : c.at("qtables")) {
            const std::size_t states = rows.size();
            const std::size_t actions = states ? rows[0].size() : 0;
            QTable q(states, actions);
            for (std::size_t s = 0; s < states; ++s)
                for (std::size_t a = 0; a < actions; ++a) q.at(s, a) = rows[s].at(a).get<double>();
            t.qtables.push_back(std::move(q));
        }
        if (t.qtables.size() != t.bs_ids.size() || t.states.size() != t.bs_ids.size() ||
            t.powers.size() != t.bs_ids.size())
            throw Error("policy: cluster " + std::to_string(t.cluster_id) + " has inconsistent agent counts");
        out.push_back(std::move(t));
    }
    return out;
}

json summary_to_json(const EvaluationReport& r) {
    json j;
    j["eval_mode"] = to_string(r.mode);
    j["users"] = r.per_user.size();
    j["clusters"] = r.per_cluster.size();
    j["total_capacity"] = r.network.total_capacity;
    j["fraction_qos_met"] = r.network.fraction_qos_met;
    j["cross_cluster_interference_ratio"] = r.network.cross_cluster_interference_ratio;
    j["interference_ratio_users"] = r.network.interference_ratio_users;
    double jain_sum = 0.0;
    std::map<int, int> histogram;
    for (const auto& c : r.per_cluster) {
        jain_sum += c.jain_index;
        ++histogram[c.size];
    }
    j["mean_jain_index"] = r.per_cluster.empty() ? 0.0 : jain_sum / static_cast<double>(r.per_cluster.size());
    json hist = json::object();
    for (const auto& [size, count] : histogram) hist[std::to_string(size)] = count;
    j["cluster_size_histogram"] = hist;
    return j;
}

std::string trace_csv(const std::vector<ClusterTraining>& trainings) {
    std::string out = "cluster_id,episode,bs_id,ring,action_dbm,sinr_db,capacity,reward\n";
    for (const auto& t : trainings)
        for (const auto& r : t.trace) {
            out += std::to_string(r.cluster_id) + ',' + std::to_string(r.episode) + ',' + std::to_string(r.bs_id) + ',' +
                   std::to_string(r.ring) + ',' + format_number(r.action_dbm) + ',' + format_number(r.sinr_db) + ',' +
                   format_number(r.capacity) + ',' + format_number(r.reward) + '\n';
        }
    return out;
}

std::string users_csv(const EvaluationReport& report) {
    std::string out = "bs_id,cluster_id,sinr_linear,sinr_db,capacity,qos_met,in_cluster_interference_mw,"
                      "out_cluster_interference_mw\n";
    for (const auto& u : report.per_user)
        out += std::to_string(u.bs_id) + ',' + std::to_string(u.cluster_id) + ',' + format_number(u.sinr_linear) + ',' +
               format_number(linear_to_db(u.sinr_linear)) + ',' + format_number(u.capacity) + ',' +
               (u.qos_met ? "1" : "0") + ',' + format_number(u.in_cluster_interference_mw) + ',' +
               format_number(u.out_cluster_interference_mw) + '\n';
    return out;
}

std::string clusters_csv(const EvaluationReport& report) {
    std::string out = "cluster_id,size,sum_capacity,jain_index,all_qos_met\n";
    for (const auto& c : report.per_cluster)
        out += std::to_string(c.cluster_id) + ',' + std::to_string(c.size) + ',' + format_number(c.sum_capacity) + ',' +
               format_number(c.jain_index) + ',' + (c.all_qos_met ? "1" : "0") + '\n';
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::filesystem::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw Error("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw Error("csv: missing column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::stringstream ss(l);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    if (std::getline(in, line)) t.header = split(line);
    while (std::getline(in, line))
        if (!line.empty()) t.rows.push_back(split(line));
    return t;
}

}  // namespace mmson

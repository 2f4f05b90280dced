#include "mmson/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mmson/errors.hpp"

namespace mmson {

void RunConfig::validate() const {
    deployment.validate();
    channel.validate();
    floc.validate();
    if (n_power < 2) throw ConfigError("qlearn.n_power must be >= 2");
    if (!(ring_spacing_m > 0.0)) throw ConfigError("qlearn.ring_spacing_m must be > 0");
    if (n_rings < 1) throw ConfigError("qlearn.n_rings must be >= 1");
    learning.validate();
    reward_spec(RewardKind::Cdpq).validate();
    reward_spec(RewardKind::Expq).validate();
    if (threads < 1) throw ConfigError("run.threads must be >= 1");
    if (out_dir.empty()) throw ConfigError("run.out_dir must not be empty");
    for (int s : sweep.sizes)
        if (s < 1 || s > 14) throw ConfigError("sweep.sizes must lie within [1, 14]");
    if (sweep.seeds_per_size < 1) throw ConfigError("sweep.seeds_per_size must be >= 1");
    if (sweep.rewards.empty()) throw ConfigError("sweep.rewards must not be empty");
}

RewardSpec RunConfig::reward_spec(RewardKind kind) const {
    return RewardSpec{kind, deployment.qos_sinr, exp_shape};
}

TrainingSetup RunConfig::training_setup(RewardKind kind) const {
    return TrainingSetup{ActionGrid(channel.p_min_dbm, channel.p_max_dbm, n_power), reward_spec(kind), learning,
                         ring_spacing_m, n_rings, channel.noise_power_dbm};
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || end != value.data() + value.size())
        throw ConfigError("config: '" + key + "' expects a number, got '" + value + "'");
    return out;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<int> parse_sizes(const std::string& key, const std::string& value) {
    std::vector<int> out;
    for (const auto& item : split_list(value)) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_number<int>(key, item));
        } else {
            const int lo = parse_number<int>(key, trim(item.substr(0, dots)));
            const int hi = parse_number<int>(key, trim(item.substr(dots + 2)));
            if (lo > hi) throw ConfigError("config: '" + key + "' has a descending range");
            for (int s = lo; s <= hi; ++s) out.push_back(s);
        }
    }
    return out;
}

struct Field {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class Member>
Field number_field(Member member) {
    using T = std::remove_cvref_t<decltype(std::declval<RunConfig&>().*member)>;
    return {[member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_number<T>(k, v); },
            [member](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return format_double(c.*member);
                else return std::to_string(c.*member);
            }};
}

template <class Get>
Field double_field(Get get) {
    return {[get](RunConfig& c, const std::string& k, const std::string& v) { get(c) = parse_number<double>(k, v); },
            [get](const RunConfig& c) { return format_double(get(c)); }};
}

template <class Get>
Field int_field(Get get) {
    return {[get](RunConfig& c, const std::string& k, const std::string& v) { get(c) = parse_number<int>(k, v); },
            [get](const RunConfig& c) { return std::to_string(get(c)); }};
}

template <class Get>
Field bool_field(Get get) {
    return {[get](RunConfig& c, const std::string& k, const std::string& v) {
                if (v == "true") get(c) = true;
                else if (v == "false") get(c) = false;
                else throw ConfigError("config: " + k + " expects true or false, got '" + v + "'");
            },
            [get](const RunConfig& c) { return std::string(get(c) ? "true" : "false"); }};
}

template <class Get>
Field seconds_field(Get get) {
    return {[get](RunConfig& c, const std::string& k, const std::string& v) {
                get(c) = from_seconds(parse_number<double>(k, v));
            },
            [get](const RunConfig& c) { return format_double(to_seconds(get(c))); }};
}

// Ordered as emitted by serialize_config.
const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table = {
        {"deployment.region_width_m", double_field([](auto& c) -> auto& { return c.deployment.region.width_m; })},
        {"deployment.region_height_m",
         double_field([](auto& c) -> auto& { return c.deployment.region.height_m; })},
        {"deployment.lambda_bs", double_field([](auto& c) -> auto& { return c.deployment.lambda_bs; })},
        {"deployment.ue_radius_m", double_field([](auto& c) -> auto& { return c.deployment.ue_radius_m; })},
        {"deployment.qos_sinr", double_field([](auto& c) -> auto& { return c.deployment.qos_sinr; })},

        {"channel.carrier_freq_hz", double_field([](auto& c) -> auto& { return c.channel.carrier_freq_hz; })},
        {"channel.beta1_db", double_field([](auto& c) -> auto& { return c.channel.beta1_db; })},
        {"channel.beta2", double_field([](auto& c) -> auto& { return c.channel.beta2; })},
        {"channel.zeta_db", double_field([](auto& c) -> auto& { return c.channel.zeta_db; })},
        {"channel.noise_power_dbm", double_field([](auto& c) -> auto& { return c.channel.noise_power_dbm; })},
        {"channel.p_min_dbm", double_field([](auto& c) -> auto& { return c.channel.p_min_dbm; })},
        {"channel.p_max_dbm", double_field([](auto& c) -> auto& { return c.channel.p_max_dbm; })},

        {"floc.unit_distance_m", double_field([](auto& c) -> auto& { return c.floc.unit_distance_m; })},
        {"floc.outband_distance_m", double_field([](auto& c) -> auto& { return c.floc.outband_distance_m; })},
        {"floc.arrival_window_s", seconds_field([](auto& c) -> auto& { return c.floc.arrival_window; })},
        {"floc.backoff_max_s", seconds_field([](auto& c) -> auto& { return c.floc.backoff_max; })},
        {"floc.message_delay_s", seconds_field([](auto& c) -> auto& { return c.floc.message_delay; })},
        {"floc.time_budget_s", seconds_field([](auto& c) -> auto& { return c.floc.time_budget; })},
        {"floc.outband_join", bool_field([](auto& c) -> auto& { return c.floc.outband_join; })},

        {"qlearn.n_power", number_field(&RunConfig::n_power)},
        {"qlearn.ring_spacing_m", number_field(&RunConfig::ring_spacing_m)},
        {"qlearn.n_rings", number_field(&RunConfig::n_rings)},
        {"qlearn.alpha", double_field([](auto& c) -> auto& { return c.learning.alpha; })},
        {"qlearn.gamma", double_field([](auto& c) -> auto& { return c.learning.gamma; })},
        {"qlearn.episodes_max", int_field([](auto& c) -> auto& { return c.learning.episodes_max; })},
        {"qlearn.epsilon0", double_field([](auto& c) -> auto& { return c.learning.epsilon0; })},
        {"qlearn.epsilon_decay_fraction",
         double_field([](auto& c) -> auto& { return c.learning.epsilon_decay_fraction; })},
        {"qlearn.q_init_value",
         {[](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "optimistic") c.learning.q_init_value.reset();
              else c.learning.q_init_value = parse_number<double>(k, v);
          },
          [](const RunConfig& c) {
              return c.learning.q_init_value ? format_double(*c.learning.q_init_value) : std::string("optimistic");
          }}},
        {"qlearn.q_init_scale", double_field([](auto& c) -> auto& { return c.learning.q_init_scale; })},
        {"qlearn.early_stop_tolerance",
         double_field([](auto& c) -> auto& { return c.learning.early_stop_tolerance; })},
        {"qlearn.early_stop_window", int_field([](auto& c) -> auto& { return c.learning.early_stop_window; })},
        {"qlearn.bootstrap",
         {[](RunConfig& c, const std::string&, const std::string& v) { c.learning.bootstrap = parse_bootstrap(v); },
          [](const RunConfig& c) { return std::string(to_string(c.learning.bootstrap)); }}},
        {"qlearn.trace_stride", int_field([](auto& c) -> auto& { return c.learning.trace_stride; })},

        {"reward.kind",
         {[](RunConfig& c, const std::string&, const std::string& v) { c.reward_kind = parse_reward_kind(v); },
          [](const RunConfig& c) { return std::string(to_string(c.reward_kind)); }}},
        {"reward.exp_shape", number_field(&RunConfig::exp_shape)},

        {"run.seed", number_field(&RunConfig::seed)},
        {"run.out_dir",
         {[](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
          [](const RunConfig& c) { return c.out_dir; }}},
        {"run.eval_mode",
         {[](RunConfig& c, const std::string&, const std::string& v) { c.eval_mode = parse_eval_mode(v); },
          [](const RunConfig& c) { return std::string(to_string(c.eval_mode)); }}},
        {"run.threads", number_field(&RunConfig::threads)},

        {"sweep.sizes",
         {[](RunConfig& c, const std::string& k, const std::string& v) { c.sweep.sizes = parse_sizes(k, v); },
          [](const RunConfig& c) {
              std::string out;
              for (int s : c.sweep.sizes) out += (out.empty() ? "" : ",") + std::to_string(s);
              return out;
          }}},
        {"sweep.seeds_per_size",
         int_field([](auto& c) -> auto& { return c.sweep.seeds_per_size; })},
        {"sweep.rewards",
         {[](RunConfig& c, const std::string&, const std::string& v) {
              c.sweep.rewards.clear();
              for (const auto& item : split_list(v)) c.sweep.rewards.push_back(parse_reward_kind(item));
          },
          [](const RunConfig& c) {
              std::string out;
              for (auto r : c.sweep.rewards) out += (out.empty() ? "" : ",") + std::string(to_string(r));
              return out;
          }}},
    };
    return table;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    std::map<std::string, const Field*> index;
    for (const auto& [key, field] : fields()) index[key] = &field;

    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = index.find(key);
        if (it == index.end()) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        it->second->set(config, key, value);
    }
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& config) {
    std::string out;
    std::string section;
    for (const auto& [key, field] : fields()) {
        const auto s = key.substr(0, key.find('.'));
        if (s != section) {
            if (!section.empty()) out += '\n';
            out += "# " + s + "\n";
            section = s;
        }
        out += key + " = " + field.get(config) + "\n";
    }
    return out;
}

}  // namespace mmson

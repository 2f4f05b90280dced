#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "mmson/channel.hpp"
#include "mmson/deployment.hpp"
#include "mmson/errors.hpp"
#include "mmson/floc.hpp"
#include "mmson/metrics.hpp"

using namespace mmson;
using namespace std::chrono_literals;

TEST_CASE("jain index") {
    CHECK(jain_index(std::vector<double>{3, 3, 3, 3}) == doctest::Approx(1.0));
    CHECK(jain_index(std::vector<double>{1, 0, 0, 0}) == doctest::Approx(0.25));
    CHECK(jain_index(std::vector<double>{1, 2, 3}) == doctest::Approx(36.0 / 42.0));
    CHECK(jain_index(std::vector<double>{1, 2, 3}) == doctest::Approx(0.857).epsilon(1e-3));
    CHECK_THROWS_AS(jain_index(std::vector<double>{0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(jain_index(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(jain_index(std::vector<double>{1, -1}), std::invalid_argument);
}

TEST_CASE("jain index bounds and scale invariance") {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(1 + i % 13);
        for (auto& v : x) v = uniform(rng, 0.0, 10.0);
        const double j = jain_index(x);
        CHECK(j >= 1.0 / x.size() - 1e-12);
        CHECK(j <= 1.0 + 1e-12);
        auto y = x;
        for (auto& v : y) v *= 7.5;
        CHECK(jain_index(y) == doctest::Approx(j));
    }
}

namespace {

struct Net {
    NetworkLayout layout;
    GainMatrix gains;
    ClusterAssignment clusters;
    PowerVector powers;
};

Net make_net() {
    Net n;
    n.layout = generate_layout(DeploymentConfig{}, 31);
    n.gains = build_gain_matrix(n.layout, ChannelParams{});
    n.clusters = run_clustering(n.layout, FlocParams{}, 31);
    Rng rng(4);
    for (std::size_t i = 0; i < n.layout.size(); ++i) n.powers.p_dbm.push_back(uniform(rng, -10.0, 35.0));
    return n;
}

}  // namespace

TEST_CASE("singleton network") {
    NetworkLayout l = layout_from_stations(Region{}, {{500, 500}}, 10.0, 2.83, 1);
    ClusterAssignment a;
    a.clusters = {Cluster{0, 0ms, {}}};
    const auto g = build_gain_matrix(l, ChannelParams{});
    const auto r = evaluate(l, g, a, PowerVector{{35.0}}, EvalMode::InCluster, -120.0);
    REQUIRE(r.per_cluster.size() == 1);
    CHECK(r.per_cluster.front().jain_index == 1.0);
    CHECK(r.per_user.front().qos_met);
    CHECK(r.per_user.front().sinr_linear == doctest::Approx(sinr(0, PowerVector{{35.0}}, g, {}, -120.0)));
    CHECK(r.network.cross_cluster_interference_ratio == 0.0);
    CHECK(r.network.interference_ratio_users == 0);
}

TEST_CASE("aggregation consistency and mode monotonicity") {
    const auto n = make_net();
    const auto in = evaluate(n.layout, n.gains, n.clusters, n.powers, EvalMode::InCluster, -120.0);
    const auto full = evaluate(n.layout, n.gains, n.clusters, n.powers, EvalMode::FullNetwork, -120.0);
    REQUIRE(in.per_user.size() == n.layout.size());
    REQUIRE(full.per_user.size() == n.layout.size());

    double total = 0.0;
    for (const auto& c : in.per_cluster) total += c.sum_capacity;
    CHECK(in.network.total_capacity == doctest::Approx(total));

    for (const auto& c : in.per_cluster) {
        double sum = 0.0;
        for (const auto& u : in.per_user)
            if (u.cluster_id == c.cluster_id) sum += u.capacity;
        CHECK(c.sum_capacity == doctest::Approx(sum));
        CHECK(c.jain_index > 0.0);
        CHECK(c.jain_index <= 1.0 + 1e-12);
    }
    for (std::size_t k = 0; k < in.per_user.size(); ++k) {
        CHECK(full.per_user[k].sinr_linear <= in.per_user[k].sinr_linear);
        CHECK(full.per_user[k].capacity <= in.per_user[k].capacity);
        CHECK(in.per_user[k].qos_met == (in.per_user[k].sinr_linear >= 2.83));
    }
    CHECK(in.network.fraction_qos_met >= 0.0);
    CHECK(in.network.fraction_qos_met <= 1.0);
    CHECK(in.network.cross_cluster_interference_ratio > 0.0);
}

TEST_CASE("dimension mismatches are errors") {
    const auto n = make_net();
    PowerVector short_powers{{0.0}};
    CHECK_THROWS_AS(evaluate(n.layout, n.gains, n.clusters, short_powers, EvalMode::InCluster, -120.0), ConfigError);
    ClusterAssignment partial;
    partial.clusters = {n.clusters.clusters.front()};
    CHECK_THROWS_AS(evaluate(n.layout, n.gains, partial, n.powers, EvalMode::InCluster, -120.0), ConfigError);
    CHECK_THROWS_AS(evaluate(NetworkLayout{}, GainMatrix{}, ClusterAssignment{}, PowerVector{}, EvalMode::InCluster,
                             -120.0),
                    EmptyNetworkError);
}

TEST_CASE("eval mode names") {
    CHECK(parse_eval_mode("in-cluster") == EvalMode::InCluster);
    CHECK(parse_eval_mode("full-network") == EvalMode::FullNetwork);
    CHECK(std::string(to_string(EvalMode::FullNetwork)) == "full-network");
    CHECK_THROWS_AS(parse_eval_mode("global"), ConfigError);
}

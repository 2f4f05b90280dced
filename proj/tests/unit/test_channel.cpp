#include <doctest.h>

#include <cmath>
#include <vector>

#include "mmson/channel.hpp"
#include "mmson/deployment.hpp"
#include "mmson/errors.hpp"

using namespace mmson;

TEST_CASE("friis path loss") {
    CHECK(std::abs(pathloss_friis_db(10.0, 28e9) - 81.39) < 0.01);
    CHECK(std::abs(pathloss_friis_db(1.0, 28e9) - 61.39) < 0.01);
    CHECK(pathloss_friis_db(10.0, 28e9) - pathloss_friis_db(1.0, 28e9) == doctest::Approx(20.0));
    CHECK(pathloss_friis_db(0.1, 28e9) == pathloss_friis_db(1.0, 28e9));
}

TEST_CASE("nlos path loss") {
    const ChannelParams p;
    CHECK(std::abs(pathloss_nlos_db(100.0, p, 0.0) - 130.4) < 0.01);
    CHECK(std::abs(pathloss_nlos_db(10.0, p, 0.0) - 101.2) < 0.01);
    CHECK(pathloss_nlos_db(37.0, p, 1.0) - pathloss_nlos_db(37.0, p, 0.0) == doctest::Approx(8.7));
    CHECK(pathloss_nlos_db(0.2, p, 0.0) == pathloss_nlos_db(1.0, p, 0.0));
}

TEST_CASE("unit conversions round-trip") {
    for (double dbm = -120.0; dbm <= 35.0; dbm += 0.37) {
        const double back = mw_to_dbm(dbm_to_mw(dbm));
        CHECK(std::abs(back - dbm) <= 1e-9 * std::max(1.0, std::abs(dbm)));
    }
    CHECK(dbm_to_mw(0.0) == doctest::Approx(1.0));
    CHECK(db_to_linear(linear_to_db(2.83)) == doctest::Approx(2.83));
}

NetworkLayout two_station_layout() {
    // User 0 is 10 m from its station, user 1 sits on its own.
    NetworkLayout l;
    l.stations = {{0, {0.0, 0.0}}, {1, {100.0, 0.0}}};
    l.users = {{0, {10.0, 0.0}, 0, 2.83}, {1, {100.0, 0.0}, 1, 2.83}};
    l.shadowing = SquareMatrix(2, 0.0);
    return l;
}

TEST_CASE("gain matrix uses friis on the diagonal and nlos elsewhere") {
    const ChannelParams p;
    const auto l = two_station_layout();
    const auto g = build_gain_matrix(l, p);
    CHECK(g(0, 0) == doctest::Approx(std::pow(10.0, -pathloss_friis_db(10.0, 28e9) / 10.0)));
    CHECK(g(0, 0) == doctest::Approx(7.26e-9).epsilon(1e-3));
    CHECK(g(0, 1) == doctest::Approx(std::pow(10.0, -13.04)).epsilon(1e-3));
    CHECK(g(1, 0) == doctest::Approx(std::pow(10.0, -pathloss_nlos_db(90.0, p, 0.0) / 10.0)));
    CHECK(build_gain_matrix(l, p) == g);
}

TEST_CASE("gain matrix of an empty layout is an error") {
    CHECK_THROWS_AS(build_gain_matrix(NetworkLayout{}, ChannelParams{}), EmptyNetworkError);
}

TEST_CASE("sinr and capacity") {
    const ChannelParams p;
    const auto l = two_station_layout();
    const auto g = build_gain_matrix(l, p);

    const double s = sinr(0, PowerVector{{35.0, -10.0}}, g, {}, p.noise_power_dbm);
    CHECK(std::abs(linear_to_db(s) - 73.61) < 0.01);
    CHECK(s == doctest::Approx(2.30e7).epsilon(5e-3));

    // Interferer received power equal to the desired received power.
    const std::vector<double> mw{1.0, g(0, 0) / g(1, 0)};
    const std::vector<int> interferers{1};
    CHECK(sinr_linear(0, mw, g, interferers, 1e-30) == doctest::Approx(1.0));
    CHECK(sinr_linear(0, std::vector<double>{0.0, 1.0}, g, interferers, dbm_to_mw(-120.0)) == 0.0);

    CHECK(capacity(0.0) == 0.0);
    CHECK(capacity(1.0) == 1.0);
    CHECK(capacity(2.83) == doctest::Approx(1.9374).epsilon(1e-4));
}

TEST_CASE("sinr monotonicity") {
    const ChannelParams p;
    const auto l = two_station_layout();
    const auto g = build_gain_matrix(l, p);
    const std::vector<int> others{1};
    double prev = 0.0;
    for (double own = -10.0; own <= 35.0; own += 1.5) {
        const double c = capacity(sinr(0, PowerVector{{own, 20.0}}, g, others, p.noise_power_dbm));
        CHECK(c > prev);
        prev = c;
    }
    prev = 1e300;
    for (double other = -10.0; other <= 35.0; other += 1.5) {
        const double c = capacity(sinr(0, PowerVector{{20.0, other}}, g, others, p.noise_power_dbm));
        CHECK(c < prev);
        prev = c;
    }
    CHECK(sinr(0, PowerVector{{3.0, 4.0}}, g, others, -120.0) == sinr(0, PowerVector{{3.0, 4.0}}, g, others, -120.0));
}

TEST_CASE("sinr on an empty gain matrix is an error") {
    CHECK_THROWS(sinr(0, PowerVector{{0.0}}, GainMatrix{}, {}, -120.0));
}

TEST_CASE("power bounds") {
    const ChannelParams p;
    CHECK(PowerVector{{-10.0, 35.0}}.within(p));
    CHECK_FALSE(PowerVector{{-10.1}}.within(p));
    CHECK_FALSE(PowerVector{{35.1}}.within(p));
}

TEST_CASE("channel parameter validation") {
    ChannelParams p;
    p.p_min_dbm = 40.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = ChannelParams{};
    p.beta2 = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = ChannelParams{};
    p.zeta_db = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

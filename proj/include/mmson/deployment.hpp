#pragma once

#include <cstdint>
#include <vector>

#include "mmson/geometry.hpp"
#include "mmson/rng.hpp"

namespace mmson {

/// Axis-aligned deployment rectangle anchored at the origin.
struct Region {
    double width_m = 1000.0;
    double height_m = 1000.0;

    double area_m2() const noexcept { return width_m * height_m; }
    double area_km2() const noexcept { return area_m2() * 1e-6; }
    bool contains(Point2D p) const noexcept {
        return p.x >= 0.0 && p.x <= width_m && p.y >= 0.0 && p.y <= height_m;
    }

    friend bool operator==(const Region&, const Region&) = default;
};

struct BaseStation {
    int id = 0;
    Point2D position;

    friend bool operator==(const BaseStation&, const BaseStation&) = default;
};

struct UserEquipment {
    int id = 0;
    Point2D position;
    int serving_bs = 0;
    double qos_sinr = 2.83;  // linear SINR floor

    friend bool operator==(const UserEquipment&, const UserEquipment&) = default;
};

/// Geometry plus the frozen shadowing realization of one deployment.
///
/// `shadowing` holds raw N(0,1) draws indexed (bs, user); the channel
/// model scales them by zeta. The diagonal is zero and never read.
struct NetworkLayout {
    Region region;
    std::vector<BaseStation> stations;
    std::vector<UserEquipment> users;
    SquareMatrix shadowing;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return stations.size(); }
    bool empty() const noexcept { return stations.empty(); }

    friend bool operator==(const NetworkLayout&, const NetworkLayout&) = default;
};

struct DeploymentConfig {
    Region region;
    double lambda_bs = 120.0;  // base stations per km^2
    double ue_radius_m = 10.0;
    double qos_sinr = 2.83;

    void validate() const;

    friend bool operator==(const DeploymentConfig&, const DeploymentConfig&) = default;
};

/// Draws N ~ Poisson(lambda * area) stations uniformly over the region, one
/// user uniformly in the disc of radius ue_radius around each, and the N x N
/// shadowing matrix. An empty draw is a valid result.
NetworkLayout generate_layout(const DeploymentConfig& config, std::uint64_t seed);

/// Builds a layout from explicit station positions. Users are placed and
/// shadowing is drawn from `seed` exactly as in generate_layout.
NetworkLayout layout_from_stations(const Region& region, std::vector<Point2D> stations,
                                   double ue_radius_m, double qos_sinr, std::uint64_t seed);

/// Uniform point in the disc (area-uniform, not radius-uniform).
Point2D uniform_in_disc(Point2D center, double radius, Rng& rng);

}  // namespace mmson

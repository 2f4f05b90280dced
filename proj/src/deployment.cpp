#include "mmson/deployment.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "mmson/errors.hpp"

namespace mmson {

void DeploymentConfig::validate() const {
    if (!(region.width_m > 0.0) || !(region.height_m > 0.0) || !std::isfinite(region.area_m2()))
        throw ConfigError("deployment: region must have positive finite area");
    if (!(lambda_bs > 0.0) || !std::isfinite(lambda_bs))
        throw ConfigError("deployment: lambda_bs must be > 0");
    if (!(ue_radius_m >= 0.0) || !std::isfinite(ue_radius_m))
        throw ConfigError("deployment: ue_radius_m must be >= 0");
    if (!(qos_sinr > 0.0)) throw ConfigError("deployment: qos_sinr must be > 0");
}

Point2D uniform_in_disc(Point2D center, double radius, Rng& rng) {
    const double r = radius * std::sqrt(uniform01(rng));
    const double theta = 2.0 * std::numbers::pi * uniform01(rng);
    return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

NetworkLayout layout_from_stations(const Region& region, std::vector<Point2D> positions, double ue_radius_m,
                                   double qos_sinr, std::uint64_t seed) {
    NetworkLayout layout;
    layout.region = region;
    layout.seed = seed;
    const std::size_t n = positions.size();

    Rng rng(derive_seed(seed, {0x75e5}));
    layout.stations.reserve(n);
    layout.users.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int id = static_cast<int>(i);
        layout.stations.push_back({id, positions[i]});
        layout.users.push_back({id, uniform_in_disc(positions[i], ue_radius_m, rng), id, qos_sinr});
    }

    Rng shadow_rng(derive_seed(seed, {0x5ad0}));
    std::normal_distribution<double> normal(0.0, 1.0);
    layout.shadowing = SquareMatrix(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            if (i != k) layout.shadowing(i, k) = normal(shadow_rng);
    return layout;
}

NetworkLayout generate_layout(const DeploymentConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(derive_seed(seed, {0xb5}));
    std::poisson_distribution<int> count(config.lambda_bs * config.region.area_km2());
    const int n = count(rng);

    std::vector<Point2D> positions;
    positions.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = uniform(rng, 0.0, config.region.width_m);
        const double y = uniform(rng, 0.0, config.region.height_m);
        positions.push_back({x, y});
    }
    return layout_from_stations(config.region, std::move(positions), config.ue_radius_m, config.qos_sinr, seed);
}

}  // namespace mmson

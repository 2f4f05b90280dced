#include "mmson/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mmson/errors.hpp"

namespace mmson {

void ChannelParams::validate() const {
    if (!(carrier_freq_hz > 0.0)) throw ConfigError("channel: carrier_freq_hz must be > 0");
    if (!(beta2 > 0.0)) throw ConfigError("channel: beta2 must be > 0");
    if (!(zeta_db >= 0.0)) throw ConfigError("channel: zeta_db must be >= 0");
    if (!(p_min_dbm < p_max_dbm)) throw ConfigError("channel: p_min_dbm must be < p_max_dbm");
    if (!std::isfinite(noise_power_dbm) || !std::isfinite(beta1_db))
        throw ConfigError("channel: noise_power_dbm and beta1_db must be finite");
}

double pathloss_friis_db(double distance_m, double carrier_freq_hz) {
    const double d = std::max(distance_m, kMinLinkDistance);
    return 20.0 * std::log10(4.0 * std::numbers::pi * d * carrier_freq_hz / kSpeedOfLight);
}

double pathloss_nlos_db(double distance_m, const ChannelParams& params, double shadow_std_normal) {
    const double d = std::max(distance_m, kMinLinkDistance);
    return params.beta1_db + 10.0 * params.beta2 * std::log10(d) + params.zeta_db * shadow_std_normal;
}

std::vector<double> PowerVector::to_mw() const {
    std::vector<double> mw(p_dbm.size());
    std::transform(p_dbm.begin(), p_dbm.end(), mw.begin(), dbm_to_mw);
    return mw;
}

bool PowerVector::within(const ChannelParams& params) const noexcept {
    return std::all_of(p_dbm.begin(), p_dbm.end(),
                       [&](double p) { return p >= params.p_min_dbm && p <= params.p_max_dbm; });
}

GainMatrix build_gain_matrix(const NetworkLayout& layout, const ChannelParams& params) {
    return build_gain_matrix(layout, params, SquareMatrix(layout.size(), 1.0));
}

GainMatrix build_gain_matrix(const NetworkLayout& layout, const ChannelParams& params,
                             const SquareMatrix& path_gain) {
    if (layout.empty()) throw EmptyNetworkError();
    params.validate();
    const std::size_t n = layout.size();
    if (path_gain.size() != n) throw ConfigError("channel: path gain table does not match layout size");

    SquareMatrix h(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double d = distance(layout.stations[i].position, layout.users[k].position);
            const double loss_db = i == k ? pathloss_friis_db(d, params.carrier_freq_hz)
                                          : pathloss_nlos_db(d, params, layout.shadowing(i, k));
            h(i, k) = std::pow(10.0, -loss_db / 10.0) * path_gain(i, k);
        }
    }
    return GainMatrix(std::move(h));
}

double interference_mw(int user, std::span<const double> powers_mw, const GainMatrix& gains,
                       std::span<const int> interferers) {
    const auto k = static_cast<std::size_t>(user);
    double total = 0.0;
    for (int i : interferers) {
        if (i == user) continue;
        total += powers_mw[static_cast<std::size_t>(i)] * gains(static_cast<std::size_t>(i), k);
    }
    return total;
}

double sinr_linear(int user, std::span<const double> powers_mw, const GainMatrix& gains,
                   std::span<const int> interferers, double noise_mw) {
    if (gains.empty()) throw Error("sinr: empty gain matrix");
    const auto k = static_cast<std::size_t>(user);
    const double signal = powers_mw[k] * gains(k, k);
    return signal / (interference_mw(user, powers_mw, gains, interferers) + noise_mw);
}

double sinr(int user, const PowerVector& powers, const GainMatrix& gains, std::span<const int> interferers,
            double noise_dbm) {
    const auto mw = powers.to_mw();
    return sinr_linear(user, mw, gains, interferers, dbm_to_mw(noise_dbm));
}

}  // namespace mmson

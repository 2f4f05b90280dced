#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mmson/deployment.hpp"
#include "mmson/geometry.hpp"

namespace mmson {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kMinLinkDistance = 1.0;         // m, clamp before any log

struct ChannelParams {
    double carrier_freq_hz = 28e9;
    double beta1_db = 72.0;
    double beta2 = 2.92;
    double zeta_db = 8.7;
    double noise_power_dbm = -120.0;
    double p_min_dbm = -10.0;
    double p_max_dbm = 35.0;

    void validate() const;

    friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

inline double dbm_to_mw(double dbm) noexcept { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) noexcept { return 10.0 * std::log10(mw); }
inline double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) noexcept { return 10.0 * std::log10(x); }

/// Free-space loss 20 log10(4 pi d f / c); d is clamped to 1 m.
double pathloss_friis_db(double distance_m, double carrier_freq_hz);

/// NLOS loss beta1 + 10 beta2 log10(d) + zeta * shadow; d is clamped to 1 m.
double pathloss_nlos_db(double distance_m, const ChannelParams& params, double shadow_std_normal);

/// Linear gains H(i, k) from BS i to user k. Slow fading: built once per run.
class GainMatrix {
public:
    GainMatrix() = default;
    explicit GainMatrix(SquareMatrix h) : h_(std::move(h)) {}

    std::size_t size() const noexcept { return h_.size(); }
    bool empty() const noexcept { return h_.empty(); }
    double operator()(std::size_t bs, std::size_t user) const noexcept { return h_(bs, user); }
    const SquareMatrix& matrix() const noexcept { return h_; }

    friend bool operator==(const GainMatrix&, const GainMatrix&) = default;

private:
    SquareMatrix h_;
};

/// Transmit powers in dBm, one per BS.
struct PowerVector {
    std::vector<double> p_dbm;

    std::size_t size() const noexcept { return p_dbm.size(); }
    std::vector<double> to_mw() const;
    bool within(const ChannelParams& params) const noexcept;

    friend bool operator==(const PowerVector&, const PowerVector&) = default;
};

/// Serving links use Friis, interferer links use the NLOS model with the
/// layout's frozen shadowing draw. Path gain is 1 on every link.
GainMatrix build_gain_matrix(const NetworkLayout& layout, const ChannelParams& params);

/// Same, with an explicit constant per-link path gain table g(i, k).
GainMatrix build_gain_matrix(const NetworkLayout& layout, const ChannelParams& params,
                             const SquareMatrix& path_gain);

/// SINR at user k with all quantities in linear milliwatts.
double sinr_linear(int user, std::span<const double> powers_mw, const GainMatrix& gains,
                   std::span<const int> interferers, double noise_mw);

/// SINR at user k from dBm powers and noise.
double sinr(int user, const PowerVector& powers, const GainMatrix& gains,
            std::span<const int> interferers, double noise_dbm);

/// Interference power (mW) at user k from the given BSs.
double interference_mw(int user, std::span<const double> powers_mw, const GainMatrix& gains,
                       std::span<const int> interferers);

/// Normalized capacity log2(1 + SINR), bits/s/Hz.
inline double capacity(double sinr_linear) noexcept { return std::log2(1.0 + sinr_linear); }

}  // namespace mmson

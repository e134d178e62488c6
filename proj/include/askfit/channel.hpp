#pragma once
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "distfit.hpp"
#include "errors.hpp"

// Deterministic seeded simulation of the end-to-end link: apriori-weighted
// bit source, ASK intensity modulation, Rayleigh-fading fiber propagation
// with attenuation and additive circuit noise.
//
// Received sample per transmitted level x:
//     y = max(0, a * x * r + n_c)
// where a = 10^(-attenuation_db_per_km * (fiber_length_m/1000) / 10),
// r = (1 - fading_depth) + fading_depth * R with R a unit-mean Rayleigh draw
// (scale sqrt(2/pi), so E[r] = 1 for every depth), and n_c is zero-mean
// Gaussian with standard deviation noise_sigma. fading_depth = 1 is the full
// Rayleigh-scattering model; fading_depth = 0 is the diagnostic fading-off
// mode (r == 1 exactly).

namespace askfit {

struct LinkConfig {
    double p1 = 0.5;                     // apriori probability of bit 1, in (0,1)
    double level0 = 10.0;                // transmit intensity of bit 0, >= 0 (duty-cycle units)
    double level1 = 60.0;                // transmit intensity of bit 1, > level0
    std::uint64_t n_bits = 10000;        // >= 1
    double fiber_length_m = 2.0;         // >= 0
    double attenuation_db_per_km = 0.0;  // >= 0
    double noise_sigma = 8.0;            // >= 0, intensity units (calibrated default)
    double fading_depth = 1.0;           // in [0,1]; 1 = full Rayleigh fading
    std::uint64_t rng_seed = 1;
};

struct TransmissionRecord {
    std::vector<std::uint8_t> bits; // ground truth x
    std::vector<double> tx_levels;  // modulated intensities
    SampleVector rx_samples;        // received photo-voltages y, all >= 0
};

inline void validate_link_config(const LinkConfig& config) {
    if (!(config.p1 > 0.0 && config.p1 < 1.0))
        throw validation_error("p1 must be in (0,1)");
    if (!(config.level0 >= 0.0))
        throw validation_error("level0 must be >= 0");
    if (!(config.level1 > config.level0))
        throw validation_error("level1 must be > level0");
    if (config.n_bits < 1)
        throw validation_error("n_bits must be >= 1");
    if (!(config.fiber_length_m >= 0.0))
        throw validation_error("fiber_length_m must be >= 0");
    if (!(config.attenuation_db_per_km >= 0.0))
        throw validation_error("attenuation_db_per_km must be >= 0");
    if (!(config.noise_sigma >= 0.0))
        throw validation_error("noise_sigma must be >= 0");
    if (!(config.fading_depth >= 0.0 && config.fading_depth <= 1.0))
        throw validation_error("fading_depth must be in [0,1]");
}

namespace detail {

inline constexpr double kUnitMeanRayleighScale = 0.79788456080286535588; // sqrt(2/pi)

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Uniform in [0, 1), 53-bit resolution; never returns 1, so log1p(-u) below
// is always finite.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace detail

// Documented seed-splitting rule: sub-stream k of a seed is
// splitmix64(seed ^ (k+1) * golden_gamma). Stream 0 drives the bit source,
// stream 1 the channel; trial t of a sweep uses stream 2 + t as its seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_index) {
    return detail::splitmix64(seed ^ ((stream_index + 1) * 0x9E3779B97F4A7C15ULL));
}

inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index) {
    return derive_seed(base_seed, 2 + trial_index);
}

inline std::vector<std::uint8_t> generate_bits(double p1, std::uint64_t n,
                                               std::mt19937_64& rng) {
    if (!(p1 > 0.0 && p1 < 1.0)) throw domain_error("generate_bits: p1 must be in (0,1)");
    std::vector<std::uint8_t> bits;
    bits.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i)
        bits.push_back(detail::uniform01(rng) < p1 ? 1 : 0);
    return bits;
}

inline std::vector<double> modulate(const std::vector<std::uint8_t>& bits, double level0,
                                    double level1) {
    if (!(level0 >= 0.0) || !(level1 > level0))
        throw domain_error("modulate: need level1 > level0 >= 0");
    std::vector<double> levels;
    levels.reserve(bits.size());
    for (std::uint8_t b : bits) levels.push_back(b ? level1 : level0);
    return levels;
}

// Deterministic linear gain of the fiber (dB/km over the configured length).
inline double attenuation_gain(const LinkConfig& config) {
    return std::pow(10.0, -config.attenuation_db_per_km * (config.fiber_length_m / 1000.0) / 10.0);
}

// Consumes exactly 3 uniforms per bit (fading, two for the Gaussian draw)
// regardless of fading_depth or noise_sigma, so the stream layout is stable
// across diagnostic modes.
inline SampleVector propagate(const std::vector<double>& tx_levels, const LinkConfig& config,
                              std::mt19937_64& rng) {
    validate_link_config(config);
    const double a = attenuation_gain(config);
    const double w = config.fading_depth;
    SampleVector rx;
    rx.reserve(tx_levels.size());
    for (double x : tx_levels) {
        const double u_fading = detail::uniform01(rng);
        const double u_gauss1 = detail::uniform01(rng);
        const double u_gauss2 = detail::uniform01(rng);
        const double rayleigh_draw =
            detail::kUnitMeanRayleighScale * std::sqrt(-2.0 * std::log1p(-u_fading));
        const double r = (1.0 - w) + w * rayleigh_draw;
        const double gauss =
            std::sqrt(-2.0 * std::log1p(-u_gauss1)) * std::cos(2.0 * detail::kPi * u_gauss2);
        const double y = a * x * r + config.noise_sigma * gauss;
        rx.push_back(y > 0.0 ? y : 0.0);
    }
    return rx;
}

// generate_bits -> modulate -> propagate with RNG streams derived from
// rng_seed; fully deterministic given the config.
inline TransmissionRecord transmit(const LinkConfig& config) {
    validate_link_config(config);
    std::mt19937_64 bit_rng(derive_seed(config.rng_seed, 0));
    std::mt19937_64 channel_rng(derive_seed(config.rng_seed, 1));
    TransmissionRecord record;
    record.bits = generate_bits(config.p1, config.n_bits, bit_rng);
    record.tx_levels = modulate(record.bits, config.level0, config.level1);
    record.rx_samples = propagate(record.tx_levels, config, channel_rng);
    return record;
}

} // namespace askfit

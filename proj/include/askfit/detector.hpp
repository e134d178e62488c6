#pragma once
#include <cmath>
#include <cstdint>
#include <vector>

#include "distfit.hpp"
#include "errors.hpp"

// Decision-threshold construction (tau = sigma + epsilon and the classical
// baselines) and the binary detection rule x̂ = 1 iff y >= tau.

namespace askfit {

struct Threshold {
    double sigma = 0.0;   // fitted Rayleigh scale, > 0
    double epsilon = 0.0; // optimization offset, >= 0
    double tau = 0.0;     // decision threshold; tau = sigma + epsilon exactly
};

using DetectedBits = std::vector<std::uint8_t>;

inline Threshold compute_threshold(double sigma, double epsilon) {
    if (!(sigma > 0.0)) throw domain_error("compute_threshold: sigma must be > 0");
    if (!(epsilon >= 0.0)) throw domain_error("compute_threshold: epsilon must be >= 0");
    return Threshold{sigma, epsilon, sigma + epsilon};
}

// Boundary inclusive: y == tau decodes as 1.
inline std::uint8_t detect_bit(double y, const Threshold& threshold) {
    if (!(y >= 0.0)) throw domain_error("detect_bit: y must be >= 0");
    return y >= threshold.tau ? 1 : 0;
}

inline DetectedBits detect_stream(const SampleVector& samples, const Threshold& threshold) {
    DetectedBits bits;
    bits.reserve(samples.size());
    for (double y : samples) bits.push_back(detect_bit(y, threshold));
    return bits;
}

// sigma from the closed-form Rayleigh MLE on the pooled samples (both symbols
// mixed), then tau = sigma + epsilon.
inline Threshold adapt_threshold(const SampleVector& samples, double epsilon) {
    return compute_threshold(estimate_rayleigh_scale(samples).sigma, epsilon);
}

// Classical baseline: the optimum threshold for equal-variance symbols lies
// midway between the two levels.
inline double baseline_midpoint_threshold(double level0, double level1) {
    if (!(level0 >= 0.0) || !(level1 > level0))
        throw domain_error("baseline_midpoint_threshold: need level1 > level0 >= 0");
    return 0.5 * (level0 + level1);
}

// Baseline from per-symbol training data: midpoint of the two empirical means.
inline double baseline_mean_threshold(const SampleVector& samples0,
                                      const SampleVector& samples1) {
    if (samples0.empty() || samples1.empty())
        throw domain_error("baseline_mean_threshold: both sample vectors must be nonempty");
    long double a = 0.0L, b = 0.0L;
    for (double y : samples0) a += y;
    for (double y : samples1) b += y;
    return 0.5 * (static_cast<double>(a / samples0.size()) +
                  static_cast<double>(b / samples1.size()));
}

// Empirical epsilon selection: the grid value minimizing the BER of
// adapt_threshold + detect_stream against the known truth; ties break to the
// smallest epsilon. sigma is fitted once (epsilon does not enter the fit).
inline double tune_epsilon(const SampleVector& samples, const DetectedBits& truth,
                           const std::vector<double>& grid) {
    if (samples.size() != truth.size())
        throw domain_error("tune_epsilon: samples and truth must have equal length");
    if (grid.empty()) throw domain_error("tune_epsilon: grid must be nonempty");
    const double sigma = estimate_rayleigh_scale(samples).sigma;
    bool have_best = false;
    double best_epsilon = 0.0;
    std::uint64_t best_errors = 0;
    for (double epsilon : grid) {
        const Threshold threshold = compute_threshold(sigma, epsilon);
        std::uint64_t errors = 0;
        for (std::size_t i = 0; i < samples.size(); ++i)
            errors += (detect_bit(samples[i], threshold) != truth[i]) ? 1u : 0u;
        if (!have_best || errors < best_errors ||
            (errors == best_errors && epsilon < best_epsilon)) {
            have_best = true;
            best_errors = errors;
            best_epsilon = epsilon;
        }
    }
    return best_epsilon;
}

} // namespace askfit

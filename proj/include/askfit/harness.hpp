#pragma once
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "channel.hpp"
#include "detector.hpp"
#include "errors.hpp"

// Experiment orchestration: BER evaluation, epsilon sweeps, level-separation
// sweeps, and histogram extraction. Trials derive sub-seeds via trial_seed,
// so every row regenerates exactly from its recorded seeds; the per-trial
// seeds are shared across grid cells (common random numbers).

namespace askfit {

struct BerReport {
    std::uint64_t n_bits = 0;
    std::uint64_t n_errors = 0;
    double ber = 0.0; // n_errors / n_bits exactly
    Threshold threshold_used;
    LinkConfig config_echo;
};

struct SweepRow {
    double separation = 0.0;
    double p1 = 0.0;
    double epsilon = 0.0;
    std::uint32_t trials = 0;
    double mean_ber = 0.0;
    std::vector<std::uint64_t> seed_list; // per-trial derived seeds, in trial order
};

struct SweepTable {
    std::vector<SweepRow> rows;
};

enum class EpsilonPolicy { fixed, tuned };

struct HistogramSpec {
    double bin_width = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct Histogram {
    HistogramSpec spec;
    std::vector<std::uint64_t> counts; // half-open bins [min + i*w, min + (i+1)*w)
    std::uint64_t out_of_range = 0;    // samples below min or at/after the last edge
    double tau = 0.0;                  // threshold marker for plotting
};

inline BerReport evaluate_ber(const std::vector<std::uint8_t>& truth,
                              const DetectedBits& detected) {
    if (truth.size() != detected.size())
        throw domain_error("evaluate_ber: truth and detected must have equal length");
    if (truth.empty()) throw domain_error("evaluate_ber: need at least one bit");
    BerReport report;
    report.n_bits = truth.size();
    for (std::size_t i = 0; i < truth.size(); ++i)
        report.n_errors += (truth[i] != detected[i]) ? 1u : 0u;
    report.ber = static_cast<double>(report.n_errors) / static_cast<double>(report.n_bits);
    return report;
}

// One self-adaptive trial: the threshold is fitted on the same pooled
// received block it detects (no training split).
inline BerReport run_trial(const LinkConfig& config, double epsilon) {
    const TransmissionRecord record = transmit(config);
    const Threshold threshold = adapt_threshold(record.rx_samples, epsilon);
    const DetectedBits detected = detect_stream(record.rx_samples, threshold);
    BerReport report = evaluate_ber(record.bits, detected);
    report.threshold_used = threshold;
    report.config_echo = config;
    return report;
}

// Default grid for empirical epsilon tuning: 0..30 step 1.
inline std::vector<double> default_epsilon_grid() {
    std::vector<double> grid;
    for (int e = 0; e <= 30; ++e) grid.push_back(static_cast<double>(e));
    return grid;
}

namespace detail {

inline SweepRow mean_ber_row(const LinkConfig& config, double epsilon, std::uint32_t trials) {
    SweepRow row;
    row.separation = config.level1 - config.level0;
    row.p1 = config.p1;
    row.epsilon = epsilon;
    row.trials = trials;
    long double acc = 0.0L;
    for (std::uint32_t t = 0; t < trials; ++t) {
        LinkConfig trial_config = config;
        trial_config.rng_seed = trial_seed(config.rng_seed, t);
        row.seed_list.push_back(trial_config.rng_seed);
        acc += run_trial(trial_config, epsilon).ber;
    }
    row.mean_ber = static_cast<double>(acc / trials);
    return row;
}

} // namespace detail

// Mean BER per epsilon over seeded trials; one row per grid value.
inline SweepTable sweep_epsilon(const LinkConfig& config, const std::vector<double>& epsilons,
                                std::uint32_t trials) {
    validate_link_config(config);
    if (epsilons.empty()) throw domain_error("sweep_epsilon: epsilon grid must be nonempty");
    if (trials < 1) throw domain_error("sweep_epsilon: trials must be >= 1");
    SweepTable table;
    for (double epsilon : epsilons)
        table.rows.push_back(detail::mean_ber_row(config, epsilon, trials));
    return table;
}

// Grid over separation x apriori; level1 = level0 + separation. With the
// tuned policy, each cell tunes epsilon once on a dedicated run (sub-seed
// index = trials, one past the last trial) and holds it for all trials.
inline SweepTable sweep_separation(const LinkConfig& base, const std::vector<double>& separations,
                                   const std::vector<double>& apriori_list,
                                   EpsilonPolicy policy, double fixed_epsilon,
                                   std::uint32_t trials,
                                   const std::vector<double>& tune_grid = default_epsilon_grid()) {
    validate_link_config(base);
    if (separations.empty()) throw domain_error("sweep_separation: separations must be nonempty");
    double previous = 0.0;
    for (double sep : separations) {
        if (!(sep > previous))
            throw domain_error("sweep_separation: separations must be positive ascending");
        previous = sep;
    }
    if (apriori_list.empty()) throw domain_error("sweep_separation: apriori list must be nonempty");
    if (trials < 1) throw domain_error("sweep_separation: trials must be >= 1");

    SweepTable table;
    for (double separation : separations) {
        for (double p1 : apriori_list) {
            LinkConfig config = base;
            config.level1 = base.level0 + separation;
            config.p1 = p1;
            validate_link_config(config);
            double epsilon = fixed_epsilon;
            if (policy == EpsilonPolicy::tuned) {
                LinkConfig tune_config = config;
                tune_config.rng_seed = trial_seed(base.rng_seed, trials);
                const TransmissionRecord record = transmit(tune_config);
                epsilon = tune_epsilon(record.rx_samples, record.bits, tune_grid);
            }
            table.rows.push_back(detail::mean_ber_row(config, epsilon, trials));
        }
    }
    return table;
}

// Spec with the default bin width (max - min) / 60 over the data range; falls
// back to width 1 when all samples coincide.
inline HistogramSpec default_histogram_spec(const SampleVector& samples) {
    if (samples.empty()) throw domain_error("default_histogram_spec: empty samples");
    double lo = samples.front(), hi = samples.front();
    for (double y : samples) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    const double width = hi > lo ? (hi - lo) / 60.0 : 1.0;
    return HistogramSpec{width, lo, hi > lo ? hi : lo + width};
}

inline Histogram histogram(const SampleVector& samples, const HistogramSpec& spec,
                           const Threshold& threshold) {
    if (!(spec.bin_width > 0.0)) throw domain_error("histogram: bin_width must be > 0");
    if (!(spec.max > spec.min)) throw domain_error("histogram: need max > min");
    const auto n_bins =
        static_cast<std::size_t>(std::ceil((spec.max - spec.min) / spec.bin_width));
    Histogram h;
    h.spec = spec;
    h.counts.assign(n_bins, 0);
    h.tau = threshold.tau;
    for (double y : samples) {
        if (y < spec.min) {
            ++h.out_of_range;
            continue;
        }
        const auto index = static_cast<std::size_t>((y - spec.min) / spec.bin_width);
        if (index < n_bins)
            ++h.counts[index];
        else
            ++h.out_of_range;
    }
    return h;
}

} // namespace askfit

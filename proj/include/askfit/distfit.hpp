#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "bessel.hpp"
#include "errors.hpp"

// Parametric amplitude distributions (Rayleigh, Rician), their maximum
// likelihood estimators, and BIC model selection over a received-sample
// vector. All operations are pure functions; safe for concurrent use.

namespace askfit {

// Received photo-voltages; every element must be >= 0.
using SampleVector = std::vector<double>;

enum class Family { rayleigh, rician };

inline const char* family_name(Family f) {
    return f == Family::rayleigh ? "rayleigh" : "rician";
}

struct RayleighParams {
    double sigma = 0.0; // scale, > 0
};

struct RicianParams {
    double sigma = 0.0; // scale, > 0
    double s = 0.0;     // non-centrality, >= 0; s = 0 reduces to Rayleigh(sigma)
};

struct FitDiagnostics {
    std::size_t dropped_zero_samples = 0;      // exact zeros excluded before fitting
    std::vector<std::string> skipped_families; // "family: reason" for estimators that raised
};

struct FitResult {
    Family family = Family::rayleigh;
    double sigma = 0.0;
    double s = 0.0; // 0 for the Rayleigh family
    double log_likelihood = 0.0;
    double bic = 0.0; // k*ln(n) - 2*log_likelihood, k = 1 (Rayleigh) or 2 (Rician)
    std::size_t n = 0; // sample count used in the fit
    FitDiagnostics diagnostics;
};

struct RicianFitOptions {
    int max_iter = 200;
    double tol = 1e-9; // relative parameter change per iteration
};

namespace detail {

inline void require_valid_rayleigh(const RayleighParams& p, const char* who) {
    if (!(p.sigma > 0.0)) throw domain_error(std::string(who) + ": sigma must be > 0");
}

inline void require_valid_rician(const RicianParams& p, const char* who) {
    if (!(p.sigma > 0.0)) throw domain_error(std::string(who) + ": sigma must be > 0");
    if (!(p.s >= 0.0)) throw domain_error(std::string(who) + ": s must be >= 0");
}

inline void require_nonnegative_samples(const SampleVector& samples, const char* who) {
    for (double y : samples)
        if (!(y >= 0.0)) throw domain_error(std::string(who) + ": samples must be >= 0");
}

struct Moments {
    double m1 = 0.0;   // mean of y
    double m2 = 0.0;   // mean of y^2
    bool all_equal = true;
};

inline Moments compute_moments(const SampleVector& samples) {
    Moments m;
    long double s1 = 0.0L, s2 = 0.0L;
    for (double y : samples) {
        s1 += y;
        s2 += static_cast<long double>(y) * y;
        if (y != samples.front()) m.all_equal = false;
    }
    const auto n = static_cast<long double>(samples.size());
    m.m1 = static_cast<double>(s1 / n);
    m.m2 = static_cast<double>(s2 / n);
    return m;
}

// mean^2 / E[y^2] of a Rician with theta = s^2 / (2 sigma^2). Monotone
// increasing from pi/4 at theta = 0 toward 1; used to invert the
// method-of-moments initialization. Evaluated with scaled Bessel factors so
// it is stable for any theta.
inline double rician_moment_ratio(double theta) {
    const double half = 0.5 * theta;
    const double g = (1.0 + theta) * bessel_i0e(half) + theta * bessel_i1e(half);
    return 0.25 * kPi * g * g / (1.0 + theta);
}

} // namespace detail

// Density (y/sigma^2) exp(-y^2 / (2 sigma^2)); 0 at y = 0.
inline double rayleigh_pdf(double y, const RayleighParams& p) {
    detail::require_valid_rayleigh(p, "rayleigh_pdf");
    if (!(y >= 0.0)) throw domain_error("rayleigh_pdf: y must be >= 0");
    const double v = p.sigma * p.sigma;
    return (y / v) * std::exp(-y * y / (2.0 * v));
}

// ln of rayleigh_pdf; -inf at y = 0 (density vanishes at the origin).
inline double log_rayleigh_pdf(double y, const RayleighParams& p) {
    detail::require_valid_rayleigh(p, "log_rayleigh_pdf");
    if (!(y >= 0.0)) throw domain_error("log_rayleigh_pdf: y must be >= 0");
    if (y == 0.0) return -std::numeric_limits<double>::infinity();
    const double v = p.sigma * p.sigma;
    return std::log(y) - std::log(v) - y * y / (2.0 * v);
}

// ln of the Rician density; computed in the log domain so large y*s/sigma^2
// cannot overflow. -inf at y = 0.
inline double log_rician_pdf(double y, const RicianParams& p) {
    detail::require_valid_rician(p, "log_rician_pdf");
    if (!(y >= 0.0)) throw domain_error("log_rician_pdf: y must be >= 0");
    if (y == 0.0) return -std::numeric_limits<double>::infinity();
    const double v = p.sigma * p.sigma;
    return std::log(y) - std::log(v) - (y * y + p.s * p.s) / (2.0 * v) +
           log_bessel_i0(y * p.s / v);
}

// (y/sigma^2) exp(-(y^2 + s^2) / (2 sigma^2)) I0(y s / sigma^2); equals
// rayleigh_pdf at s = 0.
inline double rician_pdf(double y, const RicianParams& p) {
    detail::require_valid_rician(p, "rician_pdf");
    if (!(y >= 0.0)) throw domain_error("rician_pdf: y must be >= 0");
    if (y == 0.0) return 0.0;
    return std::exp(log_rician_pdf(y, p));
}

// Closed-form MLE of the Rayleigh scale: sigma = sqrt(sum y_i^2 / (2n)).
inline RayleighParams estimate_rayleigh_scale(const SampleVector& samples) {
    if (samples.empty())
        throw degenerate_data_error("estimate_rayleigh_scale: empty sample vector");
    detail::require_nonnegative_samples(samples, "estimate_rayleigh_scale");
    long double s2 = 0.0L;
    for (double y : samples) s2 += static_cast<long double>(y) * y;
    const double sigma =
        static_cast<double>(std::sqrt(s2 / (2.0L * static_cast<long double>(samples.size()))));
    if (!(sigma > 0.0))
        throw degenerate_data_error("estimate_rayleigh_scale: all samples are zero");
    return RayleighParams{sigma};
}

// Rician MLE: method-of-moments initialization from the sample mean and
// variance, refined by EM-style likelihood ascent
//     s'      = (1/n) sum y_i (I1/I0)(y_i s / sigma^2)
//     sigma'^2 = (m2 - 2 s s' + s^2) / 2
// until the relative parameter change drops below tol or max_iter is hit.
// If the moment equations imply s^2 < 0 (sample mean^2/mean-square at or
// below the Rayleigh value pi/4), returns s = 0 with sigma from the
// closed-form Rayleigh MLE.
inline RicianParams estimate_rician_params(const SampleVector& samples,
                                           const RicianFitOptions& options = {}) {
    if (samples.size() < 2)
        throw degenerate_data_error("estimate_rician_params: need at least 2 samples");
    detail::require_nonnegative_samples(samples, "estimate_rician_params");
    const detail::Moments m = detail::compute_moments(samples);
    if (m.all_equal || !(m.m2 > 0.0))
        throw degenerate_data_error(
            "estimate_rician_params: zero sample variance breaks moment initialization");

    const double sigma_rayleigh = std::sqrt(0.5 * m.m2);
    const double rho = m.m1 * m.m1 / m.m2;
    if (rho <= 0.25 * detail::kPi) return RicianParams{sigma_rayleigh, 0.0};

    // Invert the monotone moment ratio for theta = s^2 / (2 sigma^2).
    double lo = 0.0, hi = 1.0;
    while (detail::rician_moment_ratio(hi) < rho && hi < 1e12) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (detail::rician_moment_ratio(mid) < rho ? lo : hi) = mid;
    }
    const double theta = 0.5 * (lo + hi);
    double v = m.m2 / (2.0 * (1.0 + theta));
    double s = std::sqrt(2.0 * v * theta);
    double sigma = std::sqrt(v);

    const auto n = static_cast<long double>(samples.size());
    for (int iter = 0; iter < options.max_iter; ++iter) {
        long double acc = 0.0L;
        const double inv_v = 1.0 / v;
        for (double y : samples) acc += y * bessel_i1_over_i0(y * s * inv_v);
        const double s_new = static_cast<double>(acc / n);
        const double v_new = 0.5 * (m.m2 - 2.0 * s * s_new + s * s);
        const double sigma_new = std::sqrt(v_new);
        const double change = std::max(std::fabs(s_new - s), std::fabs(sigma_new - sigma));
        const double scale = std::max(sigma_new, s_new);
        s = s_new;
        v = v_new;
        sigma = sigma_new;
        if (s < 1e-10 * sigma) return RicianParams{sigma_rayleigh, 0.0}; // boundary reached
        if (change <= options.tol * scale) return RicianParams{sigma, s};
    }
    throw non_convergence_error("estimate_rician_params: no convergence within " +
                                std::to_string(options.max_iter) + " iterations");
}

// Sum of log densities. Samples with zero density (y = 0) contribute -inf;
// the result is then the -inf sentinel, never a NaN.
inline double log_likelihood(const RayleighParams& p, const SampleVector& samples) {
    detail::require_valid_rayleigh(p, "log_likelihood");
    long double acc = 0.0L;
    for (double y : samples) {
        const double t = log_rayleigh_pdf(y, p);
        if (t == -std::numeric_limits<double>::infinity())
            return -std::numeric_limits<double>::infinity();
        acc += t;
    }
    return static_cast<double>(acc);
}

inline double log_likelihood(const RicianParams& p, const SampleVector& samples) {
    detail::require_valid_rician(p, "log_likelihood");
    long double acc = 0.0L;
    for (double y : samples) {
        const double t = log_rician_pdf(y, p);
        if (t == -std::numeric_limits<double>::infinity())
            return -std::numeric_limits<double>::infinity();
        acc += t;
    }
    return static_cast<double>(acc);
}

inline double log_likelihood(Family family, double sigma, double s,
                             const SampleVector& samples) {
    if (family == Family::rayleigh) return log_likelihood(RayleighParams{sigma}, samples);
    return log_likelihood(RicianParams{sigma, s}, samples);
}

// k ln(n) - 2 logL; lower is better.
inline double bic(double log_likelihood_value, int k, std::size_t n) {
    if (!std::isfinite(log_likelihood_value))
        throw domain_error("bic: log-likelihood must be finite");
    if (k < 1) throw domain_error("bic: k must be >= 1");
    if (n < 1) throw domain_error("bic: n must be >= 1");
    return static_cast<double>(k) * std::log(static_cast<double>(n)) -
           2.0 * log_likelihood_value;
}

// Fits each candidate family by its MLE and returns the minimum-BIC result;
// ties break toward fewer parameters (Rayleigh over Rician). Exact zeros
// carry zero density under both families, so they are excluded from the fit
// and counted in diagnostics (both BIC and n refer to the retained samples).
// Families whose estimator raises are skipped and recorded in diagnostics.
inline FitResult fit_best(const SampleVector& samples,
                          const std::vector<Family>& families = {Family::rayleigh,
                                                                 Family::rician}) {
    if (families.empty()) throw domain_error("fit_best: families must be nonempty");
    detail::require_nonnegative_samples(samples, "fit_best");

    SampleVector positive;
    positive.reserve(samples.size());
    for (double y : samples)
        if (y > 0.0) positive.push_back(y);
    const std::size_t dropped = samples.size() - positive.size();
    if (positive.empty())
        throw degenerate_data_error("fit_best: no positive samples to fit");

    FitDiagnostics diagnostics;
    diagnostics.dropped_zero_samples = dropped;

    bool have_best = false;
    FitResult best;
    auto consider = [&](Family family, double sigma, double s, int k) {
        const double ll = log_likelihood(family, sigma, s, positive);
        const double b = bic(ll, k, positive.size());
        if (!have_best || b < best.bic || (b == best.bic && k < (best.family == Family::rayleigh ? 1 : 2))) {
            best.family = family;
            best.sigma = sigma;
            best.s = s;
            best.log_likelihood = ll;
            best.bic = b;
            best.n = positive.size();
            have_best = true;
        }
    };

    for (Family family : families) {
        try {
            if (family == Family::rayleigh) {
                const RayleighParams p = estimate_rayleigh_scale(positive);
                consider(Family::rayleigh, p.sigma, 0.0, 1);
            } else {
                const RicianParams p = estimate_rician_params(positive);
                consider(Family::rician, p.sigma, p.s, 2);
            }
        } catch (const numerical_error& e) {
            diagnostics.skipped_families.push_back(std::string(family_name(family)) + ": " +
                                                   e.what());
        }
    }
    if (!have_best)
        throw degenerate_data_error("fit_best: every candidate family failed to fit");
    best.diagnostics = std::move(diagnostics);
    return best;
}

} // namespace askfit

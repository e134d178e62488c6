#pragma once
#include <array>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "harness.hpp"

// File formats and config parsing shared by the CLI and its tests. All
// formats are normative: flat key-value config, sample files (one decimal per
// line), TransmissionRecord CSV, sweep CSV, histogram CSV, and the one-line
// fit record. Floats are printed in shortest round-trip form, so re-parsing
// an emitted file reproduces the exact double values.

namespace askfit {

struct ExperimentParams {
    double epsilon = 0.0;
    std::vector<double> epsilon_grid = default_epsilon_grid();
    std::vector<double> separations = {30, 40, 50, 60, 70, 80};
    std::vector<double> aprioris = {0.5, 0.9, 0.3};
    std::uint32_t trials = 50;
    EpsilonPolicy epsilon_policy = EpsilonPolicy::fixed;
    double bin_width = 0.0; // 0 = auto: (max - min) / 60
    double bin_min = std::numeric_limits<double>::quiet_NaN(); // NaN = data min
    double bin_max = std::numeric_limits<double>::quiet_NaN(); // NaN = data max
};

struct ParsedConfig {
    LinkConfig link;
    ExperimentParams experiment;
};

struct ConfigKeyDoc {
    const char* key;
    const char* doc;
};

// Single source of truth for every accepted config key; the CLI help text
// enumerates exactly this list (doc-sync tested).
inline const std::vector<ConfigKeyDoc>& config_key_docs() {
    static const std::vector<ConfigKeyDoc> docs = {
        {"p1", "apriori probability of bit 1, in (0,1)"},
        {"level0", "transmit intensity of bit 0, >= 0"},
        {"level1", "transmit intensity of bit 1, > level0"},
        {"n_bits", "bits per simulated block, >= 1"},
        {"fiber_length_m", "fiber length in meters, >= 0"},
        {"attenuation_db_per_km", "fiber attenuation, >= 0"},
        {"noise_sigma", "additive circuit-noise std dev, >= 0"},
        {"fading_depth", "Rayleigh fading depth in [0,1]; 1 full fading, 0 off"},
        {"rng_seed", "64-bit unsigned seed"},
        {"epsilon", "threshold offset for single runs, >= 0"},
        {"epsilon_grid", "comma-separated tuning grid, each >= 0"},
        {"separations", "comma-separated level separations, positive ascending"},
        {"aprioris", "comma-separated p1 values for sweep-sep, each in (0,1)"},
        {"trials", "trials per sweep cell, >= 1"},
        {"epsilon_policy", "fixed | tuned (sweep-sep epsilon selection)"},
        {"bin_width", "histogram bin width; 0 = auto (range/60)"},
        {"bin_min", "histogram range start; omit for data min"},
        {"bin_max", "histogram range end; omit for data max"},
    };
    return docs;
}

namespace detail {

inline std::string_view trim(std::string_view text) {
    const char* ws = " \t\r\n";
    const auto begin = text.find_first_not_of(ws);
    if (begin == std::string_view::npos) return {};
    const auto end = text.find_last_not_of(ws);
    return text.substr(begin, end - begin + 1);
}

inline double parse_double_value(std::string_view key, std::string_view value) {
    const std::string token{trim(value)};
    if (token.empty()) throw parse_error("empty value for key '" + std::string(key) + "'");
    errno = 0;
    char* end = nullptr;
    const double parsed = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || errno == ERANGE || !std::isfinite(parsed))
        throw parse_error("invalid number '" + token + "' for key '" + std::string(key) + "'");
    return parsed;
}

inline std::uint64_t parse_u64_value(std::string_view key, std::string_view value) {
    const std::string token{trim(value)};
    std::uint64_t parsed = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), parsed);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw parse_error("invalid unsigned integer '" + token + "' for key '" +
                          std::string(key) + "'");
    return parsed;
}

inline std::vector<double> parse_double_list(std::string_view key, std::string_view value) {
    std::vector<double> values;
    std::string_view rest = value;
    while (true) {
        const auto comma = rest.find(',');
        values.push_back(parse_double_value(key, rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return values;
}

} // namespace detail

// Applies one `key = value` assignment; unknown keys are a hard error.
inline void apply_config_entry(ParsedConfig& config, std::string_view key,
                               std::string_view value) {
    const std::string k{detail::trim(key)};
    if (k == "p1") config.link.p1 = detail::parse_double_value(k, value);
    else if (k == "level0") config.link.level0 = detail::parse_double_value(k, value);
    else if (k == "level1") config.link.level1 = detail::parse_double_value(k, value);
    else if (k == "n_bits") config.link.n_bits = detail::parse_u64_value(k, value);
    else if (k == "fiber_length_m") config.link.fiber_length_m = detail::parse_double_value(k, value);
    else if (k == "attenuation_db_per_km")
        config.link.attenuation_db_per_km = detail::parse_double_value(k, value);
    else if (k == "noise_sigma") config.link.noise_sigma = detail::parse_double_value(k, value);
    else if (k == "fading_depth") config.link.fading_depth = detail::parse_double_value(k, value);
    else if (k == "rng_seed") config.link.rng_seed = detail::parse_u64_value(k, value);
    else if (k == "epsilon") config.experiment.epsilon = detail::parse_double_value(k, value);
    else if (k == "epsilon_grid")
        config.experiment.epsilon_grid = detail::parse_double_list(k, value);
    else if (k == "separations")
        config.experiment.separations = detail::parse_double_list(k, value);
    else if (k == "aprioris") config.experiment.aprioris = detail::parse_double_list(k, value);
    else if (k == "trials") {
        const std::uint64_t t = detail::parse_u64_value(k, value);
        config.experiment.trials = static_cast<std::uint32_t>(t);
        if (config.experiment.trials != t) throw parse_error("trials out of range");
    } else if (k == "epsilon_policy") {
        const std::string_view v = detail::trim(value);
        if (v == "fixed") config.experiment.epsilon_policy = EpsilonPolicy::fixed;
        else if (v == "tuned") config.experiment.epsilon_policy = EpsilonPolicy::tuned;
        else throw parse_error("epsilon_policy must be 'fixed' or 'tuned'");
    } else if (k == "bin_width") config.experiment.bin_width = detail::parse_double_value(k, value);
    else if (k == "bin_min") config.experiment.bin_min = detail::parse_double_value(k, value);
    else if (k == "bin_max") config.experiment.bin_max = detail::parse_double_value(k, value);
    else throw parse_error("unknown key '" + k + "'");
}

inline void validate_experiment_params(const ExperimentParams& experiment) {
    if (!(experiment.epsilon >= 0.0)) throw validation_error("epsilon must be >= 0");
    if (experiment.epsilon_grid.empty()) throw validation_error("epsilon_grid must be nonempty");
    for (double e : experiment.epsilon_grid)
        if (!(e >= 0.0)) throw validation_error("epsilon_grid entries must be >= 0");
    if (experiment.separations.empty()) throw validation_error("separations must be nonempty");
    double previous = 0.0;
    for (double s : experiment.separations) {
        if (!(s > previous)) throw validation_error("separations must be positive ascending");
        previous = s;
    }
    if (experiment.aprioris.empty()) throw validation_error("aprioris must be nonempty");
    for (double p : experiment.aprioris)
        if (!(p > 0.0 && p < 1.0)) throw validation_error("aprioris entries must be in (0,1)");
    if (experiment.trials < 1) throw validation_error("trials must be >= 1");
    if (!(experiment.bin_width >= 0.0)) throw validation_error("bin_width must be >= 0");
    const bool has_min = !std::isnan(experiment.bin_min);
    const bool has_max = !std::isnan(experiment.bin_max);
    if (has_min != has_max)
        throw validation_error("bin_min and bin_max must be given together");
    if (has_min && !(experiment.bin_max > experiment.bin_min))
        throw validation_error("bin_max must be > bin_min");
}

// Parses `key = value` lines ('#' comments and blank lines allowed), applies
// overrides after file values, then enforces every invariant.
inline ParsedConfig parse_config_text(std::string_view text,
                                      const std::vector<std::string>& overrides = {}) {
    ParsedConfig config;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        const auto newline = text.find('\n', line_start);
        const std::string_view raw = text.substr(
            line_start, newline == std::string_view::npos ? text.size() - line_start
                                                          : newline - line_start);
        const std::string_view line = detail::trim(raw);
        if (!line.empty() && line.front() != '#') {
            const auto equals = line.find('=');
            if (equals == std::string_view::npos)
                throw parse_error("expected 'key = value', got '" + std::string(line) + "'");
            apply_config_entry(config, line.substr(0, equals), line.substr(equals + 1));
        }
        if (newline == std::string_view::npos) break;
        line_start = newline + 1;
    }
    for (const std::string& entry : overrides) {
        const auto equals = entry.find('=');
        if (equals == std::string::npos)
            throw parse_error("override must be key=value, got '" + entry + "'");
        apply_config_entry(config, std::string_view(entry).substr(0, equals),
                           std::string_view(entry).substr(equals + 1));
    }
    validate_link_config(config.link);
    validate_experiment_params(config.experiment);
    return config;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline ParsedConfig parse_config(const std::string& path,
                                 const std::vector<std::string>& overrides = {}) {
    return parse_config_text(read_text_file(path), overrides);
}

// Shortest representation that round-trips to the exact double.
inline std::string format_double(double value) {
    std::array<char, 64> buffer{};
    const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    if (ec != std::errc{}) throw io_error("format_double failed");
    return std::string(buffer.data(), ptr);
}

inline SampleVector parse_samples_text(std::string_view text) {
    SampleVector samples;
    std::size_t line_start = 0;
    std::size_t line_number = 0;
    while (line_start <= text.size()) {
        const auto newline = text.find('\n', line_start);
        const std::string_view raw = text.substr(
            line_start, newline == std::string_view::npos ? text.size() - line_start
                                                          : newline - line_start);
        ++line_number;
        const std::string_view line = detail::trim(raw);
        if (!line.empty() && line.front() != '#')
            samples.push_back(
                detail::parse_double_value("sample line " + std::to_string(line_number), line));
        if (newline == std::string_view::npos) break;
        line_start = newline + 1;
    }
    return samples;
}

// One nonnegative decimal per line.
inline SampleVector read_samples_file(const std::string& path) {
    return parse_samples_text(read_text_file(path));
}

inline DetectedBits parse_bits_text(std::string_view text) {
    DetectedBits bits;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        const auto newline = text.find('\n', line_start);
        const std::string_view raw = text.substr(
            line_start, newline == std::string_view::npos ? text.size() - line_start
                                                          : newline - line_start);
        const std::string_view line = detail::trim(raw);
        if (!line.empty() && line.front() != '#') {
            if (line == "0") bits.push_back(0);
            else if (line == "1") bits.push_back(1);
            else throw parse_error("bit lines must be 0 or 1, got '" + std::string(line) + "'");
        }
        if (newline == std::string_view::npos) break;
        line_start = newline + 1;
    }
    return bits;
}

// One 0/1 per line, matching format_bits_file.
inline DetectedBits read_bits_file(const std::string& path) {
    return parse_bits_text(read_text_file(path));
}

inline std::string format_samples_file(const SampleVector& samples) {
    std::string out;
    for (double y : samples) {
        out += format_double(y);
        out += '\n';
    }
    return out;
}

// Header `index,bit,tx_level,rx_sample`, one row per transmitted bit.
inline std::string format_simulate_csv(const TransmissionRecord& record) {
    std::string out = "index,bit,tx_level,rx_sample\n";
    for (std::size_t i = 0; i < record.bits.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += record.bits[i] ? '1' : '0';
        out += ',';
        out += format_double(record.tx_levels[i]);
        out += ',';
        out += format_double(record.rx_samples[i]);
        out += '\n';
    }
    return out;
}

// Header `separation,p1,epsilon,trials,mean_ber,seed_list`; seed_list is
// semicolon-joined so the row stays a single CSV field.
inline std::string format_sweep_csv(const SweepTable& table) {
    std::string out = "separation,p1,epsilon,trials,mean_ber,seed_list\n";
    for (const SweepRow& row : table.rows) {
        out += format_double(row.separation);
        out += ',';
        out += format_double(row.p1);
        out += ',';
        out += format_double(row.epsilon);
        out += ',';
        out += std::to_string(row.trials);
        out += ',';
        out += format_double(row.mean_ber);
        out += ',';
        for (std::size_t i = 0; i < row.seed_list.size(); ++i) {
            if (i > 0) out += ';';
            out += std::to_string(row.seed_list[i]);
        }
        out += '\n';
    }
    return out;
}

// `# tau=<value>` comment, then header `bin_left,bin_right,count`.
inline std::string format_histogram_csv(const Histogram& h) {
    std::string out = "# tau=" + format_double(h.tau) + "\n";
    out += "bin_left,bin_right,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out += format_double(h.spec.min + static_cast<double>(i) * h.spec.bin_width);
        out += ',';
        out += format_double(h.spec.min + static_cast<double>(i + 1) * h.spec.bin_width);
        out += ',';
        out += std::to_string(h.counts[i]);
        out += '\n';
    }
    return out;
}

inline std::string format_bits_file(const DetectedBits& bits) {
    std::string out;
    for (std::uint8_t b : bits) {
        out += b ? '1' : '0';
        out += '\n';
    }
    return out;
}

// Single-line JSON-style record with the fixed field order.
inline std::string format_fit_record(const FitResult& fit) {
    std::string out = "{\"family\": \"";
    out += family_name(fit.family);
    out += "\", \"sigma\": ";
    out += format_double(fit.sigma);
    out += ", \"s\": ";
    out += format_double(fit.s);
    out += ", \"log_likelihood\": ";
    out += format_double(fit.log_likelihood);
    out += ", \"bic\": ";
    out += format_double(fit.bic);
    out += ", \"n\": ";
    out += std::to_string(fit.n);
    out += "}";
    return out;
}

// Writes to `<path>.tmp` then renames, so no output file is ever partial.
inline void atomic_write_file(const std::string& path, std::string_view content) {
    const std::string tmp_path = path + ".tmp";
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open '" + tmp_path + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            out.close();
            std::remove(tmp_path.c_str());
            throw io_error("failed writing '" + tmp_path + "'");
        }
    }
    if (std::rename(tmp_path.c_str(), path.c_str()) != 0) {
        std::remove(tmp_path.c_str());
        throw io_error("cannot rename '" + tmp_path + "' to '" + path + "'");
    }
}

} // namespace askfit

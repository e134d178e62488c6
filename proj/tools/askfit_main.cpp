#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "askfit/channel.hpp"
#include "askfit/detector.hpp"
#include "askfit/distfit.hpp"
#include "askfit/harness.hpp"
#include "askfit/io.hpp"

// askfit command-line front end. Every subcommand reads the same flat config
// (file, then --set overrides, then --seed) and writes output files
// atomically, so identical invocations produce byte-identical results.
//
// Exit statuses: 0 ok, 2 file I/O failure, 3 malformed config/input,
// 4 invalid configuration or argument value, 5 numerical failure.

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
};

void add_common_options(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "flat 'key = value' config file");
    cmd->add_option("--set", opts.sets, "config override key=value (repeatable, after file)");
    opts.seed_opt = cmd->add_option("--seed", opts.seed, "override rng_seed (applied last)");
}

askfit::ParsedConfig load_config(const CommonOpts& opts) {
    askfit::ParsedConfig config =
        opts.config_path.empty() ? askfit::parse_config_text("", opts.sets)
                                 : askfit::parse_config(opts.config_path, opts.sets);
    if (opts.seed_opt != nullptr && opts.seed_opt->count() > 0) config.link.rng_seed = opts.seed;
    return config;
}

std::string config_key_footer() {
    std::string footer = "Config keys (accepted in the config file and via --set):\n";
    for (const askfit::ConfigKeyDoc& doc : askfit::config_key_docs()) {
        footer += "  ";
        footer += doc.key;
        for (std::size_t pad = std::string(doc.key).size(); pad < 22; ++pad) footer += ' ';
        footer += doc.doc;
        footer += '\n';
    }
    return footer;
}

std::vector<askfit::Family> parse_families(const std::string& list) {
    std::vector<askfit::Family> families;
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto comma = list.find(',', start);
        const std::string_view token = askfit::detail::trim(
            std::string_view(list).substr(start, comma == std::string::npos ? list.size() - start
                                                                            : comma - start));
        if (token == "rayleigh") families.push_back(askfit::Family::rayleigh);
        else if (token == "rician") families.push_back(askfit::Family::rician);
        else throw askfit::parse_error("unknown family '" + std::string(token) + "'");
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return families;
}

void run_simulate(const CommonOpts& opts, const std::string& out_path) {
    const askfit::ParsedConfig config = load_config(opts);
    const askfit::TransmissionRecord record = askfit::transmit(config.link);
    askfit::atomic_write_file(out_path, askfit::format_simulate_csv(record));
}

void run_fit(const std::string& input_path, const std::string& families_list,
             const std::string& out_path) {
    const askfit::SampleVector samples = askfit::read_samples_file(input_path);
    const askfit::FitResult fit = askfit::fit_best(samples, parse_families(families_list));
    const std::string record = askfit::format_fit_record(fit);
    std::cout << record << "\n";
    if (!out_path.empty()) askfit::atomic_write_file(out_path, record + "\n");
}

void run_detect(const CommonOpts& opts, const std::string& input_path,
                const std::string& truth_path, const CLI::Option* epsilon_opt,
                double epsilon_flag, const std::string& out_path) {
    const askfit::ParsedConfig config = load_config(opts);
    const double epsilon =
        epsilon_opt->count() > 0 ? epsilon_flag : config.experiment.epsilon;
    const askfit::SampleVector samples = askfit::read_samples_file(input_path);
    const askfit::Threshold threshold = askfit::adapt_threshold(samples, epsilon);
    const askfit::DetectedBits detected = askfit::detect_stream(samples, threshold);
    std::string record = "{\"n\": " + std::to_string(samples.size());
    record += ", \"sigma\": " + askfit::format_double(threshold.sigma);
    record += ", \"epsilon\": " + askfit::format_double(threshold.epsilon);
    record += ", \"tau\": " + askfit::format_double(threshold.tau);
    if (!truth_path.empty()) {
        const askfit::DetectedBits truth = askfit::read_bits_file(truth_path);
        const askfit::BerReport report = askfit::evaluate_ber(truth, detected);
        record += ", \"errors\": " + std::to_string(report.n_errors);
        record += ", \"ber\": " + askfit::format_double(report.ber);
    }
    record += "}";
    std::cout << record << "\n";
    if (!out_path.empty()) askfit::atomic_write_file(out_path, askfit::format_bits_file(detected));
}

void run_sweep_eps(const CommonOpts& opts, const std::string& out_path) {
    const askfit::ParsedConfig config = load_config(opts);
    const askfit::SweepTable table = askfit::sweep_epsilon(
        config.link, config.experiment.epsilon_grid, config.experiment.trials);
    askfit::atomic_write_file(out_path, askfit::format_sweep_csv(table));
}

void run_sweep_sep(const CommonOpts& opts, const std::string& out_path) {
    const askfit::ParsedConfig config = load_config(opts);
    const askfit::SweepTable table = askfit::sweep_separation(
        config.link, config.experiment.separations, config.experiment.aprioris,
        config.experiment.epsilon_policy, config.experiment.epsilon, config.experiment.trials,
        config.experiment.epsilon_grid);
    askfit::atomic_write_file(out_path, askfit::format_sweep_csv(table));
}

void run_hist(const CommonOpts& opts, const std::string& out_path) {
    const askfit::ParsedConfig config = load_config(opts);
    const askfit::ExperimentParams& experiment = config.experiment;
    const askfit::TransmissionRecord record = askfit::transmit(config.link);
    askfit::HistogramSpec spec = askfit::default_histogram_spec(record.rx_samples);
    if (!std::isnan(experiment.bin_min)) {
        spec.min = experiment.bin_min;
        spec.max = experiment.bin_max;
    }
    spec.bin_width = experiment.bin_width > 0.0
                         ? experiment.bin_width
                         : (spec.max > spec.min ? (spec.max - spec.min) / 60.0 : 1.0);
    const askfit::Threshold threshold =
        askfit::adapt_threshold(record.rx_samples, experiment.epsilon);
    const askfit::Histogram h = askfit::histogram(record.rx_samples, spec, threshold);
    askfit::atomic_write_file(out_path, askfit::format_histogram_csv(h));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Binary ASK fiber-link simulator and adaptive threshold detector"};
    app.require_subcommand(1);
    app.footer(config_key_footer());

    CommonOpts sim_opts, detect_opts, sweep_eps_opts, sweep_sep_opts, hist_opts;
    std::string sim_out, fit_input, fit_families = "rayleigh,rician", fit_out;
    std::string detect_input, detect_truth, detect_out;
    std::string sweep_eps_out, sweep_sep_out, hist_out;
    double detect_epsilon = 0.0;

    CLI::App* sim = app.add_subcommand("simulate", "run one transmission, write the sample CSV");
    add_common_options(sim, sim_opts);
    sim->add_option("--out", sim_out, "output CSV (index,bit,tx_level,rx_sample)")->required();
    sim->callback([&] { run_simulate(sim_opts, sim_out); });

    CLI::App* fit = app.add_subcommand("fit", "fit distribution families to a sample file");
    fit->add_option("--input", fit_input, "sample file, one value per line")->required();
    fit->add_option("--families", fit_families, "comma list of rayleigh,rician");
    fit->add_option("--out", fit_out, "also write the fit record to this file");
    fit->callback([&] { run_fit(fit_input, fit_families, fit_out); });

    CLI::App* detect = app.add_subcommand("detect", "adapt a threshold to a sample file and decode it");
    add_common_options(detect, detect_opts);
    detect->add_option("--input", detect_input, "sample file, one value per line")->required();
    detect->add_option("--truth", detect_truth, "ground-truth bit file for BER reporting");
    CLI::Option* detect_eps_opt =
        detect->add_option("--epsilon", detect_epsilon, "threshold offset (overrides config)");
    detect->add_option("--out", detect_out, "write detected bits, one per line");
    detect->callback([&] {
        run_detect(detect_opts, detect_input, detect_truth, detect_eps_opt, detect_epsilon,
                   detect_out);
    });

    CLI::App* sweep_eps = app.add_subcommand("sweep-eps", "mean BER per epsilon over seeded trials");
    add_common_options(sweep_eps, sweep_eps_opts);
    sweep_eps->add_option("--out", sweep_eps_out, "output CSV")->required();
    sweep_eps->callback([&] { run_sweep_eps(sweep_eps_opts, sweep_eps_out); });

    CLI::App* sweep_sep =
        app.add_subcommand("sweep-sep", "mean BER over the separation x apriori grid");
    add_common_options(sweep_sep, sweep_sep_opts);
    sweep_sep->add_option("--out", sweep_sep_out, "output CSV")->required();
    sweep_sep->callback([&] { run_sweep_sep(sweep_sep_opts, sweep_sep_out); });

    CLI::App* hist = app.add_subcommand("hist", "received-sample histogram with threshold marker");
    add_common_options(hist, hist_opts);
    hist->add_option("--out", hist_out, "output CSV with # tau comment")->required();
    hist->callback([&] { run_hist(hist_opts, hist_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const askfit::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const askfit::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const askfit::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const askfit::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const askfit::numerical_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

// zeno_sense: simulate the stochastic Zeno sensing protocol and reconstruct
// the noise spectrum from survival statistics.
//
//   zeno_sense run         --config cfg.json --out DIR
//   zeno_sense simulate    --config cfg.json --out DIR
//   zeno_sense chi         --config cfg.json --out DIR
//   zeno_sense reconstruct --config cfg.json --out DIR
//   zeno_sense fidelity    --config cfg.json --out DIR [--against other.json]
//   zeno_sense theory      --config cfg.json --out DIR
//
// Exit status: 0 ok, 2 configuration / input error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "zeno/error.hpp"
#include "zeno/experiment.hpp"

namespace {

struct Options {
    std::string config;
    std::string out = "out";
    std::string against;
    std::optional<int> q;
    std::optional<std::uint64_t> seed;
    std::optional<double> epsilon;
    bool clamp_negative = false;
    std::optional<double> tau_offset_us;
    std::optional<int> workers;
};

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "JSON config (or a manifest.json to rerun)")->required();
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--q", o.q, "repetitions per tau");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--epsilon", o.epsilon, "eigenvalue truncation threshold, relative to the largest");
    sub->add_flag("--clamp-negative", o.clamp_negative, "zero negative reconstructed values before scoring");
    sub->add_option("--tau-offset-us", o.tau_offset_us, "shift applied to every tau when building the filters");
    sub->add_option("--workers", o.workers, "worker threads (0 = hardware concurrency)");
}

zeno::ExperimentConfig resolve(const Options& o) {
    zeno::ExperimentConfig cfg = zeno::load_config(o.config);
    zeno::apply_overrides(cfg, zeno::Overrides{o.q, o.seed, o.epsilon, o.clamp_negative, o.tau_offset_us, o.workers});
    return cfg;
}

void warn_violations(int count) {
    if (count > 0) {
        std::cerr << "warning: " << count
                  << " realization(s) left the weak Zeno regime (some |alpha_j| > 1); see summary.json\n";
    }
}

void print_fidelity(const char* label, const std::optional<double>& value) {
    std::cout << label << ": ";
    if (value) {
        std::cout << *value << '\n';
    } else {
        std::cout << "n/a\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noise spectroscopy by stochastic quantum Zeno sensing"};
    app.require_subcommand(1);

    Options o;
    auto* run = app.add_subcommand("run", "simulate + chi + reconstruct");
    auto* simulate = app.add_subcommand("simulate", "write survivals.csv and manifest.json");
    auto* chi = app.add_subcommand("chi", "survivals.csv -> chi.csv");
    auto* reconstruct = app.add_subcommand("reconstruct", "chi.csv -> spectrum.csv, eigen.csv, summary.json");
    auto* fidelity = app.add_subcommand("fidelity", "score spectrum.csv and chi.csv against a noise model");
    auto* theory = app.add_subcommand("theory", "chi_theory.csv, filters.csv, overlap.csv without simulation");
    for (auto* sub : {run, simulate, chi, reconstruct, fidelity, theory}) add_common(sub, o);
    fidelity->add_option("--against", o.against, "config whose noise model is the reference (default: --config)");

    CLI11_PARSE(app, argc, argv);

    try {
        const zeno::ExperimentConfig cfg = resolve(o);
        const std::filesystem::path out = o.out;

        if (run->parsed() || reconstruct->parsed()) {
            if (run->parsed()) {
                warn_violations(zeno::stage_simulate(cfg, out).weak_zeno_violations);
                zeno::stage_chi(cfg, out);
            }
            const auto report = zeno::stage_reconstruct(cfg, out);
            std::cout << "kept modes: " << report.result.kept << " of " << report.result.eigenvalues.size() << '\n';
            print_fidelity("fidelity_chi", report.result.fidelity_chi);
            print_fidelity("fidelity_spectrum", report.result.fidelity_spectrum);
        } else if (simulate->parsed()) {
            warn_violations(zeno::stage_simulate(cfg, out).weak_zeno_violations);
        } else if (chi->parsed()) {
            zeno::stage_chi(cfg, out);
        } else if (fidelity->parsed()) {
            const zeno::ExperimentConfig original = o.against.empty() ? cfg : zeno::load_config(o.against);
            const auto report = zeno::stage_fidelity(original, out);
            print_fidelity("fidelity_chi", report.fidelity_chi);
            print_fidelity("fidelity_spectrum", report.fidelity_spectrum);
        } else if (theory->parsed()) {
            zeno::stage_theory(cfg, out);
        }
    } catch (const zeno::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const zeno::MissingInputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const zeno::InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return 2;
    } catch (const zeno::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const zeno::DomainError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

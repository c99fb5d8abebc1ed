// lenstp: translated points of equivariant contactomorphisms of the standard
// contact sphere, via a direct sphere solver and a generating-function
// solver, plus the lens-space cohomology bounds.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lenstp/commands.hpp"
#include "lenstp/errors.hpp"

namespace {

struct OutputOptions {
    std::string out;
    std::string format = "json";
};

void add_output_options(CLI::App* cmd, OutputOptions& opts) {
    cmd->add_option("--out", opts.out, "write the JSON report to this path (default: stdout)");
    cmd->add_option("--format", opts.format, "json | csv (csv also emits plot-data files)")
        ->check(CLI::IsMember({"json", "csv"}));
}

void emit(const lenstp::Report& report, const OutputOptions& opts) {
    if (opts.out.empty()) {
        std::cout << report.to_string();
    } else {
        report.write_json(opts.out);
        std::cerr << "report written to " << opts.out << "\n";
    }
    if (opts.format == "csv") {
        std::string stem = opts.out.empty() ? "report" : opts.out;
        const auto dot = stem.rfind(".json");
        if (dot != std::string::npos) stem = stem.substr(0, dot);
        report.write_csv(stem);
        std::cerr << "plot data written to " << stem << "_records.csv and " << stem
                  << "_clusters.csv\n";
    }
    std::cerr << "verdict: " << report.verdict.value("status", std::string("-")) << "\n";
}

lenstp::RunConfig load_config(const std::string& path, std::uint64_t* seed_override,
                              int threads) {
    lenstp::RunConfig cfg = lenstp::RunConfig::load_file(path);
    if (seed_override) cfg.solver.seed = *seed_override;
    cfg.solver.threads = threads;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"translated points of equivariant contactomorphisms of S^{2n-1}"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "JSON run configuration")->required();
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--threads", threads, "worker threads for the multistart solvers");
    };

    OutputOptions out_validate, out_scan, out_cross, out_jump, out_bounds, out_sharp;

    CLI::App* validate = app.add_subcommand("validate", "run the invariant suites on a config");
    add_common(validate, true);
    add_output_options(validate, out_validate);

    CLI::App* scan = app.add_subcommand("scan", "direct translated-point scan and 2n verdict");
    add_common(scan, true);
    add_output_options(scan, out_scan);

    CLI::App* cross = app.add_subcommand("crosscheck", "compare the two independent solvers");
    add_common(cross, true);
    add_output_options(cross, out_cross);

    double t0 = 0.0, t1 = 2.0;
    CLI::App* jump = app.add_subcommand("index-jump",
                                        "quadratic index jump of an all-linear isotopy");
    add_common(jump, true);
    jump->add_option("--t0", t0, "window start (default 0)");
    jump->add_option("--t1", t1, "window end (default 2)");
    add_output_options(jump, out_jump);

    int p = 3, n = 2;
    CLI::App* bounds = app.add_subcommand("bounds", "cohomological bounds for L_p^{2n-1}");
    bounds->add_option("--p", p, "odd prime order of the fundamental group")->required();
    bounds->add_option("--n", n, "complex dimension")->required();
    add_output_options(bounds, out_bounds);

    lenstp::SharpnessOptions sharp_opts;
    bool unperturbed = false;
    CLI::App* sharp = app.add_subcommand("sharpness-demo",
                                         "Morse-Bott construction meeting the 2n bound exactly");
    sharp->add_option("--p", p, "odd prime order of the fundamental group")->required();
    sharp->add_option("--n", n, "complex dimension (<= 3)")->required();
    sharp->add_option("--epsilon", sharp_opts.epsilon, "splitting perturbation amplitude");
    sharp->add_option("--shift", sharp_opts.shift, "base diagonal shift");
    sharp->add_flag("--unperturbed", unperturbed, "keep the Morse-Bott circles intact");
    sharp->add_option("--sphere-samples", sharp_opts.solver.sphere_samples,
                      "multistart sphere samples (0 = 32 n^2)");
    sharp->add_option("--tau-samples", sharp_opts.solver.tau_samples, "multistart shift samples");
    add_common(sharp, false);
    add_output_options(sharp, out_sharp);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) {
            const lenstp::RunConfig cfg =
                load_config(config_path, seed_set ? &seed : nullptr, threads);
            const lenstp::Report report = lenstp::cmd_validate(cfg);
            emit(report, out_validate);
            return report.verdict.value("status", std::string()) == "PASS" ? 0 : 2;
        }
        if (*scan) {
            emit(lenstp::cmd_scan(load_config(config_path, seed_set ? &seed : nullptr, threads)),
                 out_scan);
            return 0;
        }
        if (*cross) {
            emit(lenstp::cmd_crosscheck(
                     load_config(config_path, seed_set ? &seed : nullptr, threads)),
                 out_cross);
            return 0;
        }
        if (*jump) {
            emit(lenstp::cmd_index_jump(
                     load_config(config_path, seed_set ? &seed : nullptr, threads), t0, t1),
                 out_jump);
            return 0;
        }
        if (*bounds) {
            emit(lenstp::cmd_bounds(p, n), out_bounds);
            return 0;
        }
        if (*sharp) {
            if (unperturbed) sharp_opts.epsilon = 0.0;
            if (seed_set) sharp_opts.solver.seed = seed;
            sharp_opts.solver.threads = threads;
            emit(lenstp::cmd_sharpness_demo(p, n, sharp_opts), out_sharp);
            return 0;
        }
    } catch (const lenstp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const lenstp::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const lenstp::ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

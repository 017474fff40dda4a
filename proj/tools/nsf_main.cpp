/*
   Copyright 2026 the nsf authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nsf/checks.hpp"
#include "nsf/experiment.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    long seed_override = -1;
    int paths_override = 0;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
    auto* c = cmd->add_option("--config", opts.config_path, "run configuration file (JSON)");
    if (config_required) c->required();
    cmd->add_option("--seed", opts.seed_override, "override the configured seed");
    cmd->add_option("--out", opts.out_dir, "override the configured output directory");
    cmd->add_option("--paths", opts.paths_override, "override the configured path count");
    cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
}

nsf::RunConfig load_config(const CommonOpts& opts) {
    nsf::RunConfig cfg = nsf::parse_config(opts.config_path);
    if (opts.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed_override);
    if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
    if (opts.paths_override > 0) cfg.n_paths = opts.paths_override;
    // keep the echo consistent with the effective settings
    cfg.raw["seed"] = cfg.seed;
    cfg.raw["n_paths"] = cfg.n_paths;
    cfg.raw["output_dir"] = cfg.output_dir;
    return cfg;
}

int report_checks(const std::vector<nsf::CheckResult>& results, bool quiet,
                  nlohmann::json* sink = nullptr) {
    int failures = 0;
    for (const auto& r : results) {
        if (!r.pass) ++failures;
        if (!quiet || !r.pass)
            std::printf("%-52s %12.5e <= %-9g %s\n", r.name.c_str(), r.observed, r.tolerance,
                        r.pass ? "pass" : "FAIL");
        if (sink) {
            nlohmann::json e;
            e["name"] = r.name;
            e["observed"] = r.observed;
            e["tolerance"] = r.tolerance;
            e["pass"] = r.pass;
            if (!r.detail.empty()) e["detail"] = r.detail;
            sink->push_back(e);
        }
    }
    return failures;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic Navier-Stokes-Fourier simulator and verification harness"};
    app.require_subcommand(1);

    CommonOpts run_opts, budget_opts, ws_opts, cmp_opts, noise_opts, generic_opts, props_opts;
    double ws_amplitude = 1e-3;
    std::string generic_out;

    auto* cmd_run = app.add_subcommand("run", "execute the configured ensemble");
    add_common(cmd_run, run_opts, true);

    auto* cmd_budget =
        app.add_subcommand("mc-budget", "Monte Carlo check of the L1 dissipation-budget bound");
    add_common(cmd_budget, budget_opts, true);

    auto* cmd_ws = app.add_subcommand(
        "weak-strong", "twin runs (shared noise) against the relative-energy envelope");
    add_common(cmd_ws, ws_opts, true);
    cmd_ws->add_option("--perturbation", ws_amplitude, "initial psi perturbation amplitude");

    auto* cmd_cmp = app.add_subcommand("compare-schemes",
                                       "coupled-path convergence across formulations");
    add_common(cmd_cmp, cmp_opts, true);

    auto* cmd_noise = app.add_subcommand("verify-noise",
                                         "stationarity and covariance checks of the noise model");
    add_common(cmd_noise, noise_opts, false);

    auto* cmd_generic =
        app.add_subcommand("verify-generic", "GENERIC operator identities (JSON report)");
    add_common(cmd_generic, generic_opts, false);
    cmd_generic->add_option("--report", generic_out, "write the JSON report to this file");

    auto* cmd_props = app.add_subcommand("verify-properties", "the full invariant suite");
    add_common(cmd_props, props_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (cmd_run->parsed()) {
            nsf::RunConfig cfg = load_config(run_opts);
            nsf::RunOutput out = nsf::run_experiment(cfg);
            if (!run_opts.quiet) {
                std::printf("paths: %zu  failed: %d\n", out.paths.size(), out.n_failed);
                std::printf("mean terminal energy: %.12g\n", out.mean_terminal_energy);
                std::printf("mean budget integral: %.12g (se %.3g)\n", out.mean_budget_integral,
                            out.se_budget_integral);
                std::printf("min admissibility margin: %.12g\n", out.min_margin);
                for (const auto& w : out.warnings) std::printf("warning: %s\n", w.c_str());
                std::printf("artifacts: %s\n", out.directory.c_str());
            }
            return out.n_failed == static_cast<int>(out.paths.size()) && !out.paths.empty()
                       ? kExitCheckFailure
                       : kExitPass;
        }

        if (cmd_budget->parsed()) {
            nsf::RunConfig cfg = load_config(budget_opts);
            nsf::BudgetReport rep = nsf::mc_budget_check(cfg, !cfg.output_dir.empty());
            std::printf("empirical mean budget integral: %.12g\n", rep.empirical_mean);
            std::printf("Monte Carlo standard error:     %.12g\n", rep.standard_error);
            std::printf("bound:                          %.12g\n", rep.bound);
            std::printf("margin (bound - mean):          %.12g\n", rep.margin);
            std::printf("paths: %d  failed: %d\n", rep.n_paths, rep.n_failed);
            std::printf("%s\n", rep.pass ? "pass" : "FAIL");
            return rep.pass ? kExitPass : kExitCheckFailure;
        }

        if (cmd_ws->parsed()) {
            nsf::RunConfig cfg = load_config(ws_opts);
            if (cfg.weak_strong && cmd_ws->count("--perturbation") == 0)
                ws_amplitude = cfg.weak_strong->perturbation_amplitude;
            nsf::WeakStrongReport rep =
                nsf::weak_strong_experiment(cfg, ws_amplitude, !cfg.output_dir.empty());
            std::printf("perturbation amplitude:    %.12g\n", rep.perturbation_amplitude);
            std::printf("initial relative energy:   %.12g\n", rep.initial_relative_energy);
            std::printf("max relative energy:       %.12g\n", rep.max_relative_energy);
            std::printf("max envelope ratio:        %.12g\n", rep.max_envelope_ratio);
            std::printf("paths failed:              %d\n", rep.n_failed);
            bool pass = rep.n_failed == 0 &&
                        (ws_amplitude == 0 ? rep.max_relative_energy <= 1e-10
                                           : rep.max_envelope_ratio <= 1.2);
            std::printf("%s\n", pass ? "pass" : "FAIL");
            return pass ? kExitPass : kExitCheckFailure;
        }

        if (cmd_cmp->parsed()) {
            nsf::RunConfig cfg = load_config(cmp_opts);
            std::vector<double> dt_list =
                cfg.compare && !cfg.compare->dt_list.empty()
                    ? cfg.compare->dt_list
                    : std::vector<double>{4 * cfg.dt, 2 * cfg.dt, cfg.dt};
            nsf::CompareReport rep = nsf::compare_schemes(cfg, dt_list);
            auto print_table = [](const char* name, const nsf::ConvergenceTable& t) {
                std::printf("%s:\n", name);
                for (std::size_t i = 0; i < t.dts.size(); ++i)
                    std::printf("  dt=%-10.3g |A-B|=%.6e\n", t.dts[i], t.differences[i]);
                std::printf("  fitted order: %.3f%s\n", t.fitted_order,
                            t.degenerate ? " (degenerate: differences at rounding level)" : "");
            };
            print_table("EM-Ito(psi) vs Heun-Stratonovich", rep.ito_vs_stratonovich);
            print_table("EM-Ito(psi) vs EM-Ito(theta)", rep.ito_psi_vs_ito_theta);
            std::printf("Galerkin delta-sequence vs exact 1/psi (dt=%.3g):\n", dt_list.back());
            for (std::size_t i = 0; i < rep.delta_list.size(); ++i)
                std::printf("  delta=%-8.3g |A-B|=%.6e\n", rep.delta_list[i],
                            rep.galerkin_delta_differences[i]);
            bool pass = (rep.ito_vs_stratonovich.degenerate ||
                         (rep.ito_vs_stratonovich.fitted_order >= 0.5 &&
                          rep.ito_vs_stratonovich.monotone_decreasing())) &&
                        (rep.ito_psi_vs_ito_theta.degenerate ||
                         (rep.ito_psi_vs_ito_theta.fitted_order >= 0.5 &&
                          rep.ito_psi_vs_ito_theta.monotone_decreasing()));
            for (std::size_t i = 1; i < rep.galerkin_delta_differences.size(); ++i)
                pass = pass && rep.galerkin_delta_differences[i] <=
                                   rep.galerkin_delta_differences[i - 1] + 1e-14;
            std::printf("%s\n", pass ? "pass" : "FAIL");
            return pass ? kExitPass : kExitCheckFailure;
        }

        if (cmd_noise->parsed()) {
            int failures = 0;
            if (!noise_opts.config_path.empty()) {
                nsf::RunConfig cfg = load_config(noise_opts);
                nsf::NoiseBasis basis = cfg.basis();
                nsf::StationarityReport rep = nsf::verify_stationarity(basis, 1e-12);
                std::printf("configured basis: F1=%.12g F2=%.12g G1=%.12g G2=%.12g\n",
                            basis.constants().F1, basis.constants().F2, basis.constants().G1,
                            basis.constants().G2);
                std::printf("worst stationarity residual: %.3e  %s\n", rep.worst(),
                            rep.pass ? "pass" : "FAIL");
                if (!rep.pass) ++failures;
            }
            failures += report_checks(nsf::check_noise_model(), noise_opts.quiet);
            return failures ? kExitCheckFailure : kExitPass;
        }

        if (cmd_generic->parsed()) {
            nlohmann::json report = nlohmann::json::array();
            int failures = report_checks(nsf::check_generic(), /*quiet=*/true, &report);
            nlohmann::json doc;
            doc["suite"] = "generic";
            doc["pass"] = failures == 0;
            doc["residuals"] = report;
            if (!generic_out.empty()) {
                std::ofstream out(generic_out, std::ios::binary);
                out << doc.dump(2) << '\n';
                if (!generic_opts.quiet)
                    std::printf("%s: %s\n", generic_out.c_str(), failures ? "FAIL" : "pass");
            } else {
                std::printf("%s\n", doc.dump(2).c_str());
            }
            return failures ? kExitCheckFailure : kExitPass;
        }

        if (cmd_props->parsed()) {
            int failures = 0;
            failures += report_checks(nsf::check_spectral_core(), props_opts.quiet);
            failures += report_checks(nsf::check_noise_model(), props_opts.quiet);
            failures += report_checks(nsf::check_dynamics(), props_opts.quiet);
            failures += report_checks(nsf::check_integrators(), props_opts.quiet);
            failures += report_checks(nsf::check_diagnostics(), props_opts.quiet);
            failures += report_checks(nsf::check_generic(), props_opts.quiet);
            std::printf("%s\n", failures == 0 ? "all properties pass" : "property failures");
            return failures ? kExitCheckFailure : kExitPass;
        }
    } catch (const nsf::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitUsage;
    } catch (const nsf::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCheckFailure;
    }
    return kExitUsage;
}

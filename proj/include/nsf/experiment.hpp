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

#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "nsf/config.hpp"
#include "nsf/io.hpp"
#include "nsf/version.hpp"

namespace nsf {

/// Worker count for path ensembles: NSF_WORKERS if set, else hardware
/// concurrency, clamped to the number of paths.
inline unsigned worker_count(std::size_t n_paths) {
    unsigned workers = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("NSF_WORKERS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) workers = static_cast<unsigned>(v);
    }
    if (workers < 1) workers = 1;
    if (workers > n_paths) workers = static_cast<unsigned>(n_paths);
    return workers;
}

/// Run `jobs(i)` for i in [0, n) on the ensemble worker pool. Results must be
/// written to pre-sized slots so the output order is schedule-independent.
template <class F>
void parallel_for(std::size_t n, F&& job) {
    if (n == 0) return;
    unsigned workers = worker_count(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                job(i);
            }
        });
    for (auto& t : pool) t.join();
}

struct PathSummary {
    int index = 0;
    bool failed = false;
    std::string error_kind;
    long error_step = 0;
    double terminal_energy = 0;
    double min_margin = 0;
    double budget_time_integral = 0;
};

struct RunOutput {
    std::string directory;
    NoiseConstants constants;
    std::vector<PathSummary> paths;
    std::vector<std::string> warnings;
    double wall_time_seconds = 0;
    int n_failed = 0;

    double mean_terminal_energy = 0;
    double var_terminal_energy = 0;
    double mean_budget_integral = 0;
    double se_budget_integral = 0;  // Monte Carlo standard error
    double min_margin = 0;
};

namespace detail {

inline void summarize(RunOutput& out) {
    double sum_e = 0, sum_e2 = 0, sum_b = 0, sum_b2 = 0;
    double min_margin = 1e300;
    std::size_t ok = 0;
    for (const auto& p : out.paths) {
        if (p.failed) {
            ++out.n_failed;
            continue;
        }
        ++ok;
        sum_e += p.terminal_energy;
        sum_e2 += p.terminal_energy * p.terminal_energy;
        sum_b += p.budget_time_integral;
        sum_b2 += p.budget_time_integral * p.budget_time_integral;
        min_margin = std::min(min_margin, p.min_margin);
    }
    if (ok > 0) {
        double n = static_cast<double>(ok);
        out.mean_terminal_energy = sum_e / n;
        out.var_terminal_energy = std::max(0.0, sum_e2 / n - out.mean_terminal_energy * out.mean_terminal_energy);
        out.mean_budget_integral = sum_b / n;
        double var_b = std::max(0.0, sum_b2 / n - out.mean_budget_integral * out.mean_budget_integral);
        if (ok > 1) var_b = var_b * n / (n - 1.0);
        out.se_budget_integral = std::sqrt(var_b / n);
        out.min_margin = min_margin;
    }
}

inline nlohmann::json summary_json(const RunOutput& out) {
    nlohmann::json j;
    j["n_paths"] = out.paths.size();
    j["n_failed"] = out.n_failed;
    j["mean_terminal_energy"] = out.mean_terminal_energy;
    j["var_terminal_energy"] = out.var_terminal_energy;
    j["mean_budget_time_integral"] = out.mean_budget_integral;
    j["se_budget_time_integral"] = out.se_budget_integral;
    j["min_admissibility_margin"] = out.min_margin;
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : out.paths) {
        nlohmann::json e;
        e["index"] = p.index;
        e["failed"] = p.failed;
        if (p.failed) {
            e["error_kind"] = p.error_kind;
            e["error_step"] = p.error_step;
        } else {
            e["terminal_energy"] = p.terminal_energy;
            e["min_admissibility_margin"] = p.min_margin;
            e["budget_time_integral"] = p.budget_time_integral;
        }
        paths.push_back(e);
    }
    j["paths"] = paths;
    return j;
}

inline std::string path_file(const std::string& dir, const char* stem, int index,
                             const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%04d.%s", stem, index, ext);
    return dir + "/" + buf;
}

}  // namespace detail

/// Execute the configured ensemble: n_paths independent Brownian paths run
/// concurrently (one RNG sub-stream each), per-path diagnostics CSV and
/// terminal-state files, a deterministic summary.json, and metadata.json
/// sufficient for bit-exact replay. Failed paths are recorded and never
/// abort the ensemble.
inline RunOutput run_experiment(const RunConfig& cfg, bool write_artifacts = true) {
    auto t0 = std::chrono::steady_clock::now();
    TorusGrid grid = cfg.grid();
    NoiseBasis basis = cfg.basis();
    SystemState initial = build_initial_state(cfg);
    SchemeSpec scheme = cfg.scheme();
    PathOptions opts;
    opts.save_every = cfg.save_every;

    RunOutput out;
    out.directory = cfg.output_dir;
    out.constants = basis.constants();
    out.warnings = cfg.warnings;
    if (write_artifacts) std::filesystem::create_directories(cfg.output_dir);

    const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
    out.paths.resize(n);
    std::vector<std::string> io_errors(n);
    parallel_for(n, [&](std::size_t i) {
        Trajectory traj = run_path(initial, scheme, basis, cfg.model, cfg.seed, opts,
                                   static_cast<std::uint64_t>(i));
        PathSummary& s = out.paths[i];
        s.index = static_cast<int>(i);
        s.failed = traj.failed();
        if (traj.failed()) {
            s.error_kind = traj.error->kind;
            s.error_step = traj.error->step;
        }
        s.terminal_energy = total_energy(traj.terminal);
        s.budget_time_integral = traj.budget_time_integral;
        double min_margin = 1e300;
        for (const auto& r : traj.records) min_margin = std::min(min_margin, r.admissibility_margin);
        s.min_margin = min_margin;
        if (write_artifacts) {
            try {
                write_diagnostics_csv(
                    detail::path_file(cfg.output_dir, "path", static_cast<int>(i), "csv"),
                    traj.records);
                write_state(detail::path_file(cfg.output_dir, "state", static_cast<int>(i), "nsf"),
                            traj.terminal);
            } catch (const Error& e) {
                io_errors[i] = e.what();
            }
        }
    });
    for (const auto& e : io_errors)
        if (!e.empty()) throw Error(e);

    detail::summarize(out);
    out.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (write_artifacts) {
        std::ofstream summary(cfg.output_dir + "/summary.json", std::ios::binary);
        summary << detail::summary_json(out).dump(2) << '\n';

        nlohmann::json meta;
        meta["tool"] = "nsf";
        meta["version"] = version_string();
        meta["config"] = cfg.raw;
        meta["constants"] = {{"F1", out.constants.F1},
                             {"F2", out.constants.F2},
                             {"G1", out.constants.G1},
                             {"G2", out.constants.G2}};
        meta["warnings"] = out.warnings;
        meta["wall_time_seconds"] = out.wall_time_seconds;
        std::ofstream metadata(cfg.output_dir + "/metadata.json", std::ios::binary);
        metadata << meta.dump(2) << '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo budget check (the L^1 estimate)
// ---------------------------------------------------------------------------

/// Right-hand side of the L^1 dissipation-budget estimate:
/// (1 + (4 F2 + G2) T / 8) (E0 + 2 eps T)^{1/2}, E0 the initial energy.
inline double budget_bound(double initial_energy, double F2, double G2, double T, double eps) {
    return (1.0 + (4.0 * F2 + G2) * T / 8.0) * std::sqrt(initial_energy + 2.0 * eps * T);
}

struct BudgetReport {
    double empirical_mean = 0;
    double standard_error = 0;
    double bound = 0;
    double margin = 0;  // bound - mean
    int n_paths = 0;
    int n_failed = 0;
    bool pass = false;  // mean <= bound + 3 SE
};

inline BudgetReport mc_budget_check(const RunConfig& cfg, bool write_artifacts = false) {
    if (cfg.formulation != Formulation::galerkin)
        throw InvalidOperand("mc-budget requires the galerkin formulation");
    RunOutput run = run_experiment(cfg, write_artifacts);
    BudgetReport rep;
    rep.n_paths = static_cast<int>(run.paths.size());
    rep.n_failed = run.n_failed;
    rep.empirical_mean = run.mean_budget_integral;
    rep.standard_error = run.se_budget_integral;
    SystemState initial = build_initial_state(cfg);
    rep.bound = budget_bound(total_energy(initial), run.constants.F2, run.constants.G2,
                             cfg.t_final, cfg.model.epsilon);
    rep.margin = rep.bound - rep.empirical_mean;
    rep.pass = rep.empirical_mean <= rep.bound + 3.0 * rep.standard_error;
    return rep;
}

// ---------------------------------------------------------------------------
// Weak-strong twin runs against the Gronwall envelope
// ---------------------------------------------------------------------------

struct WeakStrongPath {
    int index = 0;
    bool failed = false;
    double max_relative_energy = 0;
    double max_envelope_ratio = 0;  // max over saved times of RE(t)/envelope(t)
};

struct WeakStrongReport {
    double perturbation_amplitude = 0;
    double initial_relative_energy = 0;
    std::vector<WeakStrongPath> paths;
    double max_relative_energy = 0;
    double max_envelope_ratio = 0;
    int n_failed = 0;
};

/// Reference and perturbed runs driven by the identical Brownian path per
/// path index; the perturbation adds `amplitude * sin(2 pi k.x)` to psi_0.
inline WeakStrongReport weak_strong_experiment(const RunConfig& cfg, double amplitude,
                                               bool write_artifacts = false) {
    TorusGrid grid = cfg.grid();
    NoiseBasis basis = cfg.basis();
    SchemeSpec scheme = cfg.scheme();
    if (scheme.formulation == Formulation::theta_system)
        throw InvalidOperand("weak-strong runs use the (u,psi) formulations");
    Wavevector mode = cfg.weak_strong ? cfg.weak_strong->mode : Wavevector{1, 0, 0};

    SystemState reference0 = build_initial_state(cfg);
    SystemState perturbed0 = reference0;
    perturbed0.scalar.add_sin(mode, amplitude);

    PathOptions opts;
    opts.save_every = cfg.save_every;
    opts.keep_states = true;

    WeakStrongReport rep;
    rep.perturbation_amplitude = amplitude;
    rep.initial_relative_energy = relative_energy(perturbed0, reference0);

    const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
    rep.paths.resize(n);
    std::vector<std::vector<DiagnosticRecord>> perturbed_records(n);
    parallel_for(n, [&](std::size_t i) {
        Trajectory ref = run_path(reference0, scheme, basis, cfg.model, cfg.seed, opts,
                                  static_cast<std::uint64_t>(i));
        Trajectory per = run_path(perturbed0, scheme, basis, cfg.model, cfg.seed, opts,
                                  static_cast<std::uint64_t>(i));
        WeakStrongPath& p = rep.paths[i];
        p.index = static_cast<int>(i);
        if (ref.failed() || per.failed()) {
            p.failed = true;
            return;
        }
        GronwallEnvelope envelope(ref.states, ref.save_times, rep.initial_relative_energy);
        std::size_t saves = std::min(ref.states.size(), per.states.size());
        for (std::size_t s = 0; s < saves; ++s) {
            double re = relative_energy(per.states[s], ref.states[s]);
            per.records[s].relative_energy = re;
            p.max_relative_energy = std::max(p.max_relative_energy, re);
            if (s > 0) {
                double env = envelope(per.save_times[s]);
                if (env > 0) p.max_envelope_ratio = std::max(p.max_envelope_ratio, re / env);
            }
        }
        perturbed_records[i] = std::move(per.records);
    });

    for (const auto& p : rep.paths) {
        if (p.failed) {
            ++rep.n_failed;
            continue;
        }
        rep.max_relative_energy = std::max(rep.max_relative_energy, p.max_relative_energy);
        rep.max_envelope_ratio = std::max(rep.max_envelope_ratio, p.max_envelope_ratio);
    }

    if (write_artifacts) {
        std::filesystem::create_directories(cfg.output_dir);
        for (std::size_t i = 0; i < n; ++i)
            if (!perturbed_records[i].empty())
                write_diagnostics_csv(
                    detail::path_file(cfg.output_dir, "weak_strong", static_cast<int>(i), "csv"),
                    perturbed_records[i]);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Cross-scheme comparisons
// ---------------------------------------------------------------------------

struct CompareReport {
    int n_paths = 1;
    ConvergenceTable ito_vs_stratonovich;    // path-averaged differences
    ConvergenceTable ito_psi_vs_ito_theta;
    std::vector<double> delta_list;
    std::vector<double> galerkin_delta_differences;  // terminal L2 vs exact-1/psi run
};

/// Strong-error tables for the three pairings. The differences are averaged
/// over cfg.n_paths coupled Brownian paths: a single path's terminal
/// difference is noisy enough at desk scale to break monotonicity even when
/// the strong order is clean.
inline CompareReport compare_schemes(const RunConfig& cfg, const std::vector<double>& dt_list) {
    if (dt_list.empty()) throw InvalidOperand("compare-schemes: empty dt list");
    NoiseBasis basis = cfg.basis();
    SystemState initial = build_initial_state(cfg);
    if (initial.vars != Variables::psi)
        throw InvalidOperand("compare-schemes: configure a psi-variables initial state");

    const double T = cfg.t_final;
    auto scheme = [&](SchemeKind kind, Formulation form, double dt) {
        SchemeSpec s;
        s.kind = kind;
        s.formulation = form;
        s.dt = dt;
        s.steps = std::lround(T / dt);
        return s;
    };

    CompareReport rep;
    rep.n_paths = cfg.n_paths;
    const double coarsest = dt_list.front();
    auto averaged_pairing = [&](SchemeKind kind_b, Formulation form_b) {
        std::size_t n = static_cast<std::size_t>(cfg.n_paths);
        std::vector<ConvergenceTable> tables(n);
        parallel_for(n, [&](std::size_t p) {
            tables[p] = couple_paths(
                initial, scheme(SchemeKind::euler_maruyama_ito, Formulation::psi_system, coarsest),
                scheme(kind_b, form_b, coarsest), basis, cfg.model,
                RngStream::derive(cfg.seed, 0xCA0ULL, p), dt_list);
        });
        ConvergenceTable mean = tables.front();
        for (std::size_t i = 0; i < mean.differences.size(); ++i) {
            mean.differences[i] = 0;
            for (const auto& t : tables) mean.differences[i] += t.differences[i];
            mean.differences[i] /= static_cast<double>(n);
        }
        double scale = 0;
        for (double d : mean.differences) scale = std::max(scale, d);
        mean.degenerate = scale < 1e-14;
        mean.fitted_order =
            mean.degenerate ? 0.0 : detail::fit_order(mean.dts, mean.differences);
        return mean;
    };
    rep.ito_vs_stratonovich =
        averaged_pairing(SchemeKind::heun_stratonovich, Formulation::psi_system);
    rep.ito_psi_vs_ito_theta =
        averaged_pairing(SchemeKind::euler_maruyama_ito, Formulation::theta_system);

    // Galerkin delta-sequence against the exact-1/psi Ito run, same path.
    std::vector<double> deltas =
        cfg.compare && !cfg.compare->delta_list.empty() ? cfg.compare->delta_list
                                                        : std::vector<double>{1e-1, 1e-2, 1e-3};
    rep.delta_list = deltas;
    const double dt = dt_list.back();
    for (double delta : deltas) {
        ModelParams galerkin_params = cfg.model;
        galerkin_params.delta = delta;
        galerkin_params.epsilon = 0.0;
        ModelParams exact_params = cfg.model;
        exact_params.delta.reset();
        exact_params.epsilon = 0.0;
        // couple_paths shares one ModelParams across both schemes; here each
        // side needs its own, so drive the coupled loop directly.
        SchemeSpec ga = scheme(SchemeKind::euler_maruyama_ito, Formulation::galerkin, dt);
        SchemeSpec ex = scheme(SchemeKind::euler_maruyama_ito, Formulation::psi_system, dt);
        RngStream path_rng(RngStream::derive(cfg.seed, 0xC09ULL, 0ULL));
        SystemState a = initial, b = initial;
        for (long s = 0; s < ga.steps; ++s) {
            NoiseIncrement inc =
                sample_increments(basis, dt, path_rng, static_cast<std::uint64_t>(s));
            a = step(a, ga, basis, galerkin_params, inc).state;
            b = step(b, ex, basis, exact_params, inc).state;
        }
        VectorField du = a.u - b.u;
        ScalarField ds = a.scalar - b.scalar;
        rep.galerkin_delta_differences.push_back(
            std::sqrt(inner_product(du, du) + inner_product(ds, ds)));
    }
    return rep;
}

}  // namespace nsf

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

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nsf/diagnostics.hpp"

namespace nsf {

enum class SchemeKind { euler_maruyama_ito, heun_stratonovich, imex_ito };

inline const char* to_string(SchemeKind k) {
    switch (k) {
        case SchemeKind::euler_maruyama_ito: return "euler_maruyama_ito";
        case SchemeKind::heun_stratonovich: return "heun_stratonovich";
        case SchemeKind::imex_ito: return "imex_ito";
    }
    return "?";
}

/// Time-stepping scheme selection. heun_stratonovich pairs only with the
/// Stratonovich (u,psi) drift; the Ito schemes pair with the psi, theta, or
/// Galerkin drifts. linear_only is a diagnostic switch dropping the nonlinear
/// remainder.
struct SchemeSpec {
    SchemeKind kind = SchemeKind::euler_maruyama_ito;
    Formulation formulation = Formulation::psi_system;
    double dt = 1e-4;
    long steps = 0;
    bool linear_only = false;

    void validate() const {
        if (!(dt > 0)) throw InvalidOperand("scheme: dt must be positive");
        if (steps < 0) throw InvalidOperand("scheme: steps must be >= 0");
        if (kind == SchemeKind::heun_stratonovich && formulation != Formulation::psi_system)
            throw InvalidOperand(
                "scheme: heun_stratonovich pairs only with the Stratonovich (u,psi) drift");
    }

    double t_final() const { return dt * static_cast<double>(steps); }
};

/// Explicit-scheme stability guard for the heat part:
/// warn when dt (1 + F1/2 + G1/2) 4 pi^2 3 m^2 > 2.
inline bool stability_guard_violated(double dt, int cutoff, const NoiseConstants& nc) {
    double lam = (1.0 + nc.F1 / 2.0 + nc.G1 / 2.0) * 4.0 * pi * pi * 3.0 *
                 static_cast<double>(cutoff) * static_cast<double>(cutoff);
    return dt * lam > 2.0;
}

namespace detail {

inline void scale_modes_by_linear_factor(SystemState& s, double dt, const NoiseConstants& nc,
                                         const ModelParams& params, Formulation form) {
    const TorusGrid& grid = s.grid();
    grid.for_each_mode([&](Wavevector k, std::size_t idx) {
        double eu = std::exp(-dt * linear_lambda_u(k, nc, params, form));
        double es = std::exp(-dt * linear_lambda_scalar(k, nc, params, form));
        for (int i = 0; i < 3; ++i) s.u[i].data()[idx] *= eu;
        s.scalar.data()[idx] *= es;
    });
}

inline std::pair<VectorField, ScalarField> diffusion(const SystemState& state,
                                                     const NoiseBasis& basis,
                                                     const NoiseIncrement& inc, Formulation form) {
    if (form == Formulation::theta_system)
        return noise_diffusion_fields_theta(basis, state.u, state.scalar, inc);
    return noise_diffusion_fields(basis, state.u, state.scalar, inc);
}

}  // namespace detail

/// One step of the selected scheme. The increment must carry the scheme's dt
/// (it may be a sum of finer increments from a coupled path). u is
/// re-projected by Pi after the update; non-finite results raise BlowUp.
/// The returned budget is the left-endpoint value of the dissipation-budget
/// integrand's integral, for time integration by the caller.
struct StepResult {
    SystemState state;
    double budget = 0;
};

inline StepResult step(const SystemState& state, const SchemeSpec& scheme, const NoiseBasis& basis,
                       const ModelParams& params, const NoiseIncrement& inc) {
    scheme.validate();
    if (std::abs(inc.dt - scheme.dt) > 1e-12 * std::max(1.0, std::abs(scheme.dt)))
        throw InvalidOperand("step: increment dt does not match scheme dt");
    const Variables want =
        scheme.formulation == Formulation::theta_system ? Variables::theta : Variables::psi;
    if (state.vars != want)
        throw InvalidOperand("step: state variables do not match the formulation");
    const double dt = scheme.dt;

    SystemState next = state;
    double budget = 0;

    switch (scheme.kind) {
        case SchemeKind::euler_maruyama_ito: {
            Drift d = drift_ito(state, basis.constants(), params, scheme.formulation,
                                scheme.linear_only);
            budget = d.budget;
            auto [du_n, ds_n] = detail::diffusion(state, basis, inc, scheme.formulation);
            next.u.axpy(dt, d.du);
            next.u += du_n;
            next.scalar.axpy(dt, d.dscalar);
            next.scalar += ds_n;
            break;
        }
        case SchemeKind::heun_stratonovich: {
            Drift d1 = drift_stratonovich(state, scheme.linear_only);
            budget = d1.budget;
            auto [du1, ds1] = detail::diffusion(state, basis, inc, scheme.formulation);
            SystemState pred = state;
            pred.u.axpy(dt, d1.du);
            pred.u += du1;
            pred.u = leray_project(std::move(pred.u));
            pred.scalar.axpy(dt, d1.dscalar);
            pred.scalar += ds1;
            Drift d2 = drift_stratonovich(pred, scheme.linear_only);
            auto [du2, ds2] = detail::diffusion(pred, basis, inc, scheme.formulation);
            next.u.axpy(0.5 * dt, d1.du);
            next.u.axpy(0.5 * dt, d2.du);
            next.u.axpy(0.5, du1);
            next.u.axpy(0.5, du2);
            next.scalar.axpy(0.5 * dt, d1.dscalar);
            next.scalar.axpy(0.5 * dt, d2.dscalar);
            next.scalar.axpy(0.5, ds1);
            next.scalar.axpy(0.5, ds2);
            break;
        }
        case SchemeKind::imex_ito: {
            Drift rem(state.grid());
            if (!scheme.linear_only) {
                SystemState arg = params.truncation_radius &&
                                          scheme.formulation != Formulation::galerkin
                                      ? truncate(state, *params.truncation_radius)
                                      : state;
                rem = explicit_drift(arg, basis.constants(), params, scheme.formulation);
            }
            budget = rem.budget;
            auto [du_n, ds_n] = detail::diffusion(state, basis, inc, scheme.formulation);
            next.u.axpy(dt, rem.du);
            next.u += du_n;
            next.scalar.axpy(dt, rem.dscalar);
            next.scalar += ds_n;
            detail::scale_modes_by_linear_factor(next, dt, basis.constants(), params,
                                                 scheme.formulation);
            break;
        }
    }

    next.u = leray_project(std::move(next.u));
    next.t = state.t + dt;
    if (!next.all_finite())
        throw BlowUp("step: non-finite coefficients", static_cast<long>(std::llround(state.t / dt)));
    return {std::move(next), budget};
}

// ---------------------------------------------------------------------------
// Paths and trajectories
// ---------------------------------------------------------------------------

struct PathError {
    long step = 0;
    std::string kind;
    std::string message;
};

struct PathOptions {
    long save_every = 10;
    bool keep_states = false;
    /// Skip the fine-grid record entries (entropies, budget); energies, norms
    /// and margins are always recorded.
    bool light_records = false;
};

/// A sampled path: diagnostics at save points, the terminal state, the full
/// replay key (seed + scheme), and the time-integrated dissipation budget.
/// Errors terminate the path gracefully and are recorded, never thrown.
struct Trajectory {
    SchemeSpec scheme;
    std::uint64_t seed = 0;
    std::vector<DiagnosticRecord> records;
    std::vector<double> save_times;
    std::vector<SystemState> states;  // populated iff keep_states
    SystemState terminal;
    double budget_time_integral = 0;
    std::optional<PathError> error;

    explicit Trajectory(const TorusGrid& grid) : terminal(grid) {}

    bool failed() const { return error.has_value(); }
};

namespace detail {

inline DiagnosticRecord make_record(const SystemState& state, const ModelParams& params,
                                    double margin, bool light) {
    DiagnosticRecord r;
    r.t = state.t;
    r.energy = total_energy(state);
    r.admissibility_margin = margin;
    MatrixField J = jacobian(state.u);
    r.grad_u_norm = J.l2_norm();
    r.grad_psi_norm = gradient(state.scalar).l2_norm();
    if (!light) {
        auto [phys, math] = entropies(state);
        r.entropy_phys = phys;
        r.entropy_math = math;
        try {
            r.dissipation_budget = dissipation_budget(state, params);
        } catch (const PositivityViolation&) {
            r.dissipation_budget = std::nullopt;
        }
    }
    return r;
}

}  // namespace detail

/// Advance `scheme.steps` steps from `initial`, sampling noise from the
/// stream keyed by (seed, path). Deterministic given the seed; a failing step
/// marks the trajectory instead of throwing.
inline Trajectory run_path(const SystemState& initial, const SchemeSpec& scheme,
                           const NoiseBasis& basis, const ModelParams& params, std::uint64_t seed,
                           const PathOptions& opts = {}, std::uint64_t path_index = 0) {
    scheme.validate();
    Trajectory traj(initial.grid());
    traj.scheme = scheme;
    traj.seed = seed;
    RngStream path_rng(RngStream::derive(seed, 0x9A70ULL, path_index));

    const double e0 = total_energy(initial);
    double eps_diss = 0;  // eps * int (|Lap u|^2 + |Lap psi|^2) ds
    double peak = -1e300;
    SystemState state = initial;

    auto running_margin = [&](const SystemState& s, bool is_initial) {
        double load = total_energy(s) + eps_diss;
        if (!is_initial) peak = std::max(peak, load);
        double worst = peak == -1e300 ? e0 : peak;
        return e0 + params.epsilon * (s.t - initial.t) - worst;
    };

    auto save = [&](const SystemState& s, bool is_initial) {
        DiagnosticRecord r =
            detail::make_record(s, params, running_margin(s, is_initial), opts.light_records);
        traj.records.push_back(r);
        traj.save_times.push_back(s.t);
        if (opts.keep_states) traj.states.push_back(s);
    };

    save(state, true);
    const long save_every = std::max<long>(1, opts.save_every);
    for (long s = 0; s < scheme.steps; ++s) {
        try {
            NoiseIncrement inc =
                sample_increments(basis, scheme.dt, path_rng, static_cast<std::uint64_t>(s));
            StepResult res = step(state, scheme, basis, params, inc);
            traj.budget_time_integral += scheme.dt * res.budget;
            if (params.epsilon > 0) {
                double lu = laplacian(res.state.u).l2_norm();
                double ls = laplacian(res.state.scalar).l2_norm();
                eps_diss += params.epsilon * scheme.dt * (lu * lu + ls * ls);
            }
            state = std::move(res.state);
        } catch (const PositivityViolation& e) {
            traj.error = PathError{s, "positivity-violation", e.what()};
            break;
        } catch (const NonfiniteEvaluation& e) {
            traj.error = PathError{s, "nonfinite-evaluation", e.what()};
            break;
        } catch (const BlowUp& e) {
            traj.error = PathError{s, "blow-up", e.what()};
            break;
        }
        if ((s + 1) % save_every == 0 || s + 1 == scheme.steps) save(state, false);
    }
    traj.terminal = state;
    return traj;
}

/// Spec-form margin of a recorded trajectory (the final record's value).
inline double admissibility_margin(const Trajectory& traj) {
    if (traj.records.empty()) throw InvalidOperand("admissibility_margin: empty trajectory");
    return traj.records.back().admissibility_margin;
}

// ---------------------------------------------------------------------------
// Coupled-path convergence studies
// ---------------------------------------------------------------------------

struct ConvergenceTable {
    std::vector<double> dts;
    std::vector<double> differences;  // terminal L2 difference per dt
    double fitted_order = 0;
    bool degenerate = false;  // all differences at rounding level; order not fit

    bool monotone_decreasing() const {
        for (std::size_t i = 1; i < differences.size(); ++i)
            if (!(differences[i] < differences[i - 1])) return false;
        return true;
    }
};

namespace detail {

inline double fit_order(const std::vector<double>& dts, const std::vector<double>& diffs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = dts.size();
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::log(dts[i]);
        double y = std::log(diffs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = static_cast<double>(n) * sxx - sx * sx;
    return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

inline SystemState as_psi_state(const SystemState& s) {
    return s.vars == Variables::psi ? s : psi_theta_convert(s, ConvertDirection::theta_to_psi);
}

}  // namespace detail

/// Run schemeA and schemeB on the identical Brownian path at every dt in
/// dt_list (strictly decreasing, commensurate), and tabulate the terminal L2
/// differences with the fitted strong order. Coarse increments are sums of
/// the finest ones, so all runs see one underlying Brownian motion.
inline ConvergenceTable couple_paths(const SystemState& initial, const SchemeSpec& schemeA,
                                     const SchemeSpec& schemeB, const NoiseBasis& basis,
                                     const ModelParams& params, std::uint64_t seed,
                                     const std::vector<double>& dt_list) {
    if (dt_list.empty()) throw InvalidOperand("couple_paths: empty dt list");
    for (std::size_t i = 1; i < dt_list.size(); ++i)
        if (!(dt_list[i] < dt_list[i - 1]))
            throw InvalidOperand("couple_paths: dt list must be strictly decreasing");
    const double T = schemeA.t_final();
    if (std::abs(schemeB.t_final() - T) > 1e-12 * T)
        throw InvalidOperand("couple_paths: schemes disagree on the final time");
    const double dt_fine = dt_list.back();
    const long n_fine = std::lround(T / dt_fine);
    if (std::abs(n_fine * dt_fine - T) > 1e-9 * T)
        throw InvalidOperand("couple_paths: finest dt does not divide the horizon");

    RngStream path_rng(RngStream::derive(seed, 0xC09ULL, 0ULL));
    std::vector<NoiseIncrement> fine;
    fine.reserve(static_cast<std::size_t>(n_fine));
    for (long s = 0; s < n_fine; ++s)
        fine.push_back(sample_increments(basis, dt_fine, path_rng, static_cast<std::uint64_t>(s)));

    ConvergenceTable table;
    for (double dt : dt_list) {
        double ratio = dt / dt_fine;
        long q = std::lround(ratio);
        if (std::abs(ratio - static_cast<double>(q)) > 1e-9)
            throw InvalidOperand("couple_paths: dt list is not commensurate with the finest dt");
        long steps = n_fine / q;
        if (steps * q != n_fine)
            throw InvalidOperand("couple_paths: dt does not divide the horizon");

        auto run = [&](SchemeSpec scheme) {
            scheme.dt = dt;
            scheme.steps = steps;
            SystemState s = scheme.formulation == Formulation::theta_system
                                ? psi_theta_convert(initial, ConvertDirection::psi_to_theta)
                                : initial;
            for (long j = 0; j < steps; ++j) {
                NoiseIncrement inc = NoiseIncrement::zero(basis, 0.0);
                for (long f = 0; f < q; ++f)
                    inc += fine[static_cast<std::size_t>(j * q + f)];
                inc.dt = dt;  // guard against rounding in the summed dt
                s = step(s, scheme, basis, params, inc).state;
            }
            return detail::as_psi_state(s);
        };

        SystemState a = run(schemeA);
        SystemState b = run(schemeB);
        VectorField du = a.u - b.u;
        ScalarField ds = a.scalar - b.scalar;
        double diff = std::sqrt(inner_product(du, du) + inner_product(ds, ds));
        table.dts.push_back(dt);
        table.differences.push_back(diff);
    }

    double scale = 0;
    for (double d : table.differences) scale = std::max(scale, d);
    if (scale < 1e-14) {
        table.degenerate = true;
        table.fitted_order = 0;
    } else {
        table.fitted_order = detail::fit_order(table.dts, table.differences);
    }
    return table;
}

}  // namespace nsf

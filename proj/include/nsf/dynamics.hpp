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
#include <utility>

#include "nsf/noise.hpp"
#include "nsf/state.hpp"

namespace nsf {

// ---------------------------------------------------------------------------
// h_delta and the Lipschitz truncation
// ---------------------------------------------------------------------------

/// Decreasing C^1 regularization of 1/r: equal to 1/r on [delta, inf), linear
/// extension (2 delta - r)/delta^2 below (value 1/delta, slope -1/delta^2 at
/// the junction). Satisfies r h_delta(r) <= 1 on all of R and increases to
/// 1/r (r > 0) pointwise as delta decreases.
inline double h_delta(double r, double delta) {
    if (!(delta > 0)) throw InvalidOperand("h_delta: delta must be positive");
    if (r >= delta) return 1.0 / r;
    return (2.0 * delta - r) / (delta * delta);
}

/// Xi^R(x) = R x / max(R, |x|): identity below radius R, rescaled to norm R
/// above it; 2-Lipschitz.
template <class FieldT>
FieldT truncate(const FieldT& x, double R) {
    if (!(R > 0)) throw InvalidOperand("truncate: radius must be positive");
    double nrm = x.l2_norm();
    if (nrm <= R) return x;
    FieldT out = x;
    out *= R / nrm;
    return out;
}

inline SystemState truncate(const SystemState& state, double R) {
    if (!(R > 0)) throw InvalidOperand("truncate: radius must be positive");
    double nu = state.u.l2_norm();
    double ns = state.scalar.l2_norm();
    double nrm = std::sqrt(nu * nu + ns * ns);
    if (nrm <= R) return state;
    SystemState out = state;
    out.u *= R / nrm;
    out.scalar *= R / nrm;
    return out;
}

// ---------------------------------------------------------------------------
// Drift assembly
// ---------------------------------------------------------------------------

enum class Formulation { psi_system, theta_system, galerkin };

inline const char* to_string(Formulation f) {
    switch (f) {
        case Formulation::psi_system: return "psi_system";
        case Formulation::theta_system: return "theta_system";
        case Formulation::galerkin: return "galerkin";
    }
    return "?";
}

/// Assembled drift fields plus the spatial integral of the gradient
/// nonlinearity (the dissipation-budget integrand), which falls out of the
/// assembly for free as the mode-0 coefficient.
struct Drift {
    VectorField du;
    ScalarField dscalar;
    double budget = 0;

    explicit Drift(const TorusGrid& grid) : du(grid), dscalar(grid) {}
};

namespace detail {

/// Pointwise |grad s|^2 on the n^3 grid.
inline std::vector<double> grad_sq_values(const ScalarField& s, int n) {
    VectorField g = gradient(s);
    std::vector<double> acc = g[0].values(n);
    for (auto& v : acc) v *= v;
    for (int i = 1; i < 3; ++i) {
        std::vector<double> gi = g[i].values(n);
        for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += gi[p] * gi[p];
    }
    return acc;
}

/// Pointwise |grad_sym u|^2 on the n^3 grid (six unique components).
inline std::vector<double> sym_grad_sq_values(const VectorField& u, int n) {
    MatrixField S = sym_gradient(u);
    std::vector<double> acc(static_cast<std::size_t>(n) * n * n, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            std::vector<double> v = S(i, j).values(n);
            const double w = i == j ? 1.0 : 2.0;
            for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += w * v[p] * v[p];
        }
    return acc;
}

/// -Pi div(u (x) u), dealiased.
inline VectorField convection_u(const VectorField& u) {
    return leray_project(-divergence(outer_product(u, u, true)));
}

/// -div(u s), dealiased.
inline ScalarField convection_scalar(const VectorField& u, const ScalarField& s) {
    return -divergence(multiply(s, u, true));
}

inline void check_positive(const ScalarField& s, const char* what) {
    MinValue mv = min_collocation_value(s, s.grid().fine_factor());
    if (!(mv.value > 0))
        throw PositivityViolation(std::string(what) + ": non-positive scalar on collocation grid",
                                  mv.location, mv.value);
}

}  // namespace detail

/// Linear part of the Ito drifts (heat, biharmonic, damping); exact mode-wise.
inline Drift linear_drift(const SystemState& state, const NoiseConstants& nc,
                          const ModelParams& params, Formulation form) {
    const bool galerkin = form == Formulation::galerkin;
    const bool theta = form == Formulation::theta_system;
    const double eps = galerkin ? params.epsilon : 0.0;
    const double heat_s = 1.0 + nc.F1 / 2.0 + nc.G1 / 2.0;
    const double damp = theta ? nc.F2 : nc.F2 / 2.0 + nc.G2 / 8.0;

    Drift d(state.grid());
    // div(grad_sym u) + (F1/4) Lap u, assembled literally so no
    // divergence-free assumption enters.
    d.du = divergence(sym_gradient(state.u));
    d.du.axpy(nc.F1 / 4.0, laplacian(state.u));
    if (eps != 0.0) d.du.axpy(-eps, biharmonic(state.u));

    d.dscalar = laplacian(state.scalar);
    d.dscalar *= heat_s;
    if (eps != 0.0) d.dscalar.axpy(-eps, biharmonic(state.scalar));
    d.dscalar.axpy(-damp, state.scalar);
    return d;
}

/// Exact per-mode decay rates of the linear part, for integrating-factor
/// stepping: d/dt x_hat(k) = -lambda(k) x_hat(k).
inline double linear_lambda_u(Wavevector k, const NoiseConstants& nc, const ModelParams& params,
                              Formulation form) {
    double k2 = 4.0 * pi * pi * k.norm2();
    double lam = (0.5 + nc.F1 / 4.0) * k2;
    if (form == Formulation::galerkin) lam += params.epsilon * k2 * k2;
    return lam;
}

inline double linear_lambda_scalar(Wavevector k, const NoiseConstants& nc,
                                   const ModelParams& params, Formulation form) {
    double k2 = 4.0 * pi * pi * k.norm2();
    double lam = (1.0 + nc.F1 / 2.0 + nc.G1 / 2.0) * k2;
    if (form == Formulation::galerkin) lam += params.epsilon * k2 * k2;
    lam += form == Formulation::theta_system ? nc.F2 : nc.F2 / 2.0 + nc.G2 / 8.0;
    return lam;
}

/// Nonlinear + convective remainder of the Ito drifts. For psi_system the
/// exact 1/psi is used (positivity required on the refined grid, Convention
/// "1/psi = infinity on {psi <= 0}"); galerkin uses the total h_delta and
/// requires nothing.
inline Drift explicit_drift(const SystemState& state, const NoiseConstants& nc,
                            const ModelParams& params, Formulation form) {
    const TorusGrid& grid = state.grid();
    const int fine = grid.fine_factor() * grid.points();
    Drift d(grid);

    if (form == Formulation::theta_system) {
        const ScalarField& theta = state.theta();
        std::vector<double> tv = theta.values(fine);
        std::size_t arg = 0;
        for (std::size_t p = 1; p < tv.size(); ++p)
            if (tv[p] < tv[arg]) arg = p;
        if (!(tv[arg] > 0))
            throw PositivityViolation("theta_system drift: non-positive temperature",
                                      detail::grid_point(arg, fine), tv[arg]);
        std::vector<double> su = detail::sym_grad_sq_values(state.u, fine);
        std::vector<double> gt = detail::grad_sq_values(theta, fine);
        // (1 + F1/2)|grad_sym u|^2 - F1 |grad sqrt(theta)|^2, the square root
        // evaluated as |grad theta|^2/(4 theta) pointwise.
        for (std::size_t p = 0; p < tv.size(); ++p)
            su[p] = (1.0 + nc.F1 / 2.0) * su[p] - nc.F1 * gt[p] / (4.0 * tv[p]);
        d.dscalar = ScalarField::from_values(grid, su, fine);
        d.dscalar += detail::convection_scalar(state.u, theta);
        d.du = detail::convection_u(state.u);
        d.budget = 0;  // the budget integrand is defined in the psi variables
        return d;
    }

    const ScalarField& psi = state.psi();
    std::vector<double> pv = psi.values(fine);
    std::vector<double> gp = detail::grad_sq_values(psi, fine);
    std::vector<double> su = detail::sym_grad_sq_values(state.u, fine);

    if (form == Formulation::galerkin) {
        if (!params.delta) throw InvalidOperand("galerkin drift requires params.delta");
        const double delta = *params.delta;
        const double eps = params.epsilon;
        for (std::size_t p = 0; p < pv.size(); ++p)
            gp[p] = h_delta(pv[p], delta) * (gp[p] + su[p] + eps);
    } else {
        std::size_t arg = 0;
        for (std::size_t p = 1; p < pv.size(); ++p)
            if (pv[p] < pv[arg]) arg = p;
        if (!(pv[arg] > 0))
            throw PositivityViolation("psi_system drift: non-positive psi on collocation grid",
                                      detail::grid_point(arg, fine), pv[arg]);
        for (std::size_t p = 0; p < pv.size(); ++p) gp[p] = (gp[p] + su[p]) / pv[p];
    }
    ScalarField nonlinear = ScalarField::from_values(grid, gp, fine);
    d.budget = integral(nonlinear);
    d.dscalar = std::move(nonlinear);
    d.dscalar += detail::convection_scalar(state.u, psi);
    d.du = detail::convection_u(state.u);
    return d;
}

/// Full Ito drift of Eq-by-Eq assembly; formulation selects the (u,psi)
/// system, the temperature system, or the (delta,eps)-regularized Galerkin
/// system. linear_only drops the nonlinear remainder (diagnostic switch).
inline Drift drift_ito(const SystemState& state, const NoiseConstants& nc,
                       const ModelParams& params, Formulation form, bool linear_only = false) {
    if (params.truncation_radius && form != Formulation::galerkin && !linear_only) {
        // Fixed-point-style composition: the nonlinearities see the truncated state.
        Drift lin = linear_drift(state, nc, params, form);
        Drift rem = explicit_drift(truncate(state, *params.truncation_radius), nc, params, form);
        lin.du += rem.du;
        lin.du = leray_project(std::move(lin.du));
        lin.dscalar += rem.dscalar;
        lin.budget = rem.budget;
        return lin;
    }
    Drift d = linear_drift(state, nc, params, form);
    if (!linear_only) {
        Drift rem = explicit_drift(state, nc, params, form);
        d.du += rem.du;
        d.dscalar += rem.dscalar;
        d.budget = rem.budget;
    }
    d.du = leray_project(std::move(d.du));
    return d;
}

inline Drift drift_galerkin(const SystemState& state, const NoiseConstants& nc,
                            const ModelParams& params, bool linear_only = false) {
    return drift_ito(state, nc, params, Formulation::galerkin, linear_only);
}

/// Stratonovich drift of the (u,psi) equations: no Ito corrections at all;
/// the noise enters only through the integrator's midpoint rule.
inline Drift drift_stratonovich(const SystemState& state, bool linear_only = false) {
    const TorusGrid& grid = state.grid();
    Drift d(grid);
    d.du = divergence(sym_gradient(state.u));
    d.dscalar = laplacian(state.psi());
    if (!linear_only) {
        const int fine = grid.fine_factor() * grid.points();
        const ScalarField& psi = state.psi();
        std::vector<double> pv = psi.values(fine);
        std::size_t arg = 0;
        for (std::size_t p = 1; p < pv.size(); ++p)
            if (pv[p] < pv[arg]) arg = p;
        if (!(pv[arg] > 0))
            throw PositivityViolation("stratonovich drift: non-positive psi on collocation grid",
                                      detail::grid_point(arg, fine), pv[arg]);
        std::vector<double> gp = detail::grad_sq_values(psi, fine);
        std::vector<double> su = detail::sym_grad_sq_values(state.u, fine);
        for (std::size_t p = 0; p < pv.size(); ++p) gp[p] = (gp[p] + su[p]) / pv[p];
        ScalarField nonlinear = ScalarField::from_values(grid, gp, fine);
        d.budget = integral(nonlinear);
        d.dscalar += nonlinear;
        d.dscalar += detail::convection_scalar(state.u, psi);
        d.du += detail::convection_u(state.u);
    }
    d.du = leray_project(std::move(d.du));
    return d;
}

// ---------------------------------------------------------------------------
// Windowed nonlinearities for the truncated fixed-point system
// ---------------------------------------------------------------------------

namespace detail {

/// C^infty step: 0 for t <= 0, 1 for t >= 1.
inline double smooth_step(double t) {
    if (t <= 0) return 0;
    if (t >= 1) return 1;
    double a = std::exp(-1.0 / t);
    double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

}  // namespace detail

/// Smooth compactly supported modification of 1/r: equals 1/r on
/// (chi_l, chi_u), vanishes outside [chi_l/2, 2 chi_u].
inline double windowed_inverse(double r, double chi_l, double chi_u) {
    if (!(0 < chi_l && chi_l < chi_u))
        throw InvalidOperand("windowed_inverse: need 0 < chi_l < chi_u");
    if (r <= chi_l / 2 || r >= 2 * chi_u) return 0;
    double w = 1.0;
    if (r < chi_l) w = detail::smooth_step((r - chi_l / 2) / (chi_l / 2));
    else if (r > chi_u) w = detail::smooth_step((2 * chi_u - r) / chi_u);
    return w / r;
}

/// N1(U) = -Pi div(U (x) U) and
/// N2(U,Psi) = h(Psi)|grad Psi|^2 + h(Psi)|grad_sym U|^2 - div(U Psi),
/// with h the windowed 1/r; total on all states.
inline std::pair<VectorField, ScalarField> nonlinearity_N(const SystemState& state, double chi_l,
                                                          double chi_u) {
    const TorusGrid& grid = state.grid();
    const int fine = grid.fine_factor() * grid.points();
    const ScalarField& psi = state.psi();
    std::vector<double> pv = psi.values(fine);
    std::vector<double> gp = detail::grad_sq_values(psi, fine);
    std::vector<double> su = detail::sym_grad_sq_values(state.u, fine);
    for (std::size_t p = 0; p < pv.size(); ++p)
        gp[p] = windowed_inverse(pv[p], chi_l, chi_u) * (gp[p] + su[p]);
    ScalarField n2 = ScalarField::from_values(grid, gp, fine);
    n2 += detail::convection_scalar(state.u, psi);
    VectorField n1 = detail::convection_u(state.u);
    return {std::move(n1), std::move(n2)};
}

}  // namespace nsf

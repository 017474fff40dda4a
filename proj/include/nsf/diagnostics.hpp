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

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "nsf/dynamics.hpp"

namespace nsf {

/// Per-save-point diagnostic row. Optional entries serialize as empty CSV
/// cells; entropy_phys is absent whenever min theta <= 0 (kept numeric-clean
/// instead of -inf), relative_energy only exists in twin-run experiments.
struct DiagnosticRecord {
    double t = 0;
    double energy = 0;
    std::optional<double> entropy_phys;
    double entropy_math = 0;
    std::optional<double> dissipation_budget;
    double admissibility_margin = 0;
    std::optional<double> relative_energy;
    double grad_u_norm = 0;
    double grad_psi_norm = 0;
};

/// Total energy: (1/2) int |u|^2 + psi^2 dx in the square-root variables, or
/// equivalently int (1/2)|u|^2 + theta dx for a temperature state.
inline double total_energy(const SystemState& state) {
    double eu = inner_product(state.u, state.u);
    if (state.vars == Variables::psi) {
        double es = inner_product(state.scalar, state.scalar);
        return 0.5 * (eu + es);
    }
    return 0.5 * eu + integral(state.scalar);
}

/// Physical entropy int log(theta) dx (absent unless min theta > 0 on the
/// refined grid) and the mathematical entropy -int sqrt(2 theta) dx,
/// evaluated as -int |psi| dx so it is total.
inline std::pair<std::optional<double>, double> entropies(const SystemState& state) {
    const TorusGrid& grid = state.grid();
    const int n = grid.fine_factor() * grid.points();
    std::vector<double> v = state.scalar.values(n);
    double log_sum = 0, abs_sum = 0;
    bool positive = true;
    if (state.vars == Variables::psi) {
        for (double x : v) {
            double theta = 0.5 * x * x;
            if (theta <= 0) positive = false;
            else log_sum += std::log(theta);
            abs_sum += std::abs(x);
        }
    } else {
        for (double x : v) {
            if (x <= 0) positive = false;
            else log_sum += std::log(x);
            abs_sum += std::sqrt(2.0 * std::max(0.0, x));
        }
    }
    double inv = 1.0 / static_cast<double>(v.size());
    std::optional<double> phys;
    if (positive) phys = log_sum * inv;
    return {phys, -abs_sum * inv};
}

/// Dissipation budget: int h_delta(psi)(|grad psi|^2 + |grad_sym u|^2 + eps) dx
/// when params.delta is present (the regularized-scheme variant), else the
/// exact int (1/psi)(|grad psi|^2 + |grad_sym u|^2) dx, which requires psi > 0
/// on the refined grid.
inline double dissipation_budget(const SystemState& state, const ModelParams& params) {
    if (state.vars == Variables::theta)
        return dissipation_budget(psi_theta_convert(state, ConvertDirection::theta_to_psi), params);
    const TorusGrid& grid = state.grid();
    const int n = grid.fine_factor() * grid.points();
    const ScalarField& psi = state.scalar;
    std::vector<double> pv = psi.values(n);
    std::vector<double> gp = detail::grad_sq_values(psi, n);
    std::vector<double> su = detail::sym_grad_sq_values(state.u, n);
    if (params.delta) {
        const double delta = *params.delta;
        for (std::size_t p = 0; p < pv.size(); ++p)
            gp[p] = h_delta(pv[p], delta) * (gp[p] + su[p] + params.epsilon);
    } else {
        std::size_t arg = 0;
        for (std::size_t p = 1; p < pv.size(); ++p)
            if (pv[p] < pv[arg]) arg = p;
        if (!(pv[arg] > 0))
            throw PositivityViolation("dissipation_budget: non-positive psi",
                                      detail::grid_point(arg, n), pv[arg]);
        for (std::size_t p = 0; p < pv.size(); ++p) gp[p] = (gp[p] + su[p]) / pv[p];
    }
    return detail::compensated_mean(gp);
}

/// Admissibility margin of a sampled path from (t, energy, accumulated
/// eps int(|Lap u|^2+|Lap psi|^2)) triples:
///   E(0) + eps t_max - max over later samples of [E(t) + eps D(t)].
/// Positive margin = the discrete path respects the pathwise energy estimate.
struct MarginSample {
    double t;
    double energy;
    double eps_dissipation;  // eps * int_0^t (|Lap u|^2 + |Lap psi|^2) ds
};

inline double admissibility_margin(const std::vector<MarginSample>& samples, double eps) {
    if (samples.empty()) throw InvalidOperand("admissibility_margin: empty trajectory");
    const MarginSample& first = samples.front();
    double t_max = samples.back().t - first.t;
    double worst = -1e300;
    for (std::size_t i = 1; i < samples.size(); ++i)
        worst = std::max(worst, samples[i].energy + samples[i].eps_dissipation);
    if (samples.size() == 1) worst = first.energy + first.eps_dissipation;
    return first.energy + eps * t_max - worst;
}

/// Relative energy (1/2) int |u - V|^2 + |psi - Phi|^2 dx.
inline double relative_energy(const SystemState& state, const SystemState& reference) {
    require_same_grid(state.grid(), reference.grid(), "relative_energy");
    VectorField du = state.u - reference.u;
    ScalarField ds = state.scalar - reference.scalar;
    return 0.5 * (inner_product(du, du) + inner_product(ds, ds));
}

/// Gronwall envelope of the relative-energy estimate:
///   bound(t) = exp((2 max_{s<=t} |grad_sym V(s)|_inf + max_{s<=t} |grad Phi(s)|_inf) t) E0.
/// Sup norms are taken over the refined collocation grid of the saved
/// reference states (a lower bound on the true sup; the acceptance tolerance
/// absorbs the gap).
class GronwallEnvelope {
public:
    GronwallEnvelope(const std::vector<SystemState>& reference_states,
                     const std::vector<double>& times, double initial_relative_energy)
        : e0_(initial_relative_energy) {
        if (reference_states.empty() || reference_states.size() != times.size())
            throw InvalidOperand("gronwall_envelope: empty or inconsistent reference trajectory");
        times_ = times;
        double sym_running = 0, grad_running = 0;
        for (const SystemState& s : reference_states) {
            const TorusGrid& g = s.grid();
            int n = g.fine_factor() * g.points();
            MatrixField S = sym_gradient(s.u);
            std::vector<double> frob(static_cast<std::size_t>(n) * n * n, 0.0);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    std::vector<double> v = S(i, j).values(n);
                    for (std::size_t p = 0; p < frob.size(); ++p) frob[p] += v[p] * v[p];
                }
            double sym_sup = 0;
            for (double x : frob) sym_sup = std::max(sym_sup, x);
            sym_sup = std::sqrt(sym_sup);

            std::vector<double> gp = detail::grad_sq_values(s.psi(), n);
            double grad_sup = 0;
            for (double x : gp) grad_sup = std::max(grad_sup, x);
            grad_sup = std::sqrt(grad_sup);

            sym_running = std::max(sym_running, sym_sup);
            grad_running = std::max(grad_running, grad_sup);
            sym_sup_.push_back(sym_running);
            grad_sup_.push_back(grad_running);
        }
    }

    double initial_relative_energy() const { return e0_; }

    /// Envelope value at time t (>= first saved time).
    double operator()(double t) const {
        std::size_t i = 0;
        while (i + 1 < times_.size() && times_[i + 1] <= t + 1e-15) ++i;
        double rate = 2.0 * sym_sup_[i] + grad_sup_[i];
        return std::exp(rate * (t - times_.front())) * e0_;
    }

private:
    double e0_;
    std::vector<double> times_;
    std::vector<double> sym_sup_, grad_sup_;
};

/// The three deterministic terms of the entropy drift of -int log(theta) dx:
///   (3 F1/2 - 1) int (1/theta)|grad_sym u|^2
/// - (F1/4 + 1)   int (1/theta)|grad theta|^2
/// - (F2 + G2/2).
/// Exposes the symbolic coefficients, the evaluated integrals, and the
/// integrand fields.
struct EntropyDriftDecomposition {
    double velocity_coefficient = 0;  // 3 F1/2 - 1
    double gradient_coefficient = 0;  // -(F1/4 + 1)
    double constant_term = 0;         // -(F2 + G2/2)
    double velocity_integral = 0;     // int (1/theta)|grad_sym u|^2
    double gradient_integral = 0;     // int (1/theta)|grad theta|^2
    ScalarField velocity_field;
    ScalarField gradient_field;

    double total() const {
        return velocity_coefficient * velocity_integral +
               gradient_coefficient * gradient_integral + constant_term;
    }
};

inline EntropyDriftDecomposition entropy_drift_decomposition(const SystemState& state,
                                                             const NoiseConstants& nc) {
    const TorusGrid& grid = state.grid();
    const int n = grid.fine_factor() * grid.points();
    SystemState th = state.vars == Variables::theta
                         ? state
                         : psi_theta_convert(state, ConvertDirection::psi_to_theta);
    std::vector<double> tv = th.scalar.values(n);
    std::size_t arg = 0;
    for (std::size_t p = 1; p < tv.size(); ++p)
        if (tv[p] < tv[arg]) arg = p;
    if (!(tv[arg] > 0))
        throw PositivityViolation("entropy_drift_decomposition: non-positive temperature",
                                  detail::grid_point(arg, n), tv[arg]);
    std::vector<double> su = detail::sym_grad_sq_values(state.u, n);
    std::vector<double> gt = detail::grad_sq_values(th.scalar, n);
    for (std::size_t p = 0; p < tv.size(); ++p) {
        su[p] /= tv[p];
        gt[p] /= tv[p];
    }
    EntropyDriftDecomposition out{3.0 * nc.F1 / 2.0 - 1.0,
                                  -(nc.F1 / 4.0 + 1.0),
                                  -(nc.F2 + nc.G2 / 2.0),
                                  0,
                                  0,
                                  ScalarField::from_values(grid, su, n),
                                  ScalarField::from_values(grid, gt, n)};
    out.velocity_integral = integral(out.velocity_field);
    out.gradient_integral = integral(out.gradient_field);
    return out;
}

/// Deterministic right-hand side of the Ito expansion of the relative energy
/// of (u,psi) with respect to (V,Phi); the defect measure is represented by
/// the exact dissipation integrand of the state (the equality case the
/// constructed solutions satisfy). Vanishes when state == reference.
inline double relative_energy_rhs(const SystemState& state, const SystemState& reference) {
    require_same_grid(state.grid(), reference.grid(), "relative_energy_rhs");
    const TorusGrid& grid = state.grid();
    const int n = grid.fine_factor() * grid.points();
    const ScalarField& psi = state.psi();
    const ScalarField& phi = reference.psi();
    const VectorField& u = state.u;
    const VectorField& V = reference.u;

    std::vector<double> phi_v = phi.values(n);
    std::size_t arg = 0;
    for (std::size_t p = 1; p < phi_v.size(); ++p)
        if (phi_v[p] < phi_v[arg]) arg = p;
    if (!(phi_v[arg] > 0))
        throw PositivityViolation("relative_energy_rhs: non-positive reference Phi",
                                  detail::grid_point(arg, n), phi_v[arg]);
    std::vector<double> psi_v = psi.values(n);
    arg = 0;
    for (std::size_t p = 1; p < psi_v.size(); ++p)
        if (psi_v[p] < psi_v[arg]) arg = p;
    if (!(psi_v[arg] > 0))
        throw PositivityViolation("relative_energy_rhs: non-positive psi",
                                  detail::grid_point(arg, n), psi_v[arg]);

    // 2 int grad_sym V : grad_sym u + grad psi . grad Phi
    double cross = 2.0 * (inner_product(sym_gradient(V), sym_gradient(u)) +
                          inner_product(gradient(psi), gradient(phi)));

    // - int (psi/Phi)(|grad Phi|^2 + |grad_sym V|^2)
    std::vector<double> gphi = detail::grad_sq_values(phi, n);
    std::vector<double> sV = detail::sym_grad_sq_values(V, n);
    double ref_diss = 0;
    for (std::size_t p = 0; p < phi_v.size(); ++p)
        ref_diss += psi_v[p] / phi_v[p] * (gphi[p] + sV[p]);
    ref_diss /= static_cast<double>(phi_v.size());

    // - int Phi dq with dq = (1/psi)(|grad psi|^2 + |grad_sym u|^2) dx dt
    std::vector<double> gpsi = detail::grad_sq_values(psi, n);
    std::vector<double> sU = detail::sym_grad_sq_values(u, n);
    double defect = 0;
    for (std::size_t p = 0; p < psi_v.size(); ++p)
        defect += phi_v[p] / psi_v[p] * (gpsi[p] + sU[p]);
    defect /= static_cast<double>(psi_v.size());

    // + int u.((V.grad)V) - grad V : u (x) u
    VectorField VgradV(grid);
    {
        MatrixField JV = jacobian(V);  // (JV)_{ij} = d_i V_j
        int nd = grid.dealias_n();
        std::array<std::vector<double>, 3> Vv{V[0].values(nd), V[1].values(nd), V[2].values(nd)};
        for (int j = 0; j < 3; ++j) {
            std::vector<double> acc(Vv[0].size(), 0.0);
            for (int i = 0; i < 3; ++i) {
                std::vector<double> dv = JV(i, j).values(nd);
                for (std::size_t p = 0; p < acc.size(); ++p)
                    acc[p] += Vv[static_cast<std::size_t>(i)][p] * dv[p];
            }
            VgradV[j] = ScalarField::from_values(grid, acc, nd);
        }
    }
    double convective = inner_product(u, VgradV) -
                        inner_product(jacobian(V), outer_product(u, u, true));

    // + int psi V.grad Phi - grad Phi . (psi u)
    double transport = inner_product(psi, dot(V, gradient(phi), true)) -
                       inner_product(gradient(phi), multiply(psi, u, true));

    return cross - ref_diss - defect + convective + transport;
}

}  // namespace nsf

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
#include <optional>

#include "nsf/spectral_ops.hpp"

namespace nsf {

/// Which scalar variable the state carries: psi = sqrt(2 theta) or the
/// temperature theta itself.
enum class Variables { psi, theta };

/// System state (u, scalar, t). u is kept divergence-free; no positivity is
/// imposed on psi (the regularized scheme may take it negative).
struct SystemState {
    VectorField u;
    ScalarField scalar;
    double t = 0;
    Variables vars = Variables::psi;

    SystemState(VectorField velocity, ScalarField s, double time = 0,
                Variables v = Variables::psi)
        : u(std::move(velocity)), scalar(std::move(s)), t(time), vars(v) {}

    explicit SystemState(const TorusGrid& grid)
        : u(grid), scalar(grid) {
        u.set_divergence_free(true);
    }

    const TorusGrid& grid() const { return scalar.grid(); }

    const ScalarField& psi() const {
        if (vars != Variables::psi) throw InvalidOperand("state holds theta, not psi");
        return scalar;
    }
    const ScalarField& theta() const {
        if (vars != Variables::theta) throw InvalidOperand("state holds psi, not theta");
        return scalar;
    }

    bool all_finite() const { return u.all_finite() && scalar.all_finite(); }
};

/// Regularization parameters of the approximating system. delta switches the
/// dissipation integrand to h_delta when present; epsilon adds the biharmonic
/// terms and the +epsilon inside the Galerkin nonlinearity.
struct ModelParams {
    std::optional<double> delta;
    double epsilon = 0.0;
    std::optional<double> truncation_radius;
};

enum class ConvertDirection { psi_to_theta, theta_to_psi };

/// Pointwise change of variables theta = psi^2/2 (and back, psi = sqrt(2
/// theta)) on the refined collocation grid, truncated to the cutoff. The
/// round trip on positive band-limited psi reproduces psi only up to this
/// truncation error; callers can measure it, nothing is hidden.
inline SystemState psi_theta_convert(const SystemState& state, ConvertDirection dir) {
    const int fine = state.grid().fine_factor();
    if (dir == ConvertDirection::psi_to_theta) {
        const ScalarField& psi = state.psi();
        ScalarField theta =
            evaluate_nonlinear(psi, [](double r) { return 0.5 * r * r; }, fine);
        SystemState out(state.u, std::move(theta), state.t, Variables::theta);
        return out;
    }
    const ScalarField& theta = state.theta();
    MinValue mv = min_collocation_value(theta, fine);
    if (mv.value < 0)
        throw PositivityViolation("psi_theta_convert: negative temperature", mv.location, mv.value);
    ScalarField psi = evaluate_nonlinear(
        theta, [](double r) { return std::sqrt(std::max(0.0, 2.0 * r)); }, fine);
    return SystemState(state.u, std::move(psi), state.t, Variables::psi);
}

}  // namespace nsf

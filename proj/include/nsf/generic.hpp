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

#include "nsf/state.hpp"

namespace nsf {

/// State z = (u, theta) of the metriplectic formulation; theta strictly
/// positive on the collocation grid wherever an operator needs it.
struct GenericState {
    VectorField u;
    ScalarField theta;

    GenericState(VectorField velocity, ScalarField temperature)
        : u(std::move(velocity)), theta(std::move(temperature)) {}

    const TorusGrid& grid() const { return theta.grid(); }
};

/// A functional-gradient direction w = (v, theta). v need not be
/// divergence-free; the operators project it internally, matching the
/// velocity components living in the divergence-free subspace.
struct CoVector {
    VectorField v;
    ScalarField theta;

    explicit CoVector(const TorusGrid& grid) : v(grid), theta(grid) {}
    CoVector(VectorField vel, ScalarField th) : v(std::move(vel)), theta(std::move(th)) {}

    const TorusGrid& grid() const { return theta.grid(); }

    CoVector& operator+=(const CoVector& o) {
        v += o.v;
        theta += o.theta;
        return *this;
    }
    friend CoVector operator+(CoVector a, const CoVector& b) { return a += b; }
    friend CoVector operator-(CoVector a, const CoVector& b) {
        a.v -= b.v;
        a.theta -= b.theta;
        return a;
    }

    double l2_norm() const {
        double nv = v.l2_norm();
        double nt = theta.l2_norm();
        return std::sqrt(nv * nv + nt * nt);
    }
};

inline double inner_product(const CoVector& a, const CoVector& b) {
    return inner_product(a.v, b.v) + inner_product(a.theta, b.theta);
}

namespace detail {

/// Pointwise scalar * matrix, dealiased.
inline MatrixField scale_matrix(const ScalarField& s, const MatrixField& M) {
    MatrixField out(M.grid());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out(i, j) = multiply(s, M(i, j), true);
    return out;
}

/// ((grad v) . u)_i = sum_k u_k d_i v_k, dealiased.
inline VectorField grad_dot(const VectorField& v, const VectorField& u) {
    const TorusGrid& g = v.grid();
    int nd = g.dealias_n();
    std::array<std::vector<double>, 3> uv{u[0].values(nd), u[1].values(nd), u[2].values(nd)};
    VectorField out(g);
    for (int i = 0; i < 3; ++i) {
        std::vector<double> acc(uv[0].size(), 0.0);
        for (int k = 0; k < 3; ++k) {
            std::vector<double> dv = partial(v[k], i).values(nd);
            for (std::size_t p = 0; p < acc.size(); ++p)
                acc[p] += uv[static_cast<std::size_t>(k)][p] * dv[p];
        }
        out[i] = ScalarField::from_values(g, acc, nd);
    }
    return out;
}

/// Directional derivative (a . grad) of each component of w, dealiased.
inline CoVector advect(const VectorField& a, const CoVector& w) {
    const TorusGrid& g = w.grid();
    int nd = g.dealias_n();
    std::array<std::vector<double>, 3> av{a[0].values(nd), a[1].values(nd), a[2].values(nd)};
    auto directional = [&](const ScalarField& c) {
        std::vector<double> acc(av[0].size(), 0.0);
        for (int i = 0; i < 3; ++i) {
            std::vector<double> dc = partial(c, i).values(nd);
            for (std::size_t p = 0; p < acc.size(); ++p)
                acc[p] += av[static_cast<std::size_t>(i)][p] * dc[p];
        }
        return ScalarField::from_values(g, acc, nd);
    };
    CoVector out(g);
    for (int i = 0; i < 3; ++i) out.v[i] = directional(w.v[i]);
    out.theta = directional(w.theta);
    return out;
}

inline ScalarField sqrt_theta_field(const GenericState& z) {
    MinValue mv = min_collocation_value(z.theta, z.grid().fine_factor());
    if (mv.value < 0)
        throw PositivityViolation("generic operator: negative temperature", mv.location, mv.value);
    return evaluate_nonlinear(
        z.theta, [](double r) { return std::sqrt(std::max(0.0, r)); }, z.grid().fine_factor());
}

}  // namespace detail

/// The antisymmetric operator L of the GENERIC form:
///   row 1: -Pi(div(v (x) u) + (grad v).u) - Pi(theta_z grad theta_w)
///   row 2: -div(theta_z v)
inline CoVector apply_L(const GenericState& z, const CoVector& w) {
    require_same_grid(z.grid(), w.grid(), "apply_L");
    VectorField v = leray_project(w.v);
    CoVector out(z.grid());
    VectorField row1 = divergence(outer_product(v, z.u, true));
    row1 += detail::grad_dot(v, z.u);
    row1 += multiply(z.theta, gradient(w.theta), true);
    out.v = leray_project(-row1);
    out.theta = -divergence(multiply(z.theta, v, true));
    return out;
}

/// The symmetric nonnegative operator M:
///   row 1: -Pi div(theta grad_sym v) + Pi div(theta theta_w grad_sym u)
///   row 2: -theta grad_sym u : grad v + theta |grad_sym u|^2 theta_w
///          - div(theta^2 grad theta_w)
inline CoVector apply_M(const GenericState& z, const CoVector& w) {
    require_same_grid(z.grid(), w.grid(), "apply_M");
    VectorField v = leray_project(w.v);
    const MatrixField Su = sym_gradient(z.u);
    CoVector out(z.grid());

    MatrixField flux = detail::scale_matrix(z.theta, sym_gradient(v));
    flux -= detail::scale_matrix(multiply(z.theta, w.theta, true), Su);
    out.v = leray_project(-divergence(flux));

    ScalarField t1 = multiply(z.theta, double_dot(Su, jacobian(v), true), true);
    ScalarField t2 = multiply(multiply(z.theta, double_dot(Su, Su, true), true), w.theta, true);
    ScalarField theta_sq = multiply(z.theta, z.theta, true);
    ScalarField t3 = divergence(multiply(theta_sq, gradient(w.theta), true));
    out.theta = t2 - t1 - t3;
    return out;
}

/// Noise-factorization operator B acting on (matrix field, vector field):
///   row 1: -Pi div(sqrt(theta) xi_sym)
///   row 2: -sqrt(theta) grad_sym u : xi_mat - div(theta xi_vec)
inline CoVector apply_B(const GenericState& z, const MatrixField& xi_mat,
                        const VectorField& xi_vec) {
    require_same_grid(z.grid(), xi_mat.grid(), "apply_B");
    ScalarField root = detail::sqrt_theta_field(z);
    CoVector out(z.grid());
    out.v = leray_project(-divergence(detail::scale_matrix(root, xi_mat.symmetrized())));
    ScalarField work = multiply(root, double_dot(sym_gradient(z.u), xi_mat, true), true);
    out.theta = -work - divergence(multiply(z.theta, xi_vec, true));
    return out;
}

/// Adjoint B^T w = (sqrt(theta) grad_sym v - sqrt(theta) theta_w grad_sym u,
///                  theta grad theta_w).
inline std::pair<MatrixField, VectorField> apply_B_transpose(const GenericState& z,
                                                             const CoVector& w) {
    require_same_grid(z.grid(), w.grid(), "apply_B_transpose");
    ScalarField root = detail::sqrt_theta_field(z);
    VectorField v = leray_project(w.v);
    MatrixField mat = detail::scale_matrix(root, sym_gradient(v));
    mat -= detail::scale_matrix(multiply(root, w.theta, true), sym_gradient(z.u));
    VectorField vec = multiply(z.theta, gradient(w.theta), true);
    return {std::move(mat), std::move(vec)};
}

/// Functional derivatives of the energy and entropy in (u, theta):
/// dE/dz = (u, 1), dS/dz = (0, 1/theta).
inline CoVector energy_covector(const GenericState& z) {
    CoVector w(z.grid());
    w.v = z.u;
    w.theta = ScalarField::constant(z.grid(), 1.0);
    return w;
}

inline CoVector entropy_covector(const GenericState& z) {
    MinValue mv = min_collocation_value(z.theta, z.grid().fine_factor());
    if (!(mv.value > 0))
        throw PositivityViolation("entropy_covector: non-positive temperature", mv.location,
                                  mv.value);
    CoVector w(z.grid());
    w.theta = evaluate_nonlinear(
        z.theta, [](double r) { return 1.0 / r; }, z.grid().fine_factor());
    return w;
}

/// The pointwise bracket of covector fields:
///   {w1, w2}_x = (v2 . grad)(v1, theta1) - (v1 . grad)(v2, theta2).
inline CoVector bracket_x(const CoVector& w1, const CoVector& w2) {
    require_same_grid(w1.grid(), w2.grid(), "bracket_x");
    return detail::advect(w2.v, w1) - detail::advect(w1.v, w2);
}

/// L2 residual of Jacobi's identity for the pointwise bracket, relative to
/// the largest single double-bracket norm. Covectors must be band-limited
/// with cutoff <= m/3 so the double bracket stays inside the grid.
inline double jacobi_residual(const CoVector& w1, const CoVector& w2, const CoVector& w3) {
    const TorusGrid& g = w1.grid();
    auto covector_cutoff = [&](const CoVector& w) {
        int c = 0;
        auto scan = [&](const ScalarField& f) {
            g.for_each_mode([&](Wavevector k, std::size_t idx) {
                if (std::abs(f.data()[idx]) > 0) c = std::max(c, k.norm_inf());
            });
        };
        for (int i = 0; i < 3; ++i) scan(w.v[i]);
        scan(w.theta);
        return c;
    };
    int c = std::max({covector_cutoff(w1), covector_cutoff(w2), covector_cutoff(w3)});
    if (3 * c > g.cutoff())
        throw InsufficientHeadroom("jacobi_residual: covector cutoff " + std::to_string(c) +
                                   " needs grid cutoff >= " + std::to_string(3 * c));

    CoVector t1 = bracket_x(w1, bracket_x(w2, w3));
    CoVector t2 = bracket_x(w2, bracket_x(w3, w1));
    CoVector t3 = bracket_x(w3, bracket_x(w1, w2));
    double scale = std::max({t1.l2_norm(), t2.l2_norm(), t3.l2_norm()});
    if (scale < 1e-300) return 0.0;
    return (t1 + t2 + t3).l2_norm() / scale;
}

}  // namespace nsf

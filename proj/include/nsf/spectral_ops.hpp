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

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "nsf/field.hpp"

namespace nsf {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

/// Fourier (Galerkin) truncation P_{m'}: zero every coefficient with
/// max-norm |k| > m'. Idempotent; identity for m' >= m.
inline ScalarField fourier_project(ScalarField f, int m_prime) {
    if (m_prime < 0) throw InvalidCutoff("fourier_project: negative cutoff");
    f.grid().for_each_mode([&](Wavevector k, std::size_t idx) {
        if (k.norm_inf() > m_prime) f.data()[idx] = {0.0, 0.0};
    });
    return f;
}

inline VectorField fourier_project(VectorField v, int m_prime) {
    for (int i = 0; i < 3; ++i) v[i] = fourier_project(v[i], m_prime);
    return v;
}

/// Leray/Helmholtz projection onto divergence-free fields:
/// v_hat(k) -> (I - k k^T/|k|^2) v_hat(k) for k != 0; the k = 0 mode
/// passes through unchanged (Pi is the identity on constants).
inline VectorField leray_project(VectorField v) {
    const TorusGrid& g = v.grid();
    g.for_each_mode([&](Wavevector k, std::size_t idx) {
        int kk = k.norm2();
        if (kk == 0) return;
        std::complex<double> kv = static_cast<double>(k.k1) * v[0].data()[idx] +
                                  static_cast<double>(k.k2) * v[1].data()[idx] +
                                  static_cast<double>(k.k3) * v[2].data()[idx];
        kv /= static_cast<double>(kk);
        v[0].data()[idx] -= static_cast<double>(k.k1) * kv;
        v[1].data()[idx] -= static_cast<double>(k.k2) * kv;
        v[2].data()[idx] -= static_cast<double>(k.k3) * kv;
    });
    v.set_divergence_free(true);
    return v;
}

/// Stokes truncation Pi_{m'} = Leray o Fourier truncation (they commute
/// mode-wise).
inline VectorField stokes_project(VectorField v, int m_prime) {
    return leray_project(fourier_project(std::move(v), m_prime));
}

/// Eigenvalue of the Stokes operator -Pi Delta on the plane wave at k.
inline double stokes_eigenvalue(Wavevector k) { return 4.0 * pi * pi * k.norm2(); }

// ---------------------------------------------------------------------------
// Differentiation (exact, mode-wise)
// ---------------------------------------------------------------------------

/// d/dx_axis: multiply by 2 pi i k_axis.
inline ScalarField partial(const ScalarField& f, int axis) {
    ScalarField out(f.grid());
    f.grid().for_each_mode([&](Wavevector k, std::size_t idx) {
        int ka = axis == 0 ? k.k1 : axis == 1 ? k.k2 : k.k3;
        out.data()[idx] = std::complex<double>(0.0, two_pi * ka) * f.data()[idx];
    });
    return out;
}

inline VectorField gradient(const ScalarField& f) {
    VectorField g(f.grid());
    for (int i = 0; i < 3; ++i) g[i] = partial(f, i);
    return g;
}

inline ScalarField divergence(const VectorField& v) {
    ScalarField out = partial(v[0], 0);
    out += partial(v[1], 1);
    out += partial(v[2], 2);
    return out;
}

/// Row-wise divergence of a matrix field: (div M)_j = sum_i d_i M_ij.
inline VectorField divergence(const MatrixField& M) {
    VectorField out(M.grid());
    for (int j = 0; j < 3; ++j) {
        ScalarField s = partial(M(0, j), 0);
        s += partial(M(1, j), 1);
        s += partial(M(2, j), 2);
        out[j] = s;
    }
    return out;
}

inline ScalarField laplacian(const ScalarField& f) {
    ScalarField out(f.grid());
    f.grid().for_each_mode([&](Wavevector k, std::size_t idx) {
        out.data()[idx] = -4.0 * pi * pi * k.norm2() * f.data()[idx];
    });
    return out;
}

inline VectorField laplacian(const VectorField& v) {
    VectorField out(v.grid());
    for (int i = 0; i < 3; ++i) out[i] = laplacian(v[i]);
    out.set_divergence_free(v.divergence_free());
    return out;
}

inline ScalarField biharmonic(const ScalarField& f) {
    ScalarField out(f.grid());
    f.grid().for_each_mode([&](Wavevector k, std::size_t idx) {
        double k2 = 4.0 * pi * pi * k.norm2();
        out.data()[idx] = k2 * k2 * f.data()[idx];
    });
    return out;
}

inline VectorField biharmonic(const VectorField& v) {
    VectorField out(v.grid());
    for (int i = 0; i < 3; ++i) out[i] = biharmonic(v[i]);
    out.set_divergence_free(v.divergence_free());
    return out;
}

/// Full Jacobian, (grad u)_{ij} = d_i u_j.
inline MatrixField jacobian(const VectorField& u) {
    MatrixField J(u.grid());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) J(i, j) = partial(u[j], i);
    return J;
}

/// Symmetrized gradient (1/2)(grad u + grad u^T).
inline MatrixField sym_gradient(const VectorField& u) {
    MatrixField S(u.grid());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            ScalarField s = partial(u[j], i);
            s += partial(u[i], j);
            s *= 0.5;
            S(i, j) = s;
        }
    return S;
}

/// Rank-dispatching wrapper over the typed derivative functions; the typed
/// forms above are the primary interface.
enum class DiffKind { gradient, divergence, laplacian, biharmonic, sym_gradient };

struct FieldAny {
    const ScalarField* scalar = nullptr;
    const VectorField* vector = nullptr;
    FieldAny(const ScalarField& s) : scalar(&s) {}
    FieldAny(const VectorField& v) : vector(&v) {}
};

struct FieldResult {
    std::vector<ScalarField> scalars;  // 1 = scalar, 3 = vector, 9 = matrix
};

inline FieldResult differentiate(FieldAny f, DiffKind kind) {
    FieldResult r;
    auto push_vec = [&](const VectorField& v) {
        for (int i = 0; i < 3; ++i) r.scalars.push_back(v[i]);
    };
    auto push_mat = [&](const MatrixField& M) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.scalars.push_back(M(i, j));
    };
    switch (kind) {
        case DiffKind::gradient:
            if (!f.scalar) throw InvalidOperand("gradient needs a scalar field");
            push_vec(gradient(*f.scalar));
            return r;
        case DiffKind::divergence:
            if (!f.vector) throw InvalidOperand("divergence needs a vector field");
            r.scalars.push_back(divergence(*f.vector));
            return r;
        case DiffKind::laplacian:
            if (f.scalar)
                r.scalars.push_back(laplacian(*f.scalar));
            else
                push_vec(laplacian(*f.vector));
            return r;
        case DiffKind::biharmonic:
            if (f.scalar)
                r.scalars.push_back(biharmonic(*f.scalar));
            else
                push_vec(biharmonic(*f.vector));
            return r;
        case DiffKind::sym_gradient:
            if (!f.vector) throw InvalidOperand("sym_gradient needs a vector field");
            push_mat(sym_gradient(*f.vector));
            return r;
    }
    throw InvalidOperand("unknown differentiation kind");
}

// ---------------------------------------------------------------------------
// Collocation products
// ---------------------------------------------------------------------------

/// Pointwise product on the collocation grid, truncated back to cutoff m.
/// With dealias set, the product is formed on a grid with 2/3-rule headroom
/// (zero-padding), making the retained coefficients the exact convolution.
inline ScalarField multiply(const ScalarField& a, const ScalarField& b, bool dealias) {
    require_same_grid(a.grid(), b.grid(), "multiply");
    const TorusGrid& g = a.grid();
    int n = dealias ? g.dealias_n() : g.points();
    std::vector<double> va = a.values(n);
    std::vector<double> vb = b.values(n);
    for (std::size_t i = 0; i < va.size(); ++i) va[i] *= vb[i];
    return ScalarField::from_values(g, va, n);
}

inline VectorField multiply(const ScalarField& a, const VectorField& v, bool dealias) {
    VectorField out(v.grid());
    for (int i = 0; i < 3; ++i) out[i] = multiply(a, v[i], dealias);
    return out;
}

/// Outer product (x (x) y)_{ij} = x_i y_j.
inline MatrixField outer_product(const VectorField& x, const VectorField& y, bool dealias) {
    require_same_grid(x.grid(), y.grid(), "outer_product");
    const TorusGrid& g = x.grid();
    int n = dealias ? g.dealias_n() : g.points();
    std::array<std::vector<double>, 3> vx, vy;
    for (int i = 0; i < 3; ++i) {
        vx[static_cast<std::size_t>(i)] = x[i].values(n);
        vy[static_cast<std::size_t>(i)] = y[i].values(n);
    }
    MatrixField out(g);
    std::vector<double> prod(vx[0].size());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const auto& a = vx[static_cast<std::size_t>(i)];
            const auto& b = vy[static_cast<std::size_t>(j)];
            for (std::size_t p = 0; p < prod.size(); ++p) prod[p] = a[p] * b[p];
            out(i, j) = ScalarField::from_values(g, prod, n);
        }
    return out;
}

/// Frobenius contraction A : B as a scalar field.
inline ScalarField double_dot(const MatrixField& A, const MatrixField& B, bool dealias) {
    require_same_grid(A.grid(), B.grid(), "double_dot");
    const TorusGrid& g = A.grid();
    int n = dealias ? g.dealias_n() : g.points();
    std::vector<double> acc(static_cast<std::size_t>(n) * n * n, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            std::vector<double> va = A(i, j).values(n);
            std::vector<double> vb = B(i, j).values(n);
            for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += va[p] * vb[p];
        }
    return ScalarField::from_values(g, acc, n);
}

inline ScalarField dot(const VectorField& x, const VectorField& y, bool dealias) {
    require_same_grid(x.grid(), y.grid(), "dot");
    const TorusGrid& g = x.grid();
    int n = dealias ? g.dealias_n() : g.points();
    std::vector<double> acc(static_cast<std::size_t>(n) * n * n, 0.0);
    for (int i = 0; i < 3; ++i) {
        std::vector<double> va = x[i].values(n);
        std::vector<double> vb = y[i].values(n);
        for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += va[p] * vb[p];
    }
    return ScalarField::from_values(g, acc, n);
}

// ---------------------------------------------------------------------------
// Non-polynomial evaluation
// ---------------------------------------------------------------------------

namespace detail {

/// Kahan-compensated mean; quadrature sums over ~1e5 collocation points
/// would otherwise round at ~1e-12 relative.
inline double compensated_mean(const std::vector<double>& v) {
    double sum = 0, comp = 0;
    for (double x : v) {
        double y = x - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(v.size());
}

inline std::array<double, 3> grid_point(std::size_t flat, int n) {
    std::size_t nn = static_cast<std::size_t>(n);
    std::size_t j3 = flat % nn;
    std::size_t j2 = (flat / nn) % nn;
    std::size_t j1 = flat / (nn * nn);
    return {static_cast<double>(j1) / n, static_cast<double>(j2) / n, static_cast<double>(j3) / n};
}
}  // namespace detail

/// Evaluate fn pointwise on the grid refined by fine_factor, transform back
/// and truncate to cutoff m. Raises NonfiniteEvaluation (with the collocation
/// point and the value) if fn returns a non-finite result anywhere.
inline ScalarField evaluate_nonlinear(const ScalarField& f, const std::function<double(double)>& fn,
                                      int fine_factor) {
    if (fine_factor < 1) throw InvalidOperand("evaluate_nonlinear: fine_factor must be >= 1");
    const TorusGrid& g = f.grid();
    int n = fine_factor * g.points();
    std::vector<double> v = f.values(n);
    for (std::size_t i = 0; i < v.size(); ++i) {
        double y = fn(v[i]);
        if (!std::isfinite(y)) {
            throw NonfiniteEvaluation("evaluate_nonlinear: non-finite value", detail::grid_point(i, n),
                                      y);
        }
        v[i] = y;
    }
    return ScalarField::from_values(g, v, n);
}

/// Minimum collocation value on the refined grid, with its location.
struct MinValue {
    double value;
    std::array<double, 3> location;
};

inline MinValue min_collocation_value(const ScalarField& f, int fine_factor) {
    int n = std::max(1, fine_factor) * f.grid().points();
    std::vector<double> v = f.values(n);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[arg]) arg = i;
    return {v[arg], detail::grid_point(arg, n)};
}

/// Sup-norm on the refined collocation grid.
inline double sup_norm(const ScalarField& f, int fine_factor) {
    int n = std::max(1, fine_factor) * f.grid().points();
    std::vector<double> v = f.values(n);
    double worst = 0;
    for (double x : v) worst = std::max(worst, std::abs(x));
    return worst;
}

/// Integral over the torus (mode-0 coefficient; |T^3| = 1).
inline double integral(const ScalarField& f) { return f.at({0, 0, 0}).real(); }

}  // namespace nsf

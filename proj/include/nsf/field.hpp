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

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "nsf/fft.hpp"
#include "nsf/grid.hpp"

namespace nsf {

/// Real scalar field on the torus, stored as Fourier coefficients over the
/// cutoff cube |k_i| <= m with Hermitian symmetry c(-k) = conj(c(k)).
class ScalarField {
public:
    explicit ScalarField(const TorusGrid& grid) : grid_(grid), c_(grid.mode_count()) {}

    static ScalarField constant(const TorusGrid& grid, double value) {
        ScalarField f(grid);
        f.at({0, 0, 0}) = value;
        return f;
    }

    const TorusGrid& grid() const { return grid_; }

    std::complex<double>& at(Wavevector k) { return c_[grid_.index(k)]; }
    const std::complex<double>& at(Wavevector k) const { return c_[grid_.index(k)]; }

    std::complex<double>* data() { return c_.data(); }
    const std::complex<double>* data() const { return c_.data(); }
    std::size_t size() const { return c_.size(); }

    /// Set coefficient at k together with its Hermitian partner at -k.
    void set_mode(Wavevector k, std::complex<double> value) {
        at(k) = value;
        at(-k) = std::conj(value);
    }

    /// Real cosine/sine pair amplitude: adds a*cos(2pi k.x) or a*sin(2pi k.x).
    void add_cos(Wavevector k, double a) {
        at(k) += std::complex<double>(a / 2, 0);
        at(-k) += std::complex<double>(a / 2, 0);
    }
    void add_sin(Wavevector k, double a) {
        at(k) += std::complex<double>(0, -a / 2);
        at(-k) += std::complex<double>(0, a / 2);
    }

    ScalarField& operator+=(const ScalarField& o) {
        require_same_grid(grid_, o.grid_, "field +=");
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        require_same_grid(grid_, o.grid_, "field -=");
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    ScalarField& operator*=(double s) {
        for (auto& v : c_) v *= s;
        return *this;
    }
    /// this += s*o
    ScalarField& axpy(double s, const ScalarField& o) {
        require_same_grid(grid_, o.grid_, "field axpy");
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * o.c_[i];
        return *this;
    }

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
    friend ScalarField operator-(ScalarField a) { return a *= -1.0; }

    /// L^2(T^3) norm by Parseval with |T^3| = 1.
    double l2_norm() const {
        double s = 0;
        for (const auto& v : c_) s += std::norm(v);
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (const auto& v : c_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    /// Collocation values on the n^3 grid (defaults to the grid's n).
    std::vector<double> values(int n = 0) const {
        int nn = n > 0 ? n : grid_.points();
        return detail::synth_values(grid_, c_.data(), nn);
    }

    /// Pointwise evaluation at an arbitrary torus point (direct mode sum).
    double value_at(std::array<double, 3> x) const {
        constexpr double two_pi = 6.283185307179586476925286766559;
        std::complex<double> s = 0;
        grid_.for_each_mode([&](Wavevector k, std::size_t idx) {
            double phase = two_pi * (k.k1 * x[0] + k.k2 * x[1] + k.k3 * x[2]);
            s += c_[idx] * std::complex<double>(std::cos(phase), std::sin(phase));
        });
        return s.real();
    }

    /// Rebuild from collocation values on the n^3 grid, truncating to cutoff m.
    static ScalarField from_values(const TorusGrid& grid, const std::vector<double>& v, int n) {
        ScalarField f(grid);
        detail::analyze_values(grid, v.data(), n, f.c_.data());
        return f;
    }

private:
    TorusGrid grid_;
    std::vector<std::complex<double>> c_;
};

/// Real vector field; three scalar components on a shared grid plus a
/// divergence-free tag maintained by the Leray projection.
class VectorField {
public:
    explicit VectorField(const TorusGrid& grid)
        : comp_{ScalarField(grid), ScalarField(grid), ScalarField(grid)} {}

    const TorusGrid& grid() const { return comp_[0].grid(); }

    ScalarField& operator[](int i) { return comp_[static_cast<std::size_t>(i)]; }
    const ScalarField& operator[](int i) const { return comp_[static_cast<std::size_t>(i)]; }

    bool divergence_free() const { return divergence_free_; }
    void set_divergence_free(bool v) { divergence_free_ = v; }

    VectorField& operator+=(const VectorField& o) {
        for (int i = 0; i < 3; ++i) comp_[i] += o.comp_[i];
        divergence_free_ = divergence_free_ && o.divergence_free_;
        return *this;
    }
    VectorField& operator-=(const VectorField& o) {
        for (int i = 0; i < 3; ++i) comp_[i] -= o.comp_[i];
        divergence_free_ = divergence_free_ && o.divergence_free_;
        return *this;
    }
    VectorField& operator*=(double s) {
        for (auto& c : comp_) c *= s;
        return *this;
    }
    VectorField& axpy(double s, const VectorField& o) {
        for (int i = 0; i < 3; ++i) comp_[i].axpy(s, o.comp_[i]);
        divergence_free_ = divergence_free_ && o.divergence_free_;
        return *this;
    }

    friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
    friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
    friend VectorField operator*(double s, VectorField a) { return a *= s; }
    friend VectorField operator-(VectorField a) { return a *= -1.0; }

    double l2_norm() const {
        double s = 0;
        for (const auto& c : comp_) {
            double n = c.l2_norm();
            s += n * n;
        }
        return std::sqrt(s);
    }

    bool all_finite() const {
        return comp_[0].all_finite() && comp_[1].all_finite() && comp_[2].all_finite();
    }

    /// max_k |k . u_hat(k)|, the discrete incompressibility residual.
    double divergence_residual() const {
        double worst = 0;
        grid().for_each_mode([&](Wavevector k, std::size_t idx) {
            std::complex<double> d = static_cast<double>(k.k1) * comp_[0].data()[idx] +
                                     static_cast<double>(k.k2) * comp_[1].data()[idx] +
                                     static_cast<double>(k.k3) * comp_[2].data()[idx];
            worst = std::max(worst, std::abs(d));
        });
        return worst;
    }

private:
    std::array<ScalarField, 3> comp_;
    bool divergence_free_ = false;
};

/// 3x3 matrix field (row i, column j), used for symmetrized gradients,
/// u (x) u, and the matrix slot of the noise operator.
class MatrixField {
public:
    explicit MatrixField(const TorusGrid& grid)
        : comp_{ScalarField(grid), ScalarField(grid), ScalarField(grid),
                ScalarField(grid), ScalarField(grid), ScalarField(grid),
                ScalarField(grid), ScalarField(grid), ScalarField(grid)} {}

    const TorusGrid& grid() const { return comp_[0].grid(); }

    ScalarField& operator()(int i, int j) { return comp_[static_cast<std::size_t>(3 * i + j)]; }
    const ScalarField& operator()(int i, int j) const {
        return comp_[static_cast<std::size_t>(3 * i + j)];
    }

    MatrixField& operator+=(const MatrixField& o) {
        for (std::size_t i = 0; i < 9; ++i) comp_[i] += o.comp_[i];
        return *this;
    }
    MatrixField& operator-=(const MatrixField& o) {
        for (std::size_t i = 0; i < 9; ++i) comp_[i] -= o.comp_[i];
        return *this;
    }
    MatrixField& operator*=(double s) {
        for (auto& c : comp_) c *= s;
        return *this;
    }
    friend MatrixField operator-(MatrixField a, const MatrixField& b) { return a -= b; }
    friend MatrixField operator+(MatrixField a, const MatrixField& b) { return a += b; }
    friend MatrixField operator*(double s, MatrixField a) { return a *= s; }

    /// (M + M^T)/2
    MatrixField symmetrized() const {
        MatrixField s(grid());
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
            }
        return s;
    }

    double l2_norm() const {
        double s = 0;
        for (const auto& c : comp_) {
            double n = c.l2_norm();
            s += n * n;
        }
        return std::sqrt(s);
    }

private:
    std::array<ScalarField, 9> comp_;
};

/// Parseval pairings; |T^3| normalized to 1 so <1,1> = 1.
inline double inner_product(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid(), "inner_product");
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a.data()[i].real() * b.data()[i].real() + a.data()[i].imag() * b.data()[i].imag();
    return s;
}

inline double inner_product(const VectorField& a, const VectorField& b) {
    double s = 0;
    for (int i = 0; i < 3; ++i) s += inner_product(a[i], b[i]);
    return s;
}

inline double inner_product(const MatrixField& a, const MatrixField& b) {
    double s = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += inner_product(a(i, j), b(i, j));
    return s;
}

}  // namespace nsf

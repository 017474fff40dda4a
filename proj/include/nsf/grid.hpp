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

#include <cstddef>
#include <string>

#include "nsf/errors.hpp"

namespace nsf {

/// Integer wavevector on the unit 3-torus.
struct Wavevector {
    int k1 = 0, k2 = 0, k3 = 0;

    friend bool operator==(const Wavevector&, const Wavevector&) = default;
    Wavevector operator-() const { return {-k1, -k2, -k3}; }
    /// Euclidean |k|^2.
    int norm2() const { return k1 * k1 + k2 * k2 + k3 * k3; }
    /// Max-norm |k|_inf.
    int norm_inf() const {
        int a = k1 < 0 ? -k1 : k1;
        int b = k2 < 0 ? -k2 : k2;
        int c = k3 < 0 ? -k3 : k3;
        int ab = a > b ? a : b;
        return ab > c ? ab : c;
    }
};

/// Band-limited discretization of the unit torus: spectral cutoff m
/// (modes with |k_i| <= m per axis) plus a collocation resolution n.
/// fine_factor sets the refined grid used for non-polynomial evaluations.
class TorusGrid {
public:
    TorusGrid(int cutoff, int points, int fine_factor = 2)
        : m_(cutoff), n_(points), fine_(fine_factor) {
        if (m_ < 1) throw InvalidCutoff("grid cutoff m must be >= 1, got " + std::to_string(m_));
        if (n_ < 2 * m_ + 1)
            throw InvalidCutoff("collocation points n=" + std::to_string(n_) +
                                " below 2m+1=" + std::to_string(2 * m_ + 1));
        if (fine_ < 1)
            throw InvalidCutoff("fine_factor must be >= 1, got " + std::to_string(fine_));
    }

    int cutoff() const { return m_; }
    int points() const { return n_; }
    int fine_factor() const { return fine_; }
    int fine_points() const { return fine_ * n_; }

    int modes_per_axis() const { return 2 * m_ + 1; }
    std::size_t mode_count() const {
        std::size_t d = static_cast<std::size_t>(modes_per_axis());
        return d * d * d;
    }

    bool contains(Wavevector k) const { return k.norm_inf() <= m_; }

    std::size_t index(Wavevector k) const {
        std::size_t d = static_cast<std::size_t>(modes_per_axis());
        return (static_cast<std::size_t>(k.k1 + m_) * d + static_cast<std::size_t>(k.k2 + m_)) * d +
               static_cast<std::size_t>(k.k3 + m_);
    }

    /// Visit every stored mode; f receives (Wavevector, flat index).
    template <class F>
    void for_each_mode(F&& f) const {
        std::size_t idx = 0;
        for (int k1 = -m_; k1 <= m_; ++k1)
            for (int k2 = -m_; k2 <= m_; ++k2)
                for (int k3 = -m_; k3 <= m_; ++k3) f(Wavevector{k1, k2, k3}, idx++);
    }

    /// Minimal collocation resolution for alias-free quadratic products
    /// truncated back to cutoff m (2/3-rule headroom, ceil(3(2m+1)/2)).
    static int dealias_points(int cutoff) { return (3 * (2 * cutoff + 1) + 1) / 2; }

    /// Resolution actually used for dealiased products: the grid's own n if it
    /// already has the headroom, otherwise the padded minimum.
    int dealias_n() const {
        int need = dealias_points(m_);
        return n_ >= need ? n_ : need;
    }

    friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

private:
    int m_;
    int n_;
    int fine_;
};

inline void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* what) {
    if (!(a == b)) throw GridMismatch(std::string("grid mismatch in ") + what);
}

}  // namespace nsf

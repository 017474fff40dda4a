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

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "nsf/grid.hpp"

namespace nsf::detail {

/// Cached FFTW plans for 3-D complex transforms of size n^3. Plans are created
/// once per (n, direction) under a lock and executed through the new-array
/// interface on caller-owned buffers, so concurrent transforms are safe.
class FftEngine {
public:
    /// Unnormalized forward DFT, in place: X[k] = sum_j x[j] e^{-2pi i jk/n}.
    static void forward(int n, std::complex<double>* data) { execute(n, FFTW_FORWARD, data); }

    /// Unnormalized inverse DFT, in place: x[j] = sum_k X[k] e^{+2pi i jk/n}.
    static void backward(int n, std::complex<double>* data) { execute(n, FFTW_BACKWARD, data); }

private:
    static void execute(int n, int sign, std::complex<double>* data) {
        fftw_plan plan = acquire(n, sign);
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                         reinterpret_cast<fftw_complex*>(data));
    }

    static fftw_plan acquire(int n, int sign) {
        static std::mutex mtx;
        static std::map<std::pair<int, int>, fftw_plan> cache;
        std::lock_guard<std::mutex> lock(mtx);
        auto key = std::make_pair(n, sign);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        // FFTW_UNALIGNED lets the plan run on any caller buffer.
        std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n) * n * n);
        fftw_plan plan = fftw_plan_dft_3d(n, n, n, reinterpret_cast<fftw_complex*>(scratch.data()),
                                          reinterpret_cast<fftw_complex*>(scratch.data()), sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache.emplace(key, plan);
        return plan;
    }
};

/// Scatter cutoff-m coefficients into an n^3 DFT buffer (n >= 2m+1).
inline void scatter_modes(const TorusGrid& grid, const std::complex<double>* coeff, int n,
                          std::complex<double>* bins) {
    const std::size_t total = static_cast<std::size_t>(n) * n * n;
    for (std::size_t i = 0; i < total; ++i) bins[i] = {0.0, 0.0};
    grid.for_each_mode([&](Wavevector k, std::size_t idx) {
        int b1 = (k.k1 % n + n) % n;
        int b2 = (k.k2 % n + n) % n;
        int b3 = (k.k3 % n + n) % n;
        bins[(static_cast<std::size_t>(b1) * n + b2) * n + b3] = coeff[idx];
    });
}

/// Gather cutoff-m coefficients out of an n^3 DFT buffer, normalizing by n^3
/// and enforcing Hermitian symmetry so the represented field is exactly real.
inline void gather_modes(const TorusGrid& grid, const std::complex<double>* bins, int n,
                         std::complex<double>* coeff) {
    const double scale = 1.0 / (static_cast<double>(n) * n * n);
    grid.for_each_mode([&](Wavevector k, std::size_t idx) {
        int b1 = (k.k1 % n + n) % n;
        int b2 = (k.k2 % n + n) % n;
        int b3 = (k.k3 % n + n) % n;
        coeff[idx] = scale * bins[(static_cast<std::size_t>(b1) * n + b2) * n + b3];
    });
    grid.for_each_mode([&](Wavevector k, std::size_t idx) {
        std::size_t jdx = grid.index(-k);
        if (jdx < idx) return;
        std::complex<double> sym = 0.5 * (coeff[idx] + std::conj(coeff[jdx]));
        coeff[idx] = sym;
        coeff[jdx] = std::conj(sym);
    });
}

/// Per-thread transform workspace, reused across calls to avoid allocating a
/// fresh n^3 buffer for every product term.
inline std::vector<std::complex<double>>& transform_scratch(int n) {
    thread_local std::map<int, std::vector<std::complex<double>>> cache;
    auto& buf = cache[n];
    buf.resize(static_cast<std::size_t>(n) * n * n);
    return buf;
}

/// Real collocation values of a coefficient array on the n^3 grid.
inline std::vector<double> synth_values(const TorusGrid& grid, const std::complex<double>* coeff,
                                        int n) {
    auto& buf = transform_scratch(n);
    scatter_modes(grid, coeff, n, buf.data());
    FftEngine::backward(n, buf.data());
    std::vector<double> out(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
    return out;
}

/// Coefficients (cutoff grid.m) of real collocation values on the n^3 grid.
inline void analyze_values(const TorusGrid& grid, const double* values, int n,
                           std::complex<double>* coeff) {
    auto& buf = transform_scratch(n);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = {values[i], 0.0};
    FftEngine::forward(n, buf.data());
    gather_modes(grid, buf.data(), n, coeff);
}

}  // namespace nsf::detail

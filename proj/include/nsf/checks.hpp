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

#include <string>
#include <vector>

#include "nsf/generic.hpp"
#include "nsf/integrators.hpp"

namespace nsf {

/// One verified invariant: the observed residual against its tolerance.
struct CheckResult {
    std::string name;
    double observed = 0;
    double tolerance = 0;
    bool pass = false;
    std::string detail;

    static CheckResult of(std::string name, double observed, double tol, std::string detail = "") {
        CheckResult r;
        r.name = std::move(name);
        r.observed = observed;
        r.tolerance = tol;
        r.pass = observed <= tol;
        r.detail = std::move(detail);
        return r;
    }
};

inline bool all_pass(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Random band-limited fields
// ---------------------------------------------------------------------------

/// Gaussian coefficients on modes |k|_inf <= cutoff with a mild spectral
/// decay, rescaled to L2 norm `amplitude`; Hermitian by construction.
inline ScalarField random_scalar(const TorusGrid& grid, int cutoff, double amplitude,
                                 RngStream& rng) {
    ScalarField f(grid);
    for (int k1 = 0; k1 <= cutoff; ++k1)
        for (int k2 = k1 == 0 ? 0 : -cutoff; k2 <= cutoff; ++k2)
            for (int k3 = k1 == 0 && k2 == 0 ? 0 : -cutoff; k3 <= cutoff; ++k3) {
                Wavevector k{k1, k2, k3};
                double decay = 1.0 / (1.0 + k.norm2());
                if (k1 == 0 && k2 == 0 && k3 == 0) {
                    f.at(k) = decay * rng.next_normal();
                } else {
                    f.set_mode(k, {decay * rng.next_normal(), decay * rng.next_normal()});
                }
            }
    double nrm = f.l2_norm();
    if (nrm > 0) f *= amplitude / nrm;
    return f;
}

/// Zero-mean random field rescaled to a prescribed sup norm, for building
/// states with a guaranteed positivity margin.
inline ScalarField random_scalar_sup(const TorusGrid& grid, int cutoff, double sup_target,
                                     RngStream& rng) {
    ScalarField f = random_scalar(grid, cutoff, 1.0, rng);
    f.at({0, 0, 0}) = 0.0;
    double sup = sup_norm(f, grid.fine_factor());
    if (sup > 0) f *= sup_target / sup;
    return f;
}

inline VectorField random_vector(const TorusGrid& grid, int cutoff, double amplitude,
                                 RngStream& rng, bool divergence_free = false) {
    VectorField v(grid);
    for (int i = 0; i < 3; ++i) v[i] = random_scalar(grid, cutoff, amplitude, rng);
    if (divergence_free) v = leray_project(std::move(v));
    return v;
}

inline CoVector random_covector(const TorusGrid& grid, int cutoff, double amplitude,
                                RngStream& rng) {
    return CoVector(random_vector(grid, cutoff, amplitude, rng),
                    random_scalar(grid, cutoff, amplitude, rng));
}

/// Strictly positive random temperature state for the GENERIC checks: low
/// modes, small amplitude around a positive mean.
inline GenericState random_generic_state(const TorusGrid& grid, int cutoff, RngStream& rng) {
    // The entropy direction composes 1/theta; its band-limited truncation
    // error scales like the fourth power of the perturbation, so a small sup
    // keeps the 1e-8 identity checks meaningful on an m = 3*cutoff grid.
    ScalarField theta = random_scalar_sup(grid, cutoff, 0.02, rng);
    theta += ScalarField::constant(grid, 1.0);
    VectorField u = random_vector(grid, cutoff, 0.1, rng, true);
    return GenericState(std::move(u), std::move(theta));
}

// ---------------------------------------------------------------------------
// Brute-force convolution oracle (independent of the FFT path)
// ---------------------------------------------------------------------------

/// Direct O(m^6) truncated convolution: c(k) = sum_{k1+k2=k} a(k1) b(k2).
inline ScalarField convolution_oracle(const ScalarField& a, const ScalarField& b) {
    const TorusGrid& g = a.grid();
    const int m = g.cutoff();
    ScalarField out(g);
    for (int p1 = -m; p1 <= m; ++p1)
        for (int p2 = -m; p2 <= m; ++p2)
            for (int p3 = -m; p3 <= m; ++p3) {
                std::complex<double> acc = 0;
                for (int q1 = -m; q1 <= m; ++q1) {
                    int r1 = p1 - q1;
                    if (r1 < -m || r1 > m) continue;
                    for (int q2 = -m; q2 <= m; ++q2) {
                        int r2 = p2 - q2;
                        if (r2 < -m || r2 > m) continue;
                        for (int q3 = -m; q3 <= m; ++q3) {
                            int r3 = p3 - q3;
                            if (r3 < -m || r3 > m) continue;
                            acc += a.at({q1, q2, q3}) * b.at({r1, r2, r3});
                        }
                    }
                }
                out.at({p1, p2, p3}) = acc;
            }
    return out;
}

// ---------------------------------------------------------------------------
// Invariant suites (the per-module property checks)
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> check_spectral_core(std::uint64_t seed = 11) {
    std::vector<CheckResult> out;
    RngStream rng(seed);
    TorusGrid grid(4, 16);

    double idem = 0, orth1 = 0, orth2 = 0, reality = 0, divres = 0;
    for (int trial = 0; trial < 20; ++trial) {
        ScalarField f = random_scalar(grid, 4, 1.0, rng);
        ScalarField once = fourier_project(f, 2);
        ScalarField twice = fourier_project(once, 2);
        double scale = std::max(1e-300, once.l2_norm());
        idem = std::max(idem, (twice - once).l2_norm() / scale);

        VectorField v = random_vector(grid, 4, 1.0, rng);
        VectorField pv = leray_project(v);
        VectorField ppv = leray_project(pv);
        idem = std::max(idem, (ppv - pv).l2_norm() / std::max(1e-300, pv.l2_norm()));
        divres = std::max(divres, pv.divergence_residual() / std::max(1e-300, pv.l2_norm()));
        VectorField sv = stokes_project(v, 3);
        VectorField ssv = stokes_project(sv, 3);
        idem = std::max(idem, (ssv - sv).l2_norm() / std::max(1e-300, sv.l2_norm()));

        VectorField w = random_vector(grid, 4, 1.0, rng);
        VectorField pw = leray_project(w);
        double sym = std::abs(inner_product(pv, w) - inner_product(v, pw));
        orth1 = std::max(orth1, sym / std::max(1e-300, v.l2_norm() * w.l2_norm()));
        double cross = std::abs(inner_product(v - pv, pv));
        orth2 = std::max(orth2, cross / std::max(1e-300, v.l2_norm() * v.l2_norm()));

        // Reality after a product round trip.
        ScalarField prod = multiply(f, f, true);
        std::vector<double> vals = prod.values();
        ScalarField back = ScalarField::from_values(grid, vals, grid.points());
        reality = std::max(reality, (back - fourier_project(prod, grid.cutoff())).l2_norm() /
                                        std::max(1e-300, prod.l2_norm()));
    }
    out.push_back(CheckResult::of("projection idempotence", idem, 1e-12));
    out.push_back(CheckResult::of("leray self-adjointness", orth1, 1e-12));
    out.push_back(CheckResult::of("leray orthogonality <v-Pv,Pv>", orth2, 1e-12));
    out.push_back(CheckResult::of("projected divergence residual", divres, 1e-12));
    out.push_back(CheckResult::of("reality round trip", reality, 1e-12));

    // Dealiased products against the direct convolution, m <= 3.
    double conv = 0;
    for (int m = 1; m <= 3; ++m) {
        TorusGrid small(m, TorusGrid::dealias_points(m));
        ScalarField a = random_scalar(small, m, 1.0, rng);
        ScalarField b = random_scalar(small, m, 1.0, rng);
        ScalarField fast = multiply(a, b, true);
        ScalarField slow = convolution_oracle(a, b);
        conv = std::max(conv, (fast - slow).l2_norm() / std::max(1e-300, slow.l2_norm()));
    }
    out.push_back(CheckResult::of("dealiased product vs convolution oracle", conv, 1e-12));
    return out;
}

inline std::vector<CheckResult> check_noise_model(std::uint64_t seed = 12,
                                                  std::size_t covariance_samples = 100000) {
    std::vector<CheckResult> out;
    RngStream rng(seed);

    // Stationarity across random bases up to 100 modes.
    double worst_stationarity = 0;
    for (int trial = 0; trial < 5; ++trial) {
        TorusGrid grid(4, 16);
        std::vector<NoiseMode> f_spec, g_spec;
        int n_modes = 3 + static_cast<int>(rng.next_uint() % 48);
        for (int i = 0; i < n_modes; ++i) {
            Wavevector k{static_cast<int>(rng.next_uint() % 9) - 4,
                         static_cast<int>(rng.next_uint() % 9) - 4,
                         static_cast<int>(rng.next_uint() % 9) - 4};
            if (k.norm_inf() == 0) k = {1, 0, 0};
            double amp = 0.02 + 0.1 * rng.next_uniform();
            f_spec.push_back({k, amp});
            if (i % 2 == 0) g_spec.push_back({k, 0.5 * amp});
        }
        NoiseBasis basis = NoiseBasis::build(f_spec, g_spec, grid, 0.3, 0.0);
        worst_stationarity = std::max(worst_stationarity, verify_stationarity(basis, 1e-12).worst());
    }
    out.push_back(CheckResult::of("stationarity residuals (random bases)", worst_stationarity, 1e-12));

    // Matrix covariance: every distinct entry of the empirical covariance of
    // vec(dB) within 3 standard errors of delta_ik delta_jl + delta_il delta_jk.
    {
        TorusGrid grid(2, 8);
        NoiseBasis basis = NoiseBasis::build({{{1, 0, 0}, 1.0}}, {}, grid);
        const double dt = 0.37;
        std::vector<double> mean(81, 0.0), m2(81, 0.0);
        RngStream sampler(RngStream::derive(seed, 0xC0BULL));
        for (std::size_t s = 0; s < covariance_samples; ++s) {
            NoiseIncrement inc = sample_increments(basis, dt, sampler, s);
            const auto& B = inc.dB[0];
            for (int a = 0; a < 9; ++a)
                for (int b = a; b < 9; ++b) {
                    double prod = B[static_cast<std::size_t>(a)] * B[static_cast<std::size_t>(b)] / dt;
                    std::size_t idx = static_cast<std::size_t>(9 * a + b);
                    mean[idx] += prod;
                    m2[idx] += prod * prod;
                }
        }
        double worst_sigmas = 0;
        double n = static_cast<double>(covariance_samples);
        for (int a = 0; a < 9; ++a)
            for (int b = a; b < 9; ++b) {
                int i = a / 3, j = a % 3, k = b / 3, l = b % 3;
                double expect = (i == k && j == l ? 1.0 : 0.0) + (i == l && j == k ? 1.0 : 0.0);
                std::size_t idx = static_cast<std::size_t>(9 * a + b);
                double mu = mean[idx] / n;
                double var = std::max(1e-300, m2[idx] / n - mu * mu);
                double se = std::sqrt(var / n);
                worst_sigmas = std::max(worst_sigmas, std::abs(mu - expect) / se);
            }
        out.push_back(CheckResult::of("dB covariance (sigmas, 45 entries)", worst_sigmas, 3.0,
                                      std::to_string(covariance_samples) + " samples"));
        // Exact symmetry, bit for bit.
        NoiseIncrement inc = sample_increments(basis, dt, sampler, 0);
        bool symmetric = true;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                symmetric = symmetric && inc.dB[0][static_cast<std::size_t>(3 * i + j)] ==
                                             inc.dB[0][static_cast<std::size_t>(3 * j + i)];
        out.push_back(CheckResult::of("dB exact symmetry", symmetric ? 0.0 : 1.0, 0.0));
    }

    // Linearity of the diffusion fields in the increment and state.
    {
        TorusGrid grid(4, 16);
        NoiseBasis basis =
            NoiseBasis::build({{{1, 0, 0}, 0.5}, {{0, 1, 1}, 0.25}}, {{{0, 1, 0}, 0.5}}, grid);
        double worst = 0;
        for (int trial = 0; trial < 5; ++trial) {
            VectorField u = random_vector(grid, 2, 0.5, rng, true);
            ScalarField psi = random_scalar(grid, 2, 0.5, rng);
            NoiseIncrement i1 = sample_increments(basis, 0.01, rng, 2 * static_cast<std::uint64_t>(trial));
            NoiseIncrement i2 = sample_increments(basis, 0.01, rng, 2 * static_cast<std::uint64_t>(trial) + 1);
            NoiseIncrement sum = i1;
            sum += i2;
            sum.dt = 0.01;
            auto [duA, dsA] = noise_diffusion_fields(basis, u, psi, i1);
            auto [duB, dsB] = noise_diffusion_fields(basis, u, psi, i2);
            auto [duS, dsS] = noise_diffusion_fields(basis, u, psi, sum);
            double scale = std::max(1e-300, duS.l2_norm() + dsS.l2_norm());
            worst = std::max(worst, ((duA + duB - duS).l2_norm() + (dsA + dsB - dsS).l2_norm()) / scale);

            ScalarField psi2 = 2.0 * psi;
            VectorField u2 = 2.0 * u;
            auto [duH, dsH] = noise_diffusion_fields(basis, u2, psi2, i1);
            double scale2 = std::max(1e-300, duH.l2_norm() + dsH.l2_norm());
            worst = std::max(
                worst, ((duH - 2.0 * duA).l2_norm() + (dsH - 2.0 * dsA).l2_norm()) / scale2);
        }
        out.push_back(CheckResult::of("diffusion linearity/homogeneity", worst, 1e-12));
    }
    return out;
}

inline std::vector<CheckResult> check_dynamics(std::uint64_t seed = 13) {
    std::vector<CheckResult> out;
    RngStream rng(seed);
    TorusGrid grid(4, 16);
    NoiseConstants nc{0.8, 1.7, 0.6, 1.1};

    // h_delta: r h_delta(r) <= 1 and monotone limit.
    {
        double worst = -1e300;
        bool monotone = true;
        const double deltas[5] = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
        for (int i = 0; i < 10000; ++i) {
            double r = -10.0 + 20.0 * (static_cast<double>(i) + 0.5) / 10000.0;
            double prev = -1e300;
            for (int d = 4; d >= 0; --d) {  // decreasing delta
                double h = h_delta(r, deltas[static_cast<std::size_t>(d)]);
                worst = std::max(worst, r * h - 1.0);
                if (h < prev - 1e-15) monotone = false;
                prev = h;
            }
        }
        // r * (1/r) may land one ulp above 1 in IEEE arithmetic; a violation
        // means exceeding 1 beyond rounding.
        out.push_back(CheckResult::of("r h_delta(r) <= 1", std::max(0.0, worst), 4e-16));
        out.push_back(CheckResult::of("h_delta monotone in delta", monotone ? 0.0 : 1.0, 0.0));
    }

    // Truncation: norm bound and the 2-Lipschitz estimate on random pairs.
    {
        double worst_norm = 0, worst_lip = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            ScalarField x = random_scalar(grid, 3, 2.0 * rng.next_uniform(), rng);
            ScalarField y = random_scalar(grid, 3, 2.0 * rng.next_uniform(), rng);
            double R = 0.1 + rng.next_uniform();
            ScalarField tx = truncate(x, R);
            ScalarField ty = truncate(y, R);
            worst_norm = std::max(worst_norm, tx.l2_norm() - R);
            double dxy = (x - y).l2_norm();
            worst_lip = std::max(worst_lip, (tx - ty).l2_norm() - 2.0 * dxy);
        }
        out.push_back(CheckResult::of("truncation norm bound", std::max(0.0, worst_norm), 1e-12));
        out.push_back(CheckResult::of("truncation 2-Lipschitz", std::max(0.0, worst_lip), 1e-12));
    }

    // Ito minus Stratonovich equals the closed-form corrections, 100 states.
    {
        double worst = 0;
        ModelParams params;
        for (int trial = 0; trial < 100; ++trial) {
            VectorField u = random_vector(grid, 2, 0.2, rng, true);
            ScalarField psi = random_scalar_sup(grid, 2, 0.4, rng);
            psi += ScalarField::constant(grid, 1.0);
            SystemState state(u, psi);
            Drift ito = drift_ito(state, nc, params, Formulation::psi_system);
            Drift strat = drift_stratonovich(state);
            VectorField du_diff = ito.du - strat.du;
            du_diff.axpy(-nc.F1 / 4.0, laplacian(u));
            ScalarField ds_diff = ito.dscalar - strat.dscalar;
            ds_diff.axpy(-(nc.F1 / 2.0 + nc.G1 / 2.0), laplacian(psi));
            ds_diff.axpy(nc.F2 / 2.0 + nc.G2 / 8.0, psi);
            double scale = std::max(1e-300, ito.du.l2_norm() + ito.dscalar.l2_norm());
            worst = std::max(worst, (du_diff.l2_norm() + ds_diff.l2_norm()) / scale);
        }
        out.push_back(CheckResult::of("Ito-Stratonovich correction identity", worst, 1e-12));
    }

    // Galerkin drift: cutoff locality, divergence-free du, sign of the
    // assembled nonlinearity's spatial integral.
    {
        double worst_div = 0, worst_sign = 0, worst_local = 0;
        ModelParams params;
        params.delta = 0.05;
        params.epsilon = 1e-3;
        for (int trial = 0; trial < 20; ++trial) {
            VectorField u = random_vector(grid, 4, 0.4, rng, true);
            ScalarField psi = random_scalar(grid, 4, 0.5, rng);  // may cross zero
            SystemState state(u, psi);
            Drift d = drift_galerkin(state, nc, params);
            worst_div = std::max(worst_div, d.du.divergence_residual() /
                                                std::max(1e-300, d.du.l2_norm()));
            worst_sign = std::max(worst_sign, -d.budget);
            worst_local = std::max(worst_local,
                                   (fourier_project(d.dscalar, grid.cutoff()) - d.dscalar).l2_norm());
        }
        out.push_back(CheckResult::of("galerkin drift divergence-free", worst_div, 1e-12));
        out.push_back(
            CheckResult::of("galerkin nonlinearity mode-0 sign", std::max(0.0, worst_sign), 0.0));
        out.push_back(CheckResult::of("galerkin drift cutoff locality", worst_local, 1e-12));
    }

    // Semi-discrete Stratonovich energy identity <u,du>+<psi,dpsi> = 0.
    {
        double worst = 0;
        for (int trial = 0; trial < 20; ++trial) {
            VectorField u = random_vector(grid, 2, 0.3, rng, true);
            ScalarField psi = random_scalar_sup(grid, 2, 0.5, rng);
            psi += ScalarField::constant(grid, 1.5);
            SystemState state(u, psi);
            Drift d = drift_stratonovich(state);
            double production = inner_product(u, d.du) + inner_product(psi, d.dscalar);
            double scale = std::max(1.0, gradient(psi).l2_norm() + sym_gradient(u).l2_norm());
            worst = std::max(worst, std::abs(production) / (scale * scale));
        }
        out.push_back(CheckResult::of("Stratonovich energy-drift identity", worst, 1e-8));
    }
    return out;
}

inline std::vector<CheckResult> check_generic(std::uint64_t seed = 14, int trials = 100) {
    std::vector<CheckResult> out;
    RngStream rng(seed);
    TorusGrid grid(9, 32);
    const int cutoff = 3;  // m/3 headroom for the composed products

    double deg_L = 0, deg_M = 0, antisym = 0, sym = 0, psd = 0, factor = 0, adjoint = 0;
    for (int trial = 0; trial < trials; ++trial) {
        GenericState z = random_generic_state(grid, cutoff, rng);
        CoVector wE = energy_covector(z);
        CoVector wS = entropy_covector(z);

        CoVector LdS = apply_L(z, wS);
        double z_norm = std::sqrt(inner_product(z.u, z.u) + inner_product(z.theta, z.theta));
        deg_L = std::max(deg_L, LdS.l2_norm() / std::max(1e-300, z_norm));

        CoVector MdE = apply_M(z, wE);
        MatrixField J = jacobian(z.u);
        double scale_M = inner_product(J, J) + z.theta.l2_norm();
        deg_M = std::max(deg_M, MdE.l2_norm() / std::max(1e-300, scale_M));

        CoVector w1 = random_covector(grid, cutoff, 1.0, rng);
        CoVector w2 = random_covector(grid, cutoff, 1.0, rng);
        double nrm = std::max(1e-300, w1.l2_norm() * w2.l2_norm());
        antisym = std::max(antisym, std::abs(inner_product(w1, apply_L(z, w2)) +
                                             inner_product(w2, apply_L(z, w1))) / nrm);
        sym = std::max(sym, std::abs(inner_product(w1, apply_M(z, w2)) -
                                     inner_product(w2, apply_M(z, w1))) / nrm);
        double quad = inner_product(w1, apply_M(z, w1));
        psd = std::max(psd, -quad / std::max(1e-300, w1.l2_norm() * w1.l2_norm()));

        auto [bt_mat, bt_vec] = apply_B_transpose(z, w1);
        double viaB = inner_product(w1, apply_B(z, bt_mat, bt_vec));
        double viaM = inner_product(w1, apply_M(z, w1));
        factor = std::max(factor, std::abs(viaB - viaM) / std::max(1e-300, std::abs(viaM)));

        MatrixField xi_mat(grid);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) xi_mat(i, j) = random_scalar(grid, cutoff, 1.0, rng);
        VectorField xi_vec = random_vector(grid, cutoff, 1.0, rng);
        double lhs = inner_product(w1, apply_B(z, xi_mat, xi_vec));
        auto [btm, btv] = apply_B_transpose(z, w1);
        double rhs = inner_product(btm, xi_mat) + inner_product(btv, xi_vec);
        adjoint = std::max(adjoint,
                           std::abs(lhs - rhs) / std::max(1e-300, std::abs(lhs) + std::abs(rhs)));
    }
    out.push_back(CheckResult::of("degeneracy L dS/dz = 0", deg_L, 1e-8));
    out.push_back(CheckResult::of("degeneracy M dE/dz = 0", deg_M, 1e-8));
    out.push_back(CheckResult::of("L antisymmetry", antisym, 1e-8));
    out.push_back(CheckResult::of("M symmetry", sym, 1e-8));
    out.push_back(CheckResult::of("M positive semidefiniteness", psd, 1e-8));
    out.push_back(CheckResult::of("B B^T = M as quadratic forms", factor, 1e-6));
    out.push_back(CheckResult::of("B/B^T adjointness", adjoint, 1e-8));

    double jacobi = 0;
    RngStream jrng(RngStream::derive(seed, 0x1acULL));
    for (int trial = 0; trial < trials; ++trial) {
        CoVector w1 = random_covector(grid, cutoff, 1.0, jrng);
        CoVector w2 = random_covector(grid, cutoff, 1.0, jrng);
        CoVector w3 = random_covector(grid, cutoff, 1.0, jrng);
        jacobi = std::max(jacobi, jacobi_residual(w1, w2, w3));
    }
    out.push_back(CheckResult::of("Jacobi identity (pointwise bracket)", jacobi, 1e-8,
                                  std::to_string(trials) + " random triples"));

    // GENERIC evolution consistency: L dE + M dS equals the deterministic
    // drift of the temperature system with the noise constants zeroed.
    {
        double worst = 0;
        RngStream crng(RngStream::derive(seed, 0x9e9ULL));
        ModelParams params;
        NoiseConstants zero{};
        for (int trial = 0; trial < 10; ++trial) {
            GenericState z = random_generic_state(grid, cutoff, crng);
            CoVector rhs = apply_L(z, energy_covector(z)) + apply_M(z, entropy_covector(z));
            SystemState state(z.u, z.theta, 0.0, Variables::theta);
            Drift d = drift_ito(state, zero, params, Formulation::theta_system);
            double scale = std::max(1e-300, d.du.l2_norm() + d.dscalar.l2_norm());
            worst = std::max(worst,
                             ((rhs.v - d.du).l2_norm() + (rhs.theta - d.dscalar).l2_norm()) / scale);
        }
        out.push_back(CheckResult::of("L dE + M dS reproduces the NSF drift", worst, 1e-8));
    }
    return out;
}

inline std::vector<CheckResult> check_integrators(std::uint64_t seed = 15) {
    std::vector<CheckResult> out;
    RngStream rng(seed);
    TorusGrid grid(4, 16);
    NoiseBasis empty = NoiseBasis::build({}, {}, grid);
    NoiseBasis basis = NoiseBasis::build({{{1, 0, 0}, 0.3}}, {{{0, 1, 0}, 0.3}}, grid);
    ModelParams params;
    params.delta = 0.05;
    params.epsilon = 1e-4;

    // Divergence preservation across schemes and steps.
    {
        double worst = 0;
        SystemState state(random_vector(grid, 2, 0.3, rng, true),
                          ScalarField::constant(grid, 1.0) + random_scalar_sup(grid, 2, 0.3, rng));
        for (SchemeKind kind : {SchemeKind::euler_maruyama_ito, SchemeKind::heun_stratonovich,
                                SchemeKind::imex_ito}) {
            SchemeSpec scheme;
            scheme.kind = kind;
            scheme.formulation =
                kind == SchemeKind::heun_stratonovich ? Formulation::psi_system : Formulation::galerkin;
            scheme.dt = 1e-4;
            scheme.steps = 20;
            SystemState s = state;
            for (long j = 0; j < scheme.steps; ++j) {
                NoiseIncrement inc = sample_increments(basis, scheme.dt, rng, static_cast<std::uint64_t>(j));
                s = step(s, scheme, basis, params, inc).state;
                worst = std::max(worst,
                                 s.u.divergence_residual() / std::max(1e-300, s.u.l2_norm()));
            }
        }
        out.push_back(CheckResult::of("divergence-free after every step", worst, 1e-12));
    }

    // Brownian-path consistency: summed fine increments equal the coarse sum.
    {
        RngStream prng(RngStream::derive(seed, 0xAAULL));
        NoiseIncrement coarse = NoiseIncrement::zero(basis, 0.0);
        for (std::uint64_t s = 0; s < 4; ++s) coarse += sample_increments(basis, 1e-4, prng, s);
        NoiseIncrement again = NoiseIncrement::zero(basis, 0.0);
        for (std::uint64_t s = 0; s < 4; ++s) again += sample_increments(basis, 1e-4, prng, s);
        bool equal = true;
        for (std::size_t n = 0; n < coarse.dB.size(); ++n)
            for (int e = 0; e < 9; ++e)
                equal = equal && coarse.dB[n][static_cast<std::size_t>(e)] ==
                                     again.dB[n][static_cast<std::size_t>(e)];
        out.push_back(CheckResult::of("Brownian splitting bit-consistency", equal ? 0.0 : 1.0, 0.0));
    }

    // Noise-free reductions: Heun -> deterministic Heun, EM -> explicit Euler.
    {
        SystemState state(random_vector(grid, 2, 0.2, rng, true),
                          ScalarField::constant(grid, 1.5) + random_scalar_sup(grid, 2, 0.3, rng));
        const double dt = 1e-4;
        NoiseIncrement inc = NoiseIncrement::zero(empty, dt);

        SchemeSpec em{SchemeKind::euler_maruyama_ito, Formulation::psi_system, dt, 1};
        SystemState em_state = step(state, em, empty, params, inc).state;
        Drift d = drift_ito(state, empty.constants(), params, Formulation::psi_system);
        SystemState euler = state;
        euler.u.axpy(dt, d.du);
        euler.scalar.axpy(dt, d.dscalar);
        euler.u = leray_project(std::move(euler.u));
        double em_diff = (em_state.u - euler.u).l2_norm() + (em_state.scalar - euler.scalar).l2_norm();

        SchemeSpec heun{SchemeKind::heun_stratonovich, Formulation::psi_system, dt, 1};
        SystemState heun_state = step(state, heun, empty, params, inc).state;
        Drift a1 = drift_stratonovich(state);
        SystemState pred = state;
        pred.u.axpy(dt, a1.du);
        pred.u = leray_project(std::move(pred.u));
        pred.scalar.axpy(dt, a1.dscalar);
        Drift a2 = drift_stratonovich(pred);
        SystemState corr = state;
        corr.u.axpy(0.5 * dt, a1.du);
        corr.u.axpy(0.5 * dt, a2.du);
        corr.scalar.axpy(0.5 * dt, a1.dscalar);
        corr.scalar.axpy(0.5 * dt, a2.dscalar);
        corr.u = leray_project(std::move(corr.u));
        double heun_diff =
            (heun_state.u - corr.u).l2_norm() + (heun_state.scalar - corr.scalar).l2_norm();
        double scale = std::max(1.0, state.u.l2_norm() + state.scalar.l2_norm());
        out.push_back(CheckResult::of("EM noise-free = explicit Euler", em_diff / scale, 1e-14));
        out.push_back(CheckResult::of("Heun noise-free = deterministic Heun", heun_diff / scale, 1e-14));
    }

    // IMEX vs EM on the linear subproblem: one-step difference is O(dt^2).
    {
        SystemState state{VectorField(grid), ScalarField(grid), 0.0, Variables::theta};
        state.u.set_divergence_free(true);
        state.scalar = ScalarField::constant(grid, 1.0);
        state.scalar.add_cos({1, 0, 0}, 0.1);
        double ratio_bound = 0;
        for (double dt : {2e-4, 1e-4, 5e-5}) {
            NoiseIncrement inc = NoiseIncrement::zero(empty, dt);
            SchemeSpec em{SchemeKind::euler_maruyama_ito, Formulation::theta_system, dt, 1};
            SchemeSpec imex{SchemeKind::imex_ito, Formulation::theta_system, dt, 1};
            SystemState a = step(state, em, empty, params, inc).state;
            SystemState b = step(state, imex, empty, params, inc).state;
            double diff = (a.scalar - b.scalar).l2_norm() + (a.u - b.u).l2_norm();
            ratio_bound = std::max(ratio_bound, diff / (dt * dt));
        }
        // Two modes of size 0.05 at |k| = 1: C ~ sqrt(2) lambda^2/2 * 0.05 ~ 55.
        out.push_back(CheckResult::of("IMEX-EM linear agreement C = diff/dt^2", ratio_bound,
                                      2.0 * 55.2));
    }

    // Replay determinism.
    {
        SystemState state(random_vector(grid, 2, 0.3, rng, true),
                          ScalarField::constant(grid, 1.2) + random_scalar_sup(grid, 2, 0.3, rng));
        SchemeSpec scheme{SchemeKind::euler_maruyama_ito, Formulation::galerkin, 1e-4, 25};
        Trajectory t1 = run_path(state, scheme, basis, params, 424242, {});
        Trajectory t2 = run_path(state, scheme, basis, params, 424242, {});
        bool identical = t1.records.size() == t2.records.size();
        for (std::size_t i = 0; identical && i < t1.terminal.scalar.size(); ++i)
            identical = t1.terminal.scalar.data()[i] == t2.terminal.scalar.data()[i];
        out.push_back(CheckResult::of("same-seed replay bit-identical", identical ? 0.0 : 1.0, 0.0));
    }
    return out;
}

inline std::vector<CheckResult> check_diagnostics(std::uint64_t seed = 16) {
    std::vector<CheckResult> out;
    RngStream rng(seed);
    TorusGrid grid(4, 16);

    // Strict-convexity proxy: relative energy vanishes iff states coincide.
    {
        VectorField u = random_vector(grid, 2, 0.4, rng, true);
        ScalarField psi = ScalarField::constant(grid, 1.0) + random_scalar_sup(grid, 2, 0.3, rng);
        SystemState a(u, psi);
        double same = relative_energy(a, a);
        SystemState b = a;
        b.scalar.add_cos({1, 0, 0}, 1e-5);
        double apart = relative_energy(a, b);
        out.push_back(CheckResult::of("relative energy zero iff equal", same, 1e-12,
                                      "separated value " + std::to_string(apart)));
        out.push_back(CheckResult::of("relative energy separates states", apart > 1e-12 ? 0.0 : 1.0, 0.0));
    }

    // Budget-energy link along the Stratonovich drift:
    // d/dt E + |grad psi|^2 + |grad_sym u|^2 - int psi (budget integrand) = 0.
    {
        double worst = 0;
        for (int trial = 0; trial < 10; ++trial) {
            VectorField u = random_vector(grid, 2, 0.3, rng, true);
            ScalarField psi = ScalarField::constant(grid, 1.5) + random_scalar_sup(grid, 2, 0.4, rng);
            SystemState state(u, psi);
            Drift d = drift_stratonovich(state);
            double dE = inner_product(u, d.du) + inner_product(psi, d.dscalar);
            MatrixField S = sym_gradient(u);
            VectorField gp = gradient(psi);
            double gradient_sink = inner_product(gp, gp) + inner_product(S, S);
            // Independent quadrature of int psi (1/psi)(|grad psi|^2+|grad_sym u|^2).
            int n = grid.fine_factor() * grid.points();
            std::vector<double> pv = psi.values(n);
            std::vector<double> g2 = detail::grad_sq_values(psi, n);
            std::vector<double> s2 = detail::sym_grad_sq_values(u, n);
            double psi_q = 0;
            for (std::size_t p = 0; p < pv.size(); ++p)
                psi_q += pv[p] * (g2[p] + s2[p]) / pv[p];
            psi_q /= static_cast<double>(pv.size());
            double residual = std::abs(dE + gradient_sink - psi_q) / std::max(1.0, gradient_sink);
            worst = std::max(worst, residual);
        }
        out.push_back(CheckResult::of("budget-energy link (Stratonovich)", worst, 1e-8));
    }

    // entropy_math monotone under pure heat flow.
    {
        SystemState state{VectorField(grid), ScalarField(grid)};
        state.u.set_divergence_free(true);
        state.scalar = ScalarField::constant(grid, 2.0);
        state.scalar.add_cos({1, 0, 0}, 0.5);
        NoiseBasis empty = NoiseBasis::build({}, {}, grid);
        ModelParams params;
        SchemeSpec scheme{SchemeKind::euler_maruyama_ito, Formulation::psi_system, 1e-4, 200};
        Trajectory traj = run_path(state, scheme, empty, params, 7, {});
        double worst = 0;
        for (std::size_t i = 1; i < traj.records.size(); ++i)
            worst = std::max(worst,
                             traj.records[i].entropy_math - traj.records[i - 1].entropy_math);
        out.push_back(CheckResult::of("mathematical entropy nonincreasing (heat flow)",
                                      std::max(0.0, worst), 1e-10));
    }
    return out;
}

}  // namespace nsf

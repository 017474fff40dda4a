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
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nsf/rng.hpp"
#include "nsf/spectral_ops.hpp"

namespace nsf {

/// The stationarity constants of the noise families.
struct NoiseConstants {
    double F1 = 0, F2 = 0, G1 = 0, G2 = 0;
};

/// One trigonometric mode specification: amplitude a at wavevector k,
/// generating the pair {a cos(2pi k.x), a sin(2pi k.x)}.
struct NoiseMode {
    Wavevector k;
    double amplitude;
};

/// Coefficient families {f_n}, {g_n} with the spatial-stationarity
/// cancellations built in: cos/sin pairs give sum f_n^2 = a^2 and
/// sum f_n grad f_n = 0 identically, so F1, F2, G1, G2 are exact.
class NoiseBasis {
public:
    /// Validated construction from mode lists plus optional constant
    /// coefficients (which contribute only to F1/G1).
    static NoiseBasis build(const std::vector<NoiseMode>& f_spec,
                            const std::vector<NoiseMode>& g_spec, const TorusGrid& grid,
                            double f_constant = 0.0, double g_constant = 0.0) {
        auto expand = [&](const std::vector<NoiseMode>& spec, double constant, const char* family,
                          std::vector<ScalarField>& out, double& c1, double& c2) {
            for (std::size_t i = 0; i < spec.size(); ++i) {
                const NoiseMode& mode = spec[i];
                if (mode.k.norm_inf() == 0)
                    throw InvalidMode(std::string(family) + "_modes[" + std::to_string(i) +
                                      "]: k = 0 is reserved for the constant coefficient");
                if (!grid.contains(mode.k))
                    throw InvalidMode(std::string(family) + "_modes[" + std::to_string(i) +
                                      "]: wavevector outside grid cutoff m=" +
                                      std::to_string(grid.cutoff()));
                if (!(mode.amplitude > 0))
                    throw InvalidMode(std::string(family) + "_modes[" + std::to_string(i) +
                                      "]: amplitude must be positive");
                ScalarField fc(grid), fs(grid);
                fc.add_cos(mode.k, mode.amplitude);
                fs.add_sin(mode.k, mode.amplitude);
                out.push_back(std::move(fc));
                out.push_back(std::move(fs));
                c1 += mode.amplitude * mode.amplitude;
                c2 += 4.0 * pi * pi * mode.k.norm2() * mode.amplitude * mode.amplitude;
            }
            if (constant != 0.0) {
                out.push_back(ScalarField::constant(grid, constant));
                c1 += constant * constant;
            }
        };

        NoiseBasis basis(grid);
        expand(f_spec, f_constant, "f", basis.f_, basis.constants_.F1, basis.constants_.F2);
        expand(g_spec, g_constant, "g", basis.g_, basis.constants_.G1, basis.constants_.G2);
        basis.cache_values();
        return basis;
    }

    /// Assemble from raw coefficient fields; the constants are taken as the
    /// spatial means of the defining sums, so verify_stationarity measures the
    /// families' deviation from stationarity.
    static NoiseBasis from_fields(const TorusGrid& grid, std::vector<ScalarField> f_fields,
                                  std::vector<ScalarField> g_fields) {
        NoiseBasis basis(grid);
        basis.f_ = std::move(f_fields);
        basis.g_ = std::move(g_fields);
        auto mean_constants = [&](const std::vector<ScalarField>& fam, double& c1, double& c2) {
            for (const ScalarField& f : fam) {
                c1 += integral(multiply(f, f, true));
                VectorField gf = gradient(f);
                c2 += integral(dot(gf, gf, true));
            }
        };
        mean_constants(basis.f_, basis.constants_.F1, basis.constants_.F2);
        mean_constants(basis.g_, basis.constants_.G1, basis.constants_.G2);
        basis.cache_values();
        return basis;
    }

    const TorusGrid& grid() const { return grid_; }
    const NoiseConstants& constants() const { return constants_; }
    const std::vector<ScalarField>& f_fields() const { return f_; }
    const std::vector<ScalarField>& g_fields() const { return g_; }
    std::size_t f_count() const { return f_.size(); }
    std::size_t g_count() const { return g_.size(); }

    /// Cached collocation values at the grid's dealias resolution.
    const std::vector<double>& f_values(std::size_t n) const { return f_vals_[n]; }
    const std::vector<double>& g_values(std::size_t n) const { return g_vals_[n]; }
    /// Cached gradient values, component i of entry n.
    const std::vector<double>& g_grad_values(std::size_t n, int i) const {
        return g_grad_vals_[n][static_cast<std::size_t>(i)];
    }

private:
    explicit NoiseBasis(const TorusGrid& grid) : grid_(grid) {}

    void cache_values() {
        int nd = grid_.dealias_n();
        f_vals_.reserve(f_.size());
        for (const ScalarField& f : f_) f_vals_.push_back(f.values(nd));
        g_vals_.reserve(g_.size());
        g_grad_vals_.reserve(g_.size());
        for (const ScalarField& g : g_) {
            g_vals_.push_back(g.values(nd));
            VectorField gg = gradient(g);
            g_grad_vals_.push_back({gg[0].values(nd), gg[1].values(nd), gg[2].values(nd)});
        }
    }

    TorusGrid grid_;
    std::vector<ScalarField> f_, g_;
    NoiseConstants constants_;
    std::vector<std::vector<double>> f_vals_, g_vals_;
    std::vector<std::array<std::vector<double>, 3>> g_grad_vals_;
};

/// Collocation-grid residuals of the six stationarity identities.
struct StationarityReport {
    double f_square_residual = 0;   // sup |sum f_n^2 - F1|
    double f_cancel_residual = 0;   // sup |sum f_n grad f_n|
    double f_gradient_residual = 0; // sup |sum |grad f_n|^2 - F2|
    double g_square_residual = 0;
    double g_cancel_residual = 0;
    double g_gradient_residual = 0;
    bool pass = false;

    double worst() const {
        double w = f_square_residual;
        w = std::max(w, f_cancel_residual);
        w = std::max(w, f_gradient_residual);
        w = std::max(w, g_square_residual);
        w = std::max(w, g_cancel_residual);
        return std::max(w, g_gradient_residual);
    }
};

inline StationarityReport verify_stationarity(const NoiseBasis& basis, double tol) {
    const TorusGrid& grid = basis.grid();
    int n = grid.points();
    std::size_t total = static_cast<std::size_t>(n) * n * n;

    // Kahan-compensated accumulator; plain summation across ~100 modes would
    // round at the scale of F2 and mask the identity being certified.
    struct Acc {
        std::vector<double> sum, comp;
        explicit Acc(std::size_t sz) : sum(sz, 0.0), comp(sz, 0.0) {}
        void add(std::size_t p, double x) {
            double y = x - comp[p];
            double t = sum[p] + y;
            comp[p] = (t - sum[p]) - y;
            sum[p] = t;
        }
    };

    auto family_residuals = [&](const std::vector<ScalarField>& fam, double c1, double c2,
                                double& sq, double& cancel, double& gradsq) {
        Acc sum_sq(total), sum_gradsq(total);
        std::array<Acc, 3> sum_fgf{Acc(total), Acc(total), Acc(total)};
        for (const ScalarField& f : fam) {
            std::vector<double> v = f.values(n);
            VectorField gf = gradient(f);
            std::array<std::vector<double>, 3> gv{gf[0].values(n), gf[1].values(n),
                                                  gf[2].values(n)};
            for (std::size_t p = 0; p < total; ++p) {
                sum_sq.add(p, v[p] * v[p]);
                for (int i = 0; i < 3; ++i)
                    sum_fgf[static_cast<std::size_t>(i)].add(p, v[p] * gv[static_cast<std::size_t>(i)][p]);
                sum_gradsq.add(p, gv[0][p] * gv[0][p] + gv[1][p] * gv[1][p] + gv[2][p] * gv[2][p]);
            }
        }
        sq = 0;
        cancel = 0;
        gradsq = 0;
        for (std::size_t p = 0; p < total; ++p) {
            sq = std::max(sq, std::abs(sum_sq.sum[p] - c1));
            double norm = std::sqrt(sum_fgf[0].sum[p] * sum_fgf[0].sum[p] +
                                    sum_fgf[1].sum[p] * sum_fgf[1].sum[p] +
                                    sum_fgf[2].sum[p] * sum_fgf[2].sum[p]);
            cancel = std::max(cancel, norm);
            gradsq = std::max(gradsq, std::abs(sum_gradsq.sum[p] - c2));
        }
    };

    StationarityReport rep;
    const NoiseConstants& c = basis.constants();
    family_residuals(basis.f_fields(), c.F1, c.F2, rep.f_square_residual, rep.f_cancel_residual,
                     rep.f_gradient_residual);
    family_residuals(basis.g_fields(), c.G1, c.G2, rep.g_square_residual, rep.g_cancel_residual,
                     rep.g_gradient_residual);
    rep.pass = rep.worst() <= tol;
    return rep;
}

/// One time step's Brownian increments: a symmetric 3x3 matrix per f-entry
/// and a 3-vector per g-entry, both already scaled by sqrt(dt).
struct NoiseIncrement {
    double dt = 0;
    std::vector<std::array<double, 9>> dB;  // row-major, exactly symmetric
    std::vector<std::array<double, 3>> dW;

    NoiseIncrement& operator+=(const NoiseIncrement& o) {
        dt += o.dt;
        for (std::size_t n = 0; n < dB.size(); ++n)
            for (int e = 0; e < 9; ++e) dB[n][static_cast<std::size_t>(e)] += o.dB[n][static_cast<std::size_t>(e)];
        for (std::size_t n = 0; n < dW.size(); ++n)
            for (int e = 0; e < 3; ++e) dW[n][static_cast<std::size_t>(e)] += o.dW[n][static_cast<std::size_t>(e)];
        return *this;
    }

    static NoiseIncrement zero(const NoiseBasis& basis, double dt) {
        NoiseIncrement inc;
        inc.dt = dt;
        inc.dB.assign(basis.f_count(), {});
        inc.dW.assign(basis.g_count(), {});
        return inc;
    }
};

/// Sample the increments of step `step` on the path identified by rng's key.
/// Each dB is (A + A^T)/sqrt(2) * sqrt(dt) with A a matrix of independent
/// standard normals, realizing E[B^{ij}(1)B^{kl}(1)] = d_ik d_jl + d_il d_jk;
/// dW is sqrt(dt) times a standard normal 3-vector. Distinct modes use
/// independent sub-streams, addressed positionally so that summed fine
/// increments reproduce coarse ones without re-sampling.
inline NoiseIncrement sample_increments(const NoiseBasis& basis, double dt, const RngStream& rng,
                                        std::uint64_t step = 0) {
    if (!(dt > 0)) throw InvalidOperand("sample_increments: dt must be positive");
    NoiseIncrement inc = NoiseIncrement::zero(basis, dt);
    const double root_dt = std::sqrt(dt);
    const double inv_root2 = 0.70710678118654752440084436210485;
    for (std::size_t n = 0; n < basis.f_count(); ++n) {
        RngStream sub(RngStream::derive(rng.key(), 0xF0F0ULL, n));
        std::array<double, 9> a{};
        for (std::uint64_t e = 0; e < 9; ++e)
            a[static_cast<std::size_t>(e)] = sub.normal_at(step * 9 + e);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                inc.dB[n][static_cast<std::size_t>(3 * i + j)] =
                    (a[static_cast<std::size_t>(3 * i + j)] + a[static_cast<std::size_t>(3 * j + i)]) *
                    inv_root2 * root_dt;
    }
    for (std::size_t n = 0; n < basis.g_count(); ++n) {
        RngStream sub(RngStream::derive(rng.key(), 0x6060ULL, n));
        for (std::uint64_t e = 0; e < 3; ++e)
            inc.dW[n][static_cast<std::size_t>(e)] = sub.normal_at(step * 3 + e) * root_dt;
    }
    return inc;
}

/// Stochastic increments of the (u, psi) system, Eq-by-Eq:
///   du-part: -(1/sqrt2) sum_n Pi div(psi f_n dB_n)
///   dpsi-part: -sum_n div(psi g_n dW_n) + (1/2) sum_n psi div(g_n dW_n)
///              -(1/sqrt2) sum_n (grad u : f_n dB_n)
/// Products are dealiased; Pi is applied after the divergence.
inline std::pair<VectorField, ScalarField> noise_diffusion_fields(const NoiseBasis& basis,
                                                                  const VectorField& u,
                                                                  const ScalarField& psi,
                                                                  const NoiseIncrement& inc) {
    const TorusGrid& grid = psi.grid();
    require_same_grid(grid, basis.grid(), "noise_diffusion_fields");
    if (!psi.all_finite() || !u.all_finite())
        throw NonfiniteEvaluation("noise_diffusion_fields: non-finite state", {0, 0, 0}, 0.0);
    if (inc.dB.size() != basis.f_count() || inc.dW.size() != basis.g_count())
        throw InvalidOperand("noise_diffusion_fields: increment shape does not match basis");

    const int nd = grid.dealias_n();
    const std::size_t total = static_cast<std::size_t>(nd) * nd * nd;
    std::vector<double> psi_v = psi.values(nd);

    // grad u components on the product grid, shared across f-entries.
    std::array<std::array<std::vector<double>, 3>, 3> du_v;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) du_v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            partial(u[j], i).values(nd);

    VectorField w_sum(grid);  // sum_n div(psi f_n dB_n) before the projection
    ScalarField dpsi(grid);
    std::vector<double> buf(total);

    for (std::size_t n = 0; n < basis.f_count(); ++n) {
        const std::array<double, 9>& dB = inc.dB[n];
        const std::vector<double>& f_v = basis.f_values(n);
        for (std::size_t p = 0; p < total; ++p) buf[p] = psi_v[p] * f_v[p];
        ScalarField phi = ScalarField::from_values(grid, buf, nd);
        // (div(phi dB))_j = sum_i dB_ij d_i phi
        std::array<ScalarField, 3> dphi{partial(phi, 0), partial(phi, 1), partial(phi, 2)};
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i)
                w_sum[j].axpy(dB[static_cast<std::size_t>(3 * i + j)], dphi[static_cast<std::size_t>(i)]);
        // f_n (grad u : dB_n), pointwise on the product grid
        for (std::size_t p = 0; p < total; ++p) {
            double s = 0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    s += dB[static_cast<std::size_t>(3 * i + j)] *
                         du_v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][p];
            buf[p] = f_v[p] * s;
        }
        dpsi.axpy(-0.70710678118654752440084436210485,
                  ScalarField::from_values(grid, buf, nd));
    }

    for (std::size_t n = 0; n < basis.g_count(); ++n) {
        const std::array<double, 3>& dW = inc.dW[n];
        const std::vector<double>& g_v = basis.g_values(n);
        for (std::size_t p = 0; p < total; ++p) buf[p] = psi_v[p] * g_v[p];
        ScalarField q = ScalarField::from_values(grid, buf, nd);
        for (int i = 0; i < 3; ++i) dpsi.axpy(-dW[static_cast<std::size_t>(i)], partial(q, i));
        // + (1/2) psi (dW . grad g_n)
        for (std::size_t p = 0; p < total; ++p) {
            double s = dW[0] * basis.g_grad_values(n, 0)[p] + dW[1] * basis.g_grad_values(n, 1)[p] +
                       dW[2] * basis.g_grad_values(n, 2)[p];
            buf[p] = 0.5 * psi_v[p] * s;
        }
        dpsi += ScalarField::from_values(grid, buf, nd);
    }

    VectorField du = leray_project(-0.70710678118654752440084436210485 * w_sum);
    return {std::move(du), std::move(dpsi)};
}

/// Stochastic increments of the temperature formulation:
///   dtheta-part: -sum_n div(theta g_n dW_n) - sum_n sqrt(theta) (grad u : f_n dB_n)
/// The velocity part is as in the (u, psi) system with psi = sqrt(2 theta).
inline std::pair<VectorField, ScalarField> noise_diffusion_fields_theta(const NoiseBasis& basis,
                                                                        const VectorField& u,
                                                                        const ScalarField& theta,
                                                                        const NoiseIncrement& inc) {
    const TorusGrid& grid = theta.grid();
    require_same_grid(grid, basis.grid(), "noise_diffusion_fields_theta");
    if (!theta.all_finite() || !u.all_finite())
        throw NonfiniteEvaluation("noise_diffusion_fields_theta: non-finite state", {0, 0, 0}, 0.0);

    const int nd = grid.dealias_n();
    const std::size_t total = static_cast<std::size_t>(nd) * nd * nd;
    std::vector<double> theta_v = theta.values(nd);
    std::vector<double> sqrt_theta(total);
    for (std::size_t p = 0; p < total; ++p) {
        double t = theta_v[p];
        if (t < 0) {
            throw PositivityViolation("noise_diffusion_fields_theta: negative temperature",
                                      detail::grid_point(p, nd), t);
        }
        sqrt_theta[p] = std::sqrt(t);
    }

    std::array<std::array<std::vector<double>, 3>, 3> du_v;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) du_v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            partial(u[j], i).values(nd);

    VectorField w_sum(grid);
    ScalarField dtheta(grid);
    std::vector<double> buf(total);
    const double inv_root2 = 0.70710678118654752440084436210485;

    for (std::size_t n = 0; n < basis.f_count(); ++n) {
        const std::array<double, 9>& dB = inc.dB[n];
        const std::vector<double>& f_v = basis.f_values(n);
        // velocity part uses psi = sqrt(2 theta)
        for (std::size_t p = 0; p < total; ++p)
            buf[p] = 1.4142135623730950488016887242097 * sqrt_theta[p] * f_v[p];
        ScalarField phi = ScalarField::from_values(grid, buf, nd);
        std::array<ScalarField, 3> dphi{partial(phi, 0), partial(phi, 1), partial(phi, 2)};
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i)
                w_sum[j].axpy(dB[static_cast<std::size_t>(3 * i + j)], dphi[static_cast<std::size_t>(i)]);
        for (std::size_t p = 0; p < total; ++p) {
            double s = 0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    s += dB[static_cast<std::size_t>(3 * i + j)] *
                         du_v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][p];
            buf[p] = sqrt_theta[p] * f_v[p] * s;
        }
        dtheta.axpy(-1.0, ScalarField::from_values(grid, buf, nd));
    }

    for (std::size_t n = 0; n < basis.g_count(); ++n) {
        const std::array<double, 3>& dW = inc.dW[n];
        const std::vector<double>& g_v = basis.g_values(n);
        for (std::size_t p = 0; p < total; ++p) buf[p] = theta_v[p] * g_v[p];
        ScalarField q = ScalarField::from_values(grid, buf, nd);
        for (int i = 0; i < 3; ++i) dtheta.axpy(-dW[static_cast<std::size_t>(i)], partial(q, i));
    }

    VectorField du = leray_project(-inv_root2 * w_sum);
    return {std::move(du), std::move(dtheta)};
}

}  // namespace nsf

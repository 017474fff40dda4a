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

#include <catch2/catch_amalgamated.hpp>

#include "nsf/checks.hpp"
#include "nsf/spectral_ops.hpp"

using namespace nsf;

namespace {
const TorusGrid grid(4, 16);

double field_diff(const ScalarField& a, const ScalarField& b) { return (a - b).l2_norm(); }
}  // namespace

TEST_CASE("fourier projection") {
    SECTION("constant field is unchanged for any cutoff") {
        ScalarField c = ScalarField::constant(grid, 3.25);
        for (int mp : {0, 1, 4}) CHECK(field_diff(fourier_project(c, mp), c) == 0.0);
    }

    SECTION("a single mode outside the cutoff is annihilated") {
        ScalarField f(grid);
        f.add_cos({3, 0, 0}, 1.0);
        CHECK(fourier_project(f, 2).l2_norm() == 0.0);
    }

    SECTION("idempotent on random band-limited fields") {
        RngStream rng(31);
        ScalarField f = random_scalar(grid, 4, 1.0, rng);
        ScalarField once = fourier_project(f, 2);
        CHECK(field_diff(fourier_project(once, 2), once) == 0.0);
    }

    SECTION("negative cutoff is rejected") {
        ScalarField f(grid);
        CHECK_THROWS_AS(fourier_project(f, -1), InvalidCutoff);
    }
}

TEST_CASE("leray projection") {
    SECTION("gradients are annihilated") {
        ScalarField s(grid);
        s.add_sin({0, 1, 0}, 1.0);
        VectorField g = gradient(s);
        CHECK(leray_project(g).l2_norm() < 1e-14 * g.l2_norm());
    }

    SECTION("divergence-free fields are fixed points") {
        VectorField v(grid);
        v[0].add_sin({0, 1, 0}, 1.0);
        VectorField pv = leray_project(v);
        CHECK((pv - v).l2_norm() < 1e-15);
        CHECK(pv.divergence_free());
    }

    SECTION("mode parallel to its wavevector vanishes") {
        // v = (cos(2pi x1), 0, 0): the k=(1,0,0) coefficient is parallel to k.
        VectorField v(grid);
        v[0].add_cos({1, 0, 0}, 1.0);
        CHECK(leray_project(v).l2_norm() < 1e-15);
    }

    SECTION("k = 0 mode passes through") {
        VectorField v(grid);
        v[1] = ScalarField::constant(grid, 2.0);
        CHECK((leray_project(v) - v).l2_norm() == 0.0);
    }
}

TEST_CASE("stokes projection and eigenvalues") {
    SECTION("divergence-free field within the cutoff is unchanged") {
        VectorField v(grid);
        v[0].add_sin({0, 2, 0}, 0.7);
        CHECK((stokes_project(v, 4) - v).l2_norm() < 1e-15);
    }

    SECTION("pure gradient maps to zero") {
        ScalarField s(grid);
        s.add_cos({1, 1, 0}, 1.0);
        CHECK(stokes_project(gradient(s), 4).l2_norm() < 1e-14);
    }

    SECTION("-Pi Lap on a polarized plane wave gives 4 pi^2 |k|^2") {
        VectorField v(grid);
        v[1].add_cos({1, 0, 0}, 1.0);  // polarization orthogonal to k
        VectorField stokes = leray_project(-laplacian(v));
        VectorField expected = stokes_eigenvalue({1, 0, 0}) * v;
        CHECK((stokes - expected).l2_norm() < 1e-12 * expected.l2_norm());
        CHECK(stokes_eigenvalue({1, 0, 0}) == Catch::Approx(4.0 * pi * pi));
    }
}

TEST_CASE("differentiation is spectrally exact") {
    SECTION("gradient of a constant vanishes") {
        CHECK(gradient(ScalarField::constant(grid, 5.0)).l2_norm() == 0.0);
    }

    SECTION("laplacian of a single cosine") {
        ScalarField f(grid);
        f.add_cos({1, 0, 0}, 1.0);
        ScalarField expected = -4.0 * pi * pi * f;
        CHECK(field_diff(laplacian(f), expected) < 1e-14);
    }

    SECTION("symmetrized gradient of a shear mode") {
        // u = (sin(2pi x2), 0, 0): S12 = S21 = pi cos(2pi x2), others zero.
        VectorField u(grid);
        u[0].add_sin({0, 1, 0}, 1.0);
        MatrixField S = sym_gradient(u);
        ScalarField expected(grid);
        expected.add_cos({0, 1, 0}, pi);
        CHECK(field_diff(S(0, 1), expected) < 1e-13);
        CHECK(field_diff(S(1, 0), expected) < 1e-13);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (!((i == 0 && j == 1) || (i == 1 && j == 0))) CHECK(S(i, j).l2_norm() < 1e-14);
    }

    SECTION("rank mismatch raises invalid-operand") {
        ScalarField f(grid);
        VectorField v(grid);
        CHECK_THROWS_AS(differentiate(FieldAny(v), DiffKind::gradient), InvalidOperand);
        CHECK_THROWS_AS(differentiate(FieldAny(f), DiffKind::divergence), InvalidOperand);
        CHECK_THROWS_AS(differentiate(FieldAny(f), DiffKind::sym_gradient), InvalidOperand);
        CHECK(differentiate(FieldAny(f), DiffKind::gradient).scalars.size() == 3);
    }
}

TEST_CASE("collocation products") {
    SECTION("multiplying by one is exact") {
        RngStream rng(32);
        ScalarField b = random_scalar(grid, 4, 1.0, rng);
        ScalarField one = ScalarField::constant(grid, 1.0);
        CHECK(field_diff(multiply(one, b, true), b) < 1e-15 * b.l2_norm());
    }

    SECTION("cos^2 via the product-to-sum identity") {
        ScalarField f(grid);
        f.add_cos({1, 0, 0}, 1.0);
        ScalarField p = multiply(f, f, true);
        ScalarField expected = ScalarField::constant(grid, 0.5);
        expected.add_cos({2, 0, 0}, 0.5);
        CHECK(field_diff(p, expected) < 1e-14);
    }

    SECTION("dealiased product equals the direct convolution at m <= 3") {
        RngStream rng(33);
        for (int m = 1; m <= 3; ++m) {
            TorusGrid small(m, TorusGrid::dealias_points(m));
            ScalarField a = random_scalar(small, m, 1.0, rng);
            ScalarField b = random_scalar(small, m, 1.0, rng);
            ScalarField fast = multiply(a, b, true);
            ScalarField slow = convolution_oracle(a, b);
            CHECK((fast - slow).l2_norm() <= 1e-12 * slow.l2_norm());
        }
    }

    SECTION("grid mismatch is rejected") {
        TorusGrid other(3, 12);
        CHECK_THROWS_AS(multiply(ScalarField(grid), ScalarField(other), true), GridMismatch);
    }
}

TEST_CASE("nonlinear collocation evaluation") {
    SECTION("identity round trip") {
        RngStream rng(34);
        ScalarField f = random_scalar(grid, 4, 1.0, rng);
        ScalarField back = evaluate_nonlinear(f, [](double r) { return r; }, 2);
        CHECK(field_diff(back, f) < 1e-12 * f.l2_norm());
    }

    SECTION("reciprocal of a positive constant") {
        ScalarField two = ScalarField::constant(grid, 2.0);
        ScalarField half = evaluate_nonlinear(two, [](double r) { return 1.0 / r; }, 2);
        CHECK(field_diff(half, ScalarField::constant(grid, 0.5)) < 1e-14);
    }

    SECTION("1/psi on psi = 0 reports the non-finite point") {
        ScalarField zero(grid);
        CHECK_THROWS_AS(evaluate_nonlinear(zero, [](double r) { return 1.0 / r; }, 2),
                        NonfiniteEvaluation);
        try {
            evaluate_nonlinear(zero, [](double r) { return 1.0 / r; }, 2);
        } catch (const NonfiniteEvaluation& e) {
            CHECK(std::isinf(e.value));
        }
    }
}

TEST_CASE("inner product with unit volume") {
    ScalarField one = ScalarField::constant(grid, 1.0);
    CHECK(inner_product(one, one) == Catch::Approx(1.0));

    ScalarField c(grid), s(grid);
    c.add_cos({1, 0, 0}, 1.0);
    s.add_sin({1, 0, 0}, 1.0);
    CHECK(inner_product(c, c) == Catch::Approx(0.5));
    CHECK(std::abs(inner_product(c, s)) < 1e-16);

    TorusGrid other(3, 12);
    CHECK_THROWS_AS(inner_product(ScalarField(grid), ScalarField(other)), GridMismatch);
}

TEST_CASE("reality is preserved through operations") {
    RngStream rng(35);
    ScalarField f = random_scalar(grid, 3, 1.0, rng);
    ScalarField g = random_scalar(grid, 3, 1.0, rng);
    ScalarField p = multiply(f, laplacian(g), true);
    // synthesize on the full complex grid and inspect the imaginary part
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(16) * 16 * 16);
    detail::scatter_modes(grid, p.data(), 16, buf.data());
    detail::FftEngine::backward(16, buf.data());
    double imag = 0;
    for (const auto& z : buf) imag = std::max(imag, std::abs(z.imag()));
    CHECK(imag <= 1e-12 * std::max(1.0, p.l2_norm()));
}

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(TorusGrid(0, 8), InvalidCutoff);
    CHECK_THROWS_AS(TorusGrid(4, 8), InvalidCutoff);  // n < 2m+1
    CHECK(TorusGrid::dealias_points(4) == 14);
    CHECK(grid.dealias_n() == 16);
}

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
#include "nsf/generic.hpp"

using namespace nsf;

namespace {
const TorusGrid grid(9, 32);
const int cov_cutoff = 3;
}  // namespace

TEST_CASE("L annihilates the entropy direction") {
    RngStream rng(71);
    GenericState z = random_generic_state(grid, cov_cutoff, rng);
    CoVector out = apply_L(z, entropy_covector(z));
    double scale = std::sqrt(inner_product(z.u, z.u) + inner_product(z.theta, z.theta));
    CHECK(out.l2_norm() <= 1e-8 * scale);
}

TEST_CASE("L with zero velocity direction reduces to the transport row") {
    RngStream rng(72);
    GenericState z(VectorField(grid), ScalarField::constant(grid, 1.0));
    z.theta += random_scalar_sup(grid, cov_cutoff, 0.02, rng);
    CoVector w(grid);
    w.v = random_vector(grid, cov_cutoff, 1.0, rng);
    CoVector out = apply_L(z, w);
    CHECK(out.v.l2_norm() < 1e-12);  // u = 0 and theta_w = 0 kill the first row
    ScalarField expected = -divergence(multiply(z.theta, leray_project(w.v), true));
    CHECK((out.theta - expected).l2_norm() < 1e-12 * std::max(1.0, expected.l2_norm()));
}

TEST_CASE("M annihilates the energy direction and is a nonnegative form") {
    RngStream rng(73);
    GenericState z = random_generic_state(grid, cov_cutoff, rng);
    CoVector out = apply_M(z, energy_covector(z));
    MatrixField J = jacobian(z.u);
    CHECK(out.l2_norm() <= 1e-8 * (inner_product(J, J) + z.theta.l2_norm()));

    for (int trial = 0; trial < 10; ++trial) {
        CoVector w = random_covector(grid, cov_cutoff, 1.0, rng);
        double quad = inner_product(w, apply_M(z, w));
        CHECK(quad >= -1e-8 * w.l2_norm() * w.l2_norm());
    }
}

TEST_CASE("B factorizes M and is adjoint to B^T") {
    RngStream rng(74);
    GenericState z = random_generic_state(grid, cov_cutoff, rng);

    SECTION("zero input maps to zero") {
        CoVector out = apply_B(z, MatrixField(grid), VectorField(grid));
        CHECK(out.l2_norm() == 0.0);
    }

    SECTION("quadratic forms agree to 1e-6 relative") {
        CoVector w = random_covector(grid, cov_cutoff, 1.0, rng);
        auto [mat, vec] = apply_B_transpose(z, w);
        double via_b = inner_product(w, apply_B(z, mat, vec));
        double via_m = inner_product(w, apply_M(z, w));
        CHECK(std::abs(via_b - via_m) <= 1e-6 * std::abs(via_m));
    }

    SECTION("adjointness on random inputs") {
        CoVector w = random_covector(grid, cov_cutoff, 1.0, rng);
        MatrixField xi_mat(grid);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) xi_mat(i, j) = random_scalar(grid, cov_cutoff, 1.0, rng);
        VectorField xi_vec = random_vector(grid, cov_cutoff, 1.0, rng);
        double lhs = inner_product(w, apply_B(z, xi_mat, xi_vec));
        auto [mat, vec] = apply_B_transpose(z, w);
        double rhs = inner_product(mat, xi_mat) + inner_product(vec, xi_vec);
        CHECK(std::abs(lhs - rhs) <= 1e-8 * (std::abs(lhs) + std::abs(rhs) + 1.0));
    }

    SECTION("negative temperature is rejected") {
        GenericState bad(VectorField(grid), ScalarField::constant(grid, -1.0));
        CHECK_THROWS_AS(apply_B(bad, MatrixField(grid), VectorField(grid)), PositivityViolation);
    }
}

TEST_CASE("pointwise bracket") {
    SECTION("antisymmetry: bracket with itself vanishes") {
        RngStream rng(75);
        CoVector w = random_covector(grid, cov_cutoff, 1.0, rng);
        CHECK(bracket_x(w, w).l2_norm() < 1e-13 * w.l2_norm());
    }

    SECTION("constant covectors bracket to zero") {
        CoVector a(grid), b(grid);
        a.v[0] = ScalarField::constant(grid, 1.0);
        b.theta = ScalarField::constant(grid, 2.0);
        CHECK(bracket_x(a, b).l2_norm() == 0.0);
    }

    SECTION("hand-computed shear bracket") {
        // w1 = (e1 sin(2pi x2), 0), w2 = (e2, 0):
        // {w1,w2}_x = (e2.grad) w1 = (2pi cos(2pi x2)) e1 in the velocity slot.
        CoVector w1(grid), w2(grid);
        w1.v[0].add_sin({0, 1, 0}, 1.0);
        w2.v[1] = ScalarField::constant(grid, 1.0);
        CoVector out = bracket_x(w1, w2);
        ScalarField expected(grid);
        expected.add_cos({0, 1, 0}, two_pi);
        CHECK((out.v[0] - expected).l2_norm() < 1e-12 * expected.l2_norm());
        CHECK(out.v[1].l2_norm() < 1e-13);
        CHECK(out.v[2].l2_norm() < 1e-13);
        CHECK(out.theta.l2_norm() < 1e-13);
    }
}

TEST_CASE("jacobi residual") {
    RngStream rng(76);

    SECTION("constant triples are exactly degenerate") {
        CoVector a(grid), b(grid), c(grid);
        a.v[0] = ScalarField::constant(grid, 1.0);
        b.v[1] = ScalarField::constant(grid, 2.0);
        c.theta = ScalarField::constant(grid, 3.0);
        CHECK(jacobi_residual(a, b, c) == 0.0);
    }

    SECTION("repeated arguments cancel by antisymmetry") {
        CoVector w1 = random_covector(grid, cov_cutoff, 1.0, rng);
        CoVector w2 = random_covector(grid, cov_cutoff, 1.0, rng);
        CHECK(jacobi_residual(w1, w2, w2) <= 1e-10);
    }

    SECTION("random triples at cutoff m/3") {
        double worst = 0;
        for (int trial = 0; trial < 25; ++trial) {
            CoVector w1 = random_covector(grid, cov_cutoff, 1.0, rng);
            CoVector w2 = random_covector(grid, cov_cutoff, 1.0, rng);
            CoVector w3 = random_covector(grid, cov_cutoff, 1.0, rng);
            worst = std::max(worst, jacobi_residual(w1, w2, w3));
        }
        CHECK(worst <= 1e-8);
    }

    SECTION("insufficient headroom is detected") {
        CoVector w1 = random_covector(grid, 4, 1.0, rng);  // 3*4 > 9
        CoVector w2 = random_covector(grid, 2, 1.0, rng);
        CHECK_THROWS_AS(jacobi_residual(w1, w2, w2), InsufficientHeadroom);
    }
}

TEST_CASE("generic invariant suite") {
    for (const auto& r : check_generic(81, 15)) {
        INFO(r.name << " observed " << r.observed << " tol " << r.tolerance);
        CHECK(r.pass);
    }
}

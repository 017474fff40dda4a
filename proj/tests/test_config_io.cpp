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
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "nsf/checks.hpp"
#include "nsf/config.hpp"
#include "nsf/io.hpp"

using namespace nsf;

namespace {

nlohmann::json minimal_config() {
    return nlohmann::json::parse(R"({
        "grid": {"m": 4, "n": 16},
        "model": {"delta": 0.05, "epsilon": 0.001},
        "noise": {
            "f_modes": [{"k": [1,0,0], "amplitude": 0.2}],
            "g_modes": [{"k": [0,1,0], "amplitude": 0.2}]
        },
        "scheme": {"kind": "euler_maruyama_ito", "formulation": "galerkin",
                   "dt": 1e-4, "t_final": 5e-3},
        "initial": {"preset": "taylor-green", "velocity_amplitude": 0.2,
                    "psi_mean": 1.0, "psi_amplitude": 0.2},
        "seed": 7,
        "n_paths": 2
    })");
}

}  // namespace

TEST_CASE("config parsing") {
    SECTION("minimal config applies only the cosmetic defaults") {
        RunConfig cfg = parse_config_json(minimal_config());
        CHECK(cfg.fine_factor == 2);
        CHECK(cfg.save_every == 10);
        CHECK(cfg.output_dir == "out");
        CHECK(cfg.steps() == 50);
        CHECK(cfg.warnings.empty());
    }

    SECTION("an out-of-cutoff noise mode is rejected with the field name") {
        nlohmann::json doc = minimal_config();
        doc["noise"]["f_modes"][0]["k"] = {5, 0, 0};
        try {
            parse_config_json(doc);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            REQUIRE(e.issues.size() == 1);
            CHECK(e.issues[0].find("noise.f_modes[0].k") != std::string::npos);
        }
    }

    SECTION("all validation errors are collected, not just the first") {
        nlohmann::json doc = minimal_config();
        doc["grid"]["m"] = 0;
        doc["scheme"]["dt"] = -1.0;
        doc["n_paths"] = 0;
        try {
            parse_config_json(doc);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.issues.size() >= 3);
        }
    }

    SECTION("a stability-guard violation is accepted with a warning") {
        nlohmann::json doc = minimal_config();
        doc["noise"]["f_modes"][0]["amplitude"] = 3.0;  // F1 = 9, stiff heat part
        doc["scheme"]["dt"] = 5e-4;
        doc["scheme"]["t_final"] = 5e-3;
        RunConfig cfg = parse_config_json(doc);
        REQUIRE(cfg.warnings.size() == 1);
        CHECK(cfg.warnings[0].find("stability guard") != std::string::npos);
    }

    SECTION("galerkin formulation requires delta") {
        nlohmann::json doc = minimal_config();
        doc["model"].erase("delta");
        CHECK_THROWS_AS(parse_config_json(doc), ConfigError);
    }

    SECTION("the taylor-green preset is divergence-free and positive") {
        RunConfig cfg = parse_config_json(minimal_config());
        SystemState s = build_initial_state(cfg);
        CHECK(s.u.divergence_residual() <= 1e-12 * std::max(1.0, s.u.l2_norm()));
        CHECK(min_collocation_value(s.scalar, 2).value > 0);
        CHECK(total_energy(s) > 0);
    }

    SECTION("explicit mode lists build the stated coefficients") {
        nlohmann::json doc = minimal_config();
        doc["initial"] = {{"preset", "modes"},
                          {"psi_mean", 2.0},
                          {"psi_modes", {{{"k", {1, 0, 0}}, {"re", 0.0}, {"im", -0.25}}}},
                          {"u_modes",
                           {{{"k", {0, 1, 0}},
                             {"re", {0.1, 0.0, 0.0}},
                             {"im", {0.0, 0.0, 0.0}}}}}};
        RunConfig cfg = parse_config_json(doc);
        SystemState s = build_initial_state(cfg);
        CHECK(s.scalar.at({0, 0, 0}).real() == Catch::Approx(2.0));
        CHECK(s.scalar.at({1, 0, 0}).imag() == Catch::Approx(-0.25));
        CHECK(s.u[0].at({0, 1, 0}).real() == Catch::Approx(0.1));
        CHECK(s.u.divergence_residual() <= 1e-12);
    }
}

TEST_CASE("diagnostics CSV layout") {
    DiagnosticRecord r;
    r.t = 0.5;
    r.energy = 1.25;
    r.entropy_math = -1.5;
    r.admissibility_margin = 0.0;
    r.grad_u_norm = 2.0;
    r.grad_psi_norm = 3.0;
    // entropy_phys, dissipation_budget, relative_energy absent -> empty cells
    CHECK(to_csv_row(r) == "0.5,1.25,,-1.5,,0,,2,3");

    r.entropy_phys = 0.125;
    r.dissipation_budget = 4.0;
    r.relative_energy = 1e-10;
    CHECK(to_csv_row(r) == "0.5,1.25,0.125,-1.5,4,0,1e-10,2,3");
}

TEST_CASE("coefficient state files round-trip at full precision") {
    RngStream rng(91);
    TorusGrid grid(3, 12);
    SystemState s(grid);
    s.u = random_vector(grid, 3, 0.731234567890123, rng, true);
    s.scalar = random_scalar(grid, 3, 1.9182736455463728, rng);
    s.t = 0.123456789012345678;

    std::filesystem::path tmp = std::filesystem::temp_directory_path() / "nsf_state_test.nsf";
    write_state(tmp.string(), s);
    SystemState back = read_state(tmp.string());

    CHECK(back.t == s.t);
    CHECK(back.vars == s.vars);
    bool exact = true;
    grid.for_each_mode([&](Wavevector k, std::size_t) {
        for (int i = 0; i < 3; ++i) exact = exact && back.u[i].at(k) == s.u[i].at(k);
        exact = exact && back.scalar.at(k) == s.scalar.at(k);
    });
    CHECK(exact);
    std::filesystem::remove(tmp);
}

TEST_CASE("format_double round trips") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
        std::string s = format_double(x);
        CHECK(std::stod(s) == x);
    }
}

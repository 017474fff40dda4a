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
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsf/integrators.hpp"

namespace nsf {

/// Optional weak-strong experiment settings.
struct WeakStrongConfig {
    double perturbation_amplitude = 1e-3;
    Wavevector mode{1, 0, 0};
};

/// Optional scheme-comparison settings.
struct CompareConfig {
    std::vector<double> dt_list;
    std::vector<double> delta_list;
};

struct InitialConfig {
    std::string preset = "taylor-green";
    double velocity_amplitude = 0;
    double psi_mean = 0;
    double psi_amplitude = 0;
    Wavevector psi_mode{1, 0, 0};
    // preset "modes": explicit coefficients (Pi-projected for u).
    struct UMode {
        Wavevector k;
        std::array<double, 3> re{}, im{};
    };
    struct PsiMode {
        Wavevector k;
        double re = 0, im = 0;
    };
    std::vector<UMode> u_modes;
    std::vector<PsiMode> psi_modes;
};

/// Fully validated run configuration. Only I/O cosmetics default
/// (fine_factor = 2, save_every = 10, output_dir = "out"); every physics
/// parameter must be stated.
struct RunConfig {
    int grid_m = 0;
    int grid_n = 0;
    int fine_factor = 2;
    ModelParams model;
    std::vector<NoiseMode> f_modes, g_modes;
    double f_constant = 0, g_constant = 0;
    SchemeKind scheme_kind = SchemeKind::euler_maruyama_ito;
    Formulation formulation = Formulation::psi_system;
    double dt = 0;
    double t_final = 0;
    long save_every = 10;
    InitialConfig initial;
    std::uint64_t seed = 0;
    int n_paths = 1;
    std::string output_dir = "out";
    std::optional<WeakStrongConfig> weak_strong;
    std::optional<CompareConfig> compare;
    std::vector<std::string> warnings;
    nlohmann::json raw;  // config echo for metadata / replay

    long steps() const { return std::lround(t_final / dt); }

    TorusGrid grid() const { return TorusGrid(grid_m, grid_n, fine_factor); }

    NoiseBasis basis() const {
        return NoiseBasis::build(f_modes, g_modes, grid(), f_constant, g_constant);
    }

    SchemeSpec scheme() const {
        SchemeSpec s;
        s.kind = scheme_kind;
        s.formulation = formulation;
        s.dt = dt;
        s.steps = steps();
        return s;
    }
};

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(const nlohmann::json& j) : root_(j) {}

    std::vector<std::string> issues;

    template <class T>
    T require(const nlohmann::json& j, const std::string& path, const char* key) {
        if (!j.contains(key)) {
            issues.push_back(path + key + ": missing required field");
            return T{};
        }
        try {
            return j.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            issues.push_back(path + key + ": " + e.what());
            return T{};
        }
    }

    template <class T>
    T optional(const nlohmann::json& j, const std::string& path, const char* key, T fallback) {
        if (!j.contains(key)) return fallback;
        try {
            return j.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            issues.push_back(path + key + ": " + e.what());
            return fallback;
        }
    }

    Wavevector wavevector(const nlohmann::json& j, const std::string& where) {
        if (!j.is_array() || j.size() != 3 || !j[0].is_number_integer()) {
            issues.push_back(where + ": expected an integer triple");
            return {0, 0, 0};
        }
        return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
    }

    const nlohmann::json& root() const { return root_; }

private:
    const nlohmann::json& root_;
};

}  // namespace detail

inline SchemeKind scheme_kind_from_string(const std::string& s) {
    if (s == "euler_maruyama_ito") return SchemeKind::euler_maruyama_ito;
    if (s == "heun_stratonovich") return SchemeKind::heun_stratonovich;
    if (s == "imex_ito") return SchemeKind::imex_ito;
    throw InvalidOperand("unknown scheme kind: " + s);
}

inline Formulation formulation_from_string(const std::string& s) {
    if (s == "psi_system") return Formulation::psi_system;
    if (s == "theta_system") return Formulation::theta_system;
    if (s == "galerkin") return Formulation::galerkin;
    throw InvalidOperand("unknown formulation: " + s);
}

/// Parse and validate a configuration document. Throws ConfigError carrying
/// the full list of problems, not just the first.
inline RunConfig parse_config_json(const nlohmann::json& doc) {
    detail::ConfigReader r(doc);
    RunConfig cfg;
    cfg.raw = doc;

    if (!doc.contains("grid") || !doc.contains("scheme") || !doc.contains("noise") ||
        !doc.contains("model") || !doc.contains("initial")) {
        for (const char* k : {"grid", "scheme", "noise", "model", "initial"})
            if (!doc.contains(k)) r.issues.push_back(std::string(k) + ": missing section");
    }

    if (doc.contains("grid")) {
        const auto& g = doc.at("grid");
        cfg.grid_m = r.require<int>(g, "grid.", "m");
        cfg.grid_n = r.require<int>(g, "grid.", "n");
        cfg.fine_factor = r.optional<int>(g, "grid.", "fine_factor", 2);
        if (cfg.grid_m >= 1 && cfg.grid_n < 2 * cfg.grid_m + 1)
            r.issues.push_back("grid.n: must be >= 2m+1");
        if (cfg.grid_m < 1) r.issues.push_back("grid.m: must be >= 1");
        if (cfg.fine_factor < 1) r.issues.push_back("grid.fine_factor: must be >= 1");
    }

    if (doc.contains("model")) {
        const auto& m = doc.at("model");
        if (m.contains("delta")) {
            double d = r.require<double>(m, "model.", "delta");
            cfg.model.delta = d;
            if (!(d > 0 && d < 1)) r.issues.push_back("model.delta: must lie in (0,1)");
        }
        cfg.model.epsilon = r.require<double>(m, "model.", "epsilon");
        if (!(cfg.model.epsilon >= 0 && cfg.model.epsilon < 1))
            r.issues.push_back("model.epsilon: must lie in [0,1)");
        if (m.contains("truncation_radius")) {
            double rad = r.require<double>(m, "model.", "truncation_radius");
            cfg.model.truncation_radius = rad;
            if (!(rad > 0)) r.issues.push_back("model.truncation_radius: must be positive");
        }
    }

    if (doc.contains("noise")) {
        const auto& nz = doc.at("noise");
        auto read_modes = [&](const char* key, std::vector<NoiseMode>& out) {
            if (!nz.contains(key)) {
                r.issues.push_back(std::string("noise.") + key + ": missing required list");
                return;
            }
            std::size_t i = 0;
            for (const auto& e : nz.at(key)) {
                std::string where = std::string("noise.") + key + "[" + std::to_string(i) + "]";
                NoiseMode mode;
                mode.k = r.wavevector(e.contains("k") ? e.at("k") : nlohmann::json(), where + ".k");
                mode.amplitude = r.require<double>(e, where + ".", "amplitude");
                if (mode.k.norm_inf() == 0)
                    r.issues.push_back(where + ".k: zero mode; use the constant coefficient");
                else if (cfg.grid_m >= 1 && mode.k.norm_inf() > cfg.grid_m)
                    r.issues.push_back(where + ".k: wavevector outside grid cutoff m=" +
                                       std::to_string(cfg.grid_m));
                if (!(mode.amplitude > 0)) r.issues.push_back(where + ".amplitude: must be positive");
                out.push_back(mode);
                ++i;
            }
        };
        read_modes("f_modes", cfg.f_modes);
        read_modes("g_modes", cfg.g_modes);
        cfg.f_constant = r.optional<double>(nz, "noise.", "f_constant", 0.0);
        cfg.g_constant = r.optional<double>(nz, "noise.", "g_constant", 0.0);
        if (cfg.f_constant < 0) r.issues.push_back("noise.f_constant: must be >= 0");
        if (cfg.g_constant < 0) r.issues.push_back("noise.g_constant: must be >= 0");
    }

    if (doc.contains("scheme")) {
        const auto& s = doc.at("scheme");
        try {
            cfg.scheme_kind = scheme_kind_from_string(r.require<std::string>(s, "scheme.", "kind"));
        } catch (const InvalidOperand& e) {
            r.issues.push_back(std::string("scheme.kind: ") + e.what());
        }
        try {
            cfg.formulation =
                formulation_from_string(r.require<std::string>(s, "scheme.", "formulation"));
        } catch (const InvalidOperand& e) {
            r.issues.push_back(std::string("scheme.formulation: ") + e.what());
        }
        cfg.dt = r.require<double>(s, "scheme.", "dt");
        cfg.t_final = r.require<double>(s, "scheme.", "t_final");
        cfg.save_every = r.optional<long>(s, "scheme.", "save_every", 10);
        if (!(cfg.dt > 0)) r.issues.push_back("scheme.dt: must be positive");
        if (!(cfg.t_final > 0)) r.issues.push_back("scheme.t_final: must be positive");
        if (cfg.save_every < 1) r.issues.push_back("scheme.save_every: must be >= 1");
        if (cfg.dt > 0 && cfg.t_final > 0) {
            long n = std::lround(cfg.t_final / cfg.dt);
            if (n < 0 || std::abs(n * cfg.dt - cfg.t_final) > 1e-9 * cfg.t_final)
                r.issues.push_back("scheme.dt: must divide t_final");
        }
        if (cfg.scheme_kind == SchemeKind::heun_stratonovich &&
            cfg.formulation != Formulation::psi_system)
            r.issues.push_back(
                "scheme: heun_stratonovich pairs only with the psi_system (Stratonovich) drift");
        if (cfg.formulation == Formulation::galerkin && doc.contains("model") &&
            !doc.at("model").contains("delta"))
            r.issues.push_back("model.delta: required by the galerkin formulation");
    }

    if (doc.contains("initial")) {
        const auto& ic = doc.at("initial");
        cfg.initial.preset = r.require<std::string>(ic, "initial.", "preset");
        if (cfg.initial.preset == "taylor-green") {
            cfg.initial.velocity_amplitude = r.require<double>(ic, "initial.", "velocity_amplitude");
            cfg.initial.psi_mean = r.require<double>(ic, "initial.", "psi_mean");
            cfg.initial.psi_amplitude = r.require<double>(ic, "initial.", "psi_amplitude");
            if (ic.contains("psi_mode"))
                cfg.initial.psi_mode = r.wavevector(ic.at("psi_mode"), "initial.psi_mode");
            if (cfg.grid_m >= 1 && cfg.initial.psi_mode.norm_inf() > cfg.grid_m)
                r.issues.push_back("initial.psi_mode: outside grid cutoff");
        } else if (cfg.initial.preset == "modes") {
            cfg.initial.psi_mean = r.optional<double>(ic, "initial.", "psi_mean", 0.0);
            if (ic.contains("u_modes")) {
                std::size_t i = 0;
                for (const auto& e : ic.at("u_modes")) {
                    std::string where = "initial.u_modes[" + std::to_string(i) + "]";
                    InitialConfig::UMode um;
                    um.k = r.wavevector(e.contains("k") ? e.at("k") : nlohmann::json(), where + ".k");
                    um.re = r.optional<std::array<double, 3>>(e, where + ".", "re", {});
                    um.im = r.optional<std::array<double, 3>>(e, where + ".", "im", {});
                    if (cfg.grid_m >= 1 && um.k.norm_inf() > cfg.grid_m)
                        r.issues.push_back(where + ".k: outside grid cutoff");
                    cfg.initial.u_modes.push_back(um);
                    ++i;
                }
            }
            if (ic.contains("psi_modes")) {
                std::size_t i = 0;
                for (const auto& e : ic.at("psi_modes")) {
                    std::string where = "initial.psi_modes[" + std::to_string(i) + "]";
                    InitialConfig::PsiMode pm;
                    pm.k = r.wavevector(e.contains("k") ? e.at("k") : nlohmann::json(), where + ".k");
                    pm.re = r.optional<double>(e, where + ".", "re", 0.0);
                    pm.im = r.optional<double>(e, where + ".", "im", 0.0);
                    if (cfg.grid_m >= 1 && pm.k.norm_inf() > cfg.grid_m)
                        r.issues.push_back(where + ".k: outside grid cutoff");
                    cfg.initial.psi_modes.push_back(pm);
                    ++i;
                }
            }
        } else {
            r.issues.push_back("initial.preset: unknown preset '" + cfg.initial.preset + "'");
        }
    }

    cfg.seed = r.require<std::uint64_t>(doc, "", "seed");
    cfg.n_paths = r.require<int>(doc, "", "n_paths");
    if (cfg.n_paths < 1) r.issues.push_back("n_paths: must be >= 1");
    cfg.output_dir = r.optional<std::string>(doc, "", "output_dir", "out");

    if (doc.contains("weak_strong")) {
        const auto& w = doc.at("weak_strong");
        WeakStrongConfig ws;
        ws.perturbation_amplitude =
            r.optional<double>(w, "weak_strong.", "perturbation_amplitude", 1e-3);
        if (w.contains("mode")) ws.mode = r.wavevector(w.at("mode"), "weak_strong.mode");
        if (cfg.grid_m >= 1 && ws.mode.norm_inf() > cfg.grid_m)
            r.issues.push_back("weak_strong.mode: outside grid cutoff");
        cfg.weak_strong = ws;
    }
    if (doc.contains("compare_schemes")) {
        const auto& c = doc.at("compare_schemes");
        CompareConfig cc;
        cc.dt_list = r.optional<std::vector<double>>(c, "compare_schemes.", "dt_list", {});
        cc.delta_list = r.optional<std::vector<double>>(c, "compare_schemes.", "delta_list", {});
        cfg.compare = cc;
    }

    if (!r.issues.empty()) throw ConfigError(std::move(r.issues));

    // Accepted-with-warning conditions, echoed into run metadata.
    NoiseConstants nc;
    for (const auto& m : cfg.f_modes) {
        nc.F1 += m.amplitude * m.amplitude;
        nc.F2 += 4.0 * pi * pi * m.k.norm2() * m.amplitude * m.amplitude;
    }
    nc.F1 += cfg.f_constant * cfg.f_constant;
    for (const auto& m : cfg.g_modes) {
        nc.G1 += m.amplitude * m.amplitude;
        nc.G2 += 4.0 * pi * pi * m.k.norm2() * m.amplitude * m.amplitude;
    }
    nc.G1 += cfg.g_constant * cfg.g_constant;
    if (cfg.scheme_kind != SchemeKind::imex_ito &&
        stability_guard_violated(cfg.dt, cfg.grid_m, nc))
        cfg.warnings.push_back(
            "scheme.dt: explicit-scheme stability guard exceeded "
            "(dt (1+F1/2+G1/2) 4 pi^2 3 m^2 > 2); expect linear stiffness");

    return cfg;
}

/// Parse a config file. A run-metadata document (with an embedded "config"
/// object) is accepted too, which makes replay-from-metadata a one-liner.
inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open file"});
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({path + ": " + e.what()});
    }
    if (doc.contains("config") && doc.at("config").is_object())
        return parse_config_json(doc.at("config"));
    return parse_config_json(doc);
}

/// Initial state from the configured preset.
inline SystemState build_initial_state(const RunConfig& cfg) {
    TorusGrid grid = cfg.grid();
    SystemState state(grid);
    const InitialConfig& ic = cfg.initial;
    if (ic.preset == "taylor-green") {
        const double a = ic.velocity_amplitude;
        // u = a (sin(2pi x1) cos(2pi x2), -cos(2pi x1) sin(2pi x2), 0)
        state.u[0].add_sin({1, 1, 0}, a / 2);
        state.u[0].add_sin({1, -1, 0}, a / 2);
        state.u[1].add_sin({1, 1, 0}, -a / 2);
        state.u[1].add_sin({1, -1, 0}, a / 2);
        state.scalar = ScalarField::constant(grid, ic.psi_mean);
        state.scalar.add_sin(ic.psi_mode, ic.psi_amplitude);
    } else {
        for (const auto& um : ic.u_modes)
            for (int i = 0; i < 3; ++i)
                state.u[i].set_mode(um.k, {um.re[static_cast<std::size_t>(i)],
                                           um.im[static_cast<std::size_t>(i)]});
        state.scalar = ScalarField::constant(grid, ic.psi_mean);
        for (const auto& pm : ic.psi_modes) state.scalar.set_mode(pm.k, {pm.re, pm.im});
    }
    state.u = leray_project(std::move(state.u));
    state.vars = Variables::psi;
    if (cfg.formulation == Formulation::theta_system)
        return psi_theta_convert(state, ConvertDirection::psi_to_theta);
    return state;
}

}  // namespace nsf

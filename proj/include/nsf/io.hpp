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

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nsf/integrators.hpp"

namespace nsf {

/// Locale-independent shortest round-trip formatting for doubles; used in
/// every artifact so replays are byte-identical.
inline std::string format_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Diagnostic CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kDiagnosticsHeader =
    "t,energy,entropy_phys,entropy_math,dissipation_budget,admissibility_margin,"
    "relative_energy,grad_u_norm,grad_psi_norm";

inline std::string to_csv_row(const DiagnosticRecord& r) {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    std::string row = format_double(r.t);
    row += ',' + format_double(r.energy);
    row += ',' + opt(r.entropy_phys);
    row += ',' + format_double(r.entropy_math);
    row += ',' + opt(r.dissipation_budget);
    row += ',' + format_double(r.admissibility_margin);
    row += ',' + opt(r.relative_energy);
    row += ',' + format_double(r.grad_u_norm);
    row += ',' + format_double(r.grad_psi_norm);
    return row;
}

inline void write_diagnostics_csv(const std::string& path,
                                  const std::vector<DiagnosticRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << kDiagnosticsHeader << '\n';
    for (const auto& r : records) out << to_csv_row(r) << '\n';
}

// ---------------------------------------------------------------------------
// Coefficient state files: plain text, full precision, diffable
// ---------------------------------------------------------------------------

inline void write_scalar_block(std::ostream& out, const char* name, const ScalarField& f) {
    out << "field " << name << '\n';
    f.grid().for_each_mode([&](Wavevector k, std::size_t idx) {
        const std::complex<double>& c = f.data()[idx];
        out << k.k1 << ' ' << k.k2 << ' ' << k.k3 << ' ' << format_double(c.real()) << ' '
            << format_double(c.imag()) << '\n';
    });
}

inline void write_state(const std::string& path, const SystemState& state) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    const TorusGrid& g = state.grid();
    out << "nsf-state 1\n";
    out << "grid " << g.cutoff() << ' ' << g.points() << ' ' << g.fine_factor() << '\n';
    out << "time " << format_double(state.t) << '\n';
    out << "vars " << (state.vars == Variables::psi ? "psi" : "theta") << '\n';
    write_scalar_block(out, "u0", state.u[0]);
    write_scalar_block(out, "u1", state.u[1]);
    write_scalar_block(out, "u2", state.u[2]);
    write_scalar_block(out, "scalar", state.scalar);
    out << "end\n";
}

inline SystemState read_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw Error(path + ": truncated before " + what);
        return line;
    };
    if (next_line("header") != "nsf-state 1") throw Error(path + ": not an nsf-state file");
    int m = 0, n = 0, fine = 2;
    {
        std::istringstream ss(next_line("grid"));
        std::string tag;
        ss >> tag >> m >> n >> fine;
        if (tag != "grid" || !ss) throw Error(path + ": malformed grid line");
    }
    TorusGrid grid(m, n, fine);
    SystemState state(grid);
    {
        std::istringstream ss(next_line("time"));
        std::string tag;
        ss >> tag >> state.t;
        if (tag != "time") throw Error(path + ": malformed time line");
    }
    {
        std::istringstream ss(next_line("vars"));
        std::string tag, v;
        ss >> tag >> v;
        if (tag != "vars" || (v != "psi" && v != "theta")) throw Error(path + ": malformed vars line");
        state.vars = v == "psi" ? Variables::psi : Variables::theta;
    }
    auto read_block = [&](ScalarField& f) {
        std::istringstream hs(next_line("field header"));
        std::string tag, name;
        hs >> tag >> name;
        if (tag != "field") throw Error(path + ": expected a field block");
        std::size_t count = grid.mode_count();
        for (std::size_t i = 0; i < count; ++i) {
            std::istringstream ss(next_line("coefficient"));
            Wavevector k;
            double re = 0, im = 0;
            ss >> k.k1 >> k.k2 >> k.k3 >> re >> im;
            if (!ss) throw Error(path + ": malformed coefficient line");
            if (!grid.contains(k)) throw Error(path + ": wavevector outside cutoff");
            f.at(k) = {re, im};
        }
    };
    read_block(state.u[0]);
    read_block(state.u[1]);
    read_block(state.u[2]);
    read_block(state.scalar);
    if (next_line("end") != "end") throw Error(path + ": missing end marker");
    state.u.set_divergence_free(state.u.divergence_residual() <=
                                1e-12 * std::max(1.0, state.u.l2_norm()));
    return state;
}

}  // namespace nsf

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
#include <stdexcept>
#include <string>
#include <vector>

namespace nsf {

/// Base class of every error this library raises.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidCutoff : Error {
    using Error::Error;
};

struct InvalidMode : Error {
    using Error::Error;
};

struct InvalidOperand : Error {
    using Error::Error;
};

struct GridMismatch : Error {
    using Error::Error;
};

struct InsufficientHeadroom : Error {
    using Error::Error;
};

/// A pointwise evaluation produced a non-finite value. Carries the offending
/// collocation point and the value seen there.
struct NonfiniteEvaluation : Error {
    std::array<double, 3> location;
    double value;

    NonfiniteEvaluation(const std::string& msg, std::array<double, 3> x, double v)
        : Error(msg), location(x), value(v) {}
};

/// A formulation requiring pointwise positivity met a non-positive value.
struct PositivityViolation : Error {
    std::array<double, 3> location;
    double min_value;

    PositivityViolation(const std::string& msg, std::array<double, 3> x, double v)
        : Error(msg), location(x), min_value(v) {}
};

/// Time stepping produced non-finite coefficients.
struct BlowUp : Error {
    long step;

    BlowUp(const std::string& msg, long step_index) : Error(msg), step(step_index) {}
};

/// Configuration rejected; `issues` lists every problem found, not just the first.
struct ConfigError : Error {
    std::vector<std::string> issues;

    explicit ConfigError(std::vector<std::string> problems)
        : Error(join(problems)), issues(std::move(problems)) {}

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "invalid configuration:";
        for (const auto& e : v) {
            s += "\n  - ";
            s += e;
        }
        return s;
    }
};

}  // namespace nsf

// Shared helpers: error checking, numeric formatting, small math utilities.
#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace shmm {

// Precondition / input validation failure.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Solver did not reach its tolerance (carries diagnostic text).
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidInput(msg);
}

inline void require_solved(bool cond, const std::string& msg) {
    if (!cond) throw SolverFailure(msg);
}

constexpr double pi = 3.14159265358979323846;
constexpr double two_pi = 2.0 * pi;

// Shortest-round-trip decimal formatting, used by every CSV writer so that
// identical runs produce byte-identical artifacts.
inline std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline bool almost_equal(double a, double b, double tol) {
    return std::abs(a - b) <= tol;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::abs(b);
}

}  // namespace shmm

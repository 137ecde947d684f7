#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace opalab {

/// Base class for every condition the solvers signal deliberately.
/// Plain precondition violations (bad exponents, empty coefficient
/// lists) throw std::domain_error / std::invalid_argument instead.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// f(0) == 0: every optimal approximant of 1/f is identically zero.
struct ZeroAtOrigin : Error {
    using Error::Error;
};

/// A root bracket showed no sign change. Carries the sampled values
/// so the caller can see what the function looked like.
struct BracketFailure : Error {
    std::vector<std::pair<double, double>> samples;  // (x, f(x))
    BracketFailure(const std::string& msg, std::vector<std::pair<double, double>> s = {})
        : Error(msg), samples(std::move(s)) {}
};

/// An iterative solver ran out of iterations. best_point/best_residual
/// hold the most promising iterate seen.
struct NewtonDivergence : Error {
    std::vector<double> best_point;
    double best_residual = 0.0;
    NewtonDivergence(const std::string& msg, std::vector<double> pt = {}, double res = 0.0)
        : Error(msg), best_point(std::move(pt)), best_residual(res) {}
};

/// A nonlinear system converged to a root violating the sign structure
/// the problem requires (e.g. a negative coefficient).
struct InvalidBranch : Error {
    using Error::Error;
};

struct NotARoot : Error {
    using Error::Error;
};

/// Operation requires p != 2 (guard band |p - 2| > 1e-6).
struct UnsupportedExponent : Error {
    using Error::Error;
};

/// A bounded search exceeded its configured cap.
struct CapExceeded : Error {
    using Error::Error;
};

struct Singularity : Error {
    using Error::Error;
};

struct PoleAtZero : Error {
    using Error::Error;
};

/// Requested value lies outside the range of the requested monotone
/// branch; orbit searches use this to prune.
struct BranchMiss : Error {
    std::vector<double> partial_trace;
    BranchMiss(const std::string& msg, std::vector<double> trace = {})
        : Error(msg), partial_trace(std::move(trace)) {}
};

struct OutOfRange : Error {
    using Error::Error;
};

/// Root coalescence (e.g. the two positive fixed-point roots merging at t = 1).
struct Degenerate : Error {
    using Error::Error;
};

}  // namespace opalab

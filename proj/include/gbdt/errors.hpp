#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gbdt {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shape mismatch between operands; the message names both shapes.
struct DimensionError : Error {
    using Error::Error;
};

/// A matrix was singular to working tolerance. Carries the condition
/// estimate available at the point of failure (pivot ratio when the
/// inverse could not be formed).
struct SingularError : Error {
    double condition_estimate;
    SingularError(const std::string& msg, double cond)
        : Error(msg), condition_estimate(cond) {}
};

/// Sylvester systems whose spectra (nearly) collide.
struct ResonanceError : Error {
    using Error::Error;
};

/// Branch-cut crossing or a point on the shift locus of a square root.
struct BranchCutError : Error {
    using Error::Error;
};

/// A precondition failed on an integration path; carries the location and a
/// numeric kind used for per-point status flags (values of PointStatus).
struct PathError : Error {
    double xi, eta;
    int kind;
    PathError(const std::string& msg, double xi_, double eta_, int kind_ = 0)
        : Error(msg + " at (xi=" + std::to_string(xi_) +
                ", eta=" + std::to_string(eta_) + ")"),
          xi(xi_), eta(eta_), kind(kind_) {}
};

/// Step-halving verification of an integration failed.
struct AccuracyError : Error {
    using Error::Error;
};

/// Input validation failure; aggregates every detected violation.
struct ValidationError : Error {
    std::vector<std::string> issues;
    explicit ValidationError(std::vector<std::string> list)
        : Error(join(list)), issues(std::move(list)) {}

private:
    static std::string join(const std::vector<std::string>& list) {
        std::string out = "validation failed:";
        for (const auto& s : list) out += "\n  - " + s;
        return out;
    }
};

}  // namespace gbdt

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gbdt/errors.hpp"
#include "gbdt/jordan.hpp"
#include "gbdt/matrix.hpp"

namespace gbdt {

/// The data determining one transformation: the generalized eigenvalue in
/// Jordan form, S(0,0), Pi(0,0) and the signature matrix J. The identity
///   A(0,0) S(0,0) - S(0,0) A(0,0)* = i Pi(0,0) J Pi(0,0)*
/// is validated against the initial value A(0,0) of the flow it is used
/// with (the Jordan matrix itself, the closed-form field at the origin, or
/// its resolvent), since the identity is transported exactly from there.
class Triple {
public:
    Triple(JordanSpec spec, ComplexMatrix s0, ComplexMatrix pi0, ComplexMatrix jmat,
           double tol = 1e-10)
        : spec_(std::move(spec)), s0_(std::move(s0)), pi0_(std::move(pi0)),
          jmat_(std::move(jmat)) {
        std::vector<std::string> issues;
        const std::size_t n = spec_.size();
        if (!s0_.square() || s0_.rows() != n)
            issues.push_back("S0 must be " + std::to_string(n) + "x" + std::to_string(n) +
                             ", got " + s0_.shape_string());
        if (pi0_.rows() != n)
            issues.push_back("Pi0 must have " + std::to_string(n) + " rows, got " +
                             pi0_.shape_string());
        if (!jmat_.square() || jmat_.rows() != pi0_.cols())
            issues.push_back("J must be square of size matching Pi0 columns");
        if (issues.empty()) {
            if (difference_norm(jmat_, jmat_.adjoint()) > 1e-12)
                issues.push_back("J is not self-adjoint within 1e-12");
            if (difference_norm(jmat_ * jmat_, ComplexMatrix::identity(jmat_.rows())) > 1e-12)
                issues.push_back("J^2 differs from I by more than 1e-12");
            if (HermitianFlag{tol}.deviation(s0_) > tol)
                issues.push_back("S0 is not Hermitian within tolerance");
        }
        if (!issues.empty()) throw ValidationError(std::move(issues));
    }

    const JordanSpec& spec() const { return spec_; }
    const ComplexMatrix& S0() const { return s0_; }
    const ComplexMatrix& Pi0() const { return pi0_; }
    const ComplexMatrix& J() const { return jmat_; }
    std::size_t n() const { return spec_.size(); }
    std::size_t m() const { return jmat_.rows(); }

    /// Relative residual of the matrix identity against a candidate A(0,0).
    double identity_residual(const ComplexMatrix& anchor) const {
        const ComplexMatrix lhs = anchor * s0_ - s0_ * anchor.adjoint();
        const ComplexMatrix rhs = Complex(0, 1) * (pi0_ * (jmat_ * pi0_.adjoint()));
        return difference_norm(lhs, rhs) / relative_scale(s0_);
    }

    void require_identity(const ComplexMatrix& anchor, double tol = 1e-10) const {
        const double r = identity_residual(anchor);
        if (r > tol)
            throw ValidationError({"triple identity residual " + std::to_string(r) +
                                   " against the flow's A(0,0) exceeds " + std::to_string(tol)});
    }

    /// Realness of the triple data (the gravitational case needs all of
    /// A, S0, Pi0 real and i J real).
    double max_imag() const {
        double r = std::max(s0_.max_imag_abs(), pi0_.max_imag_abs());
        r = std::max(r, (jmat_ * Complex(0, 1)).max_imag_abs());
        return r;
    }

private:
    JordanSpec spec_;
    ComplexMatrix s0_, pi0_, jmat_;
};

}  // namespace gbdt

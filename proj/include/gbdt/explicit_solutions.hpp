#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "gbdt/background.hpp"
#include "gbdt/errors.hpp"
#include "gbdt/jordan.hpp"
#include "gbdt/matrix.hpp"
#include "gbdt/path.hpp"

namespace gbdt {

/// Closed form of the propagated generalized eigenvalue field,
///   A(xi,eta) = (R(2h) - R(-2f)) (R(2h) + R(-2f))^-1,
/// built from the commuting shifted square roots of the Jordan data.
inline ComplexMatrix explicit_A(double xi, double eta, const JordanSpec& spec,
                                const Background& bg,
                                const BranchChoice& branch = BranchChoice::principal()) {
    const ComplexMatrix r1 = shifted_sqrt(spec, Complex(2.0 * bg.h()(eta), 0.0), branch);
    const ComplexMatrix r2 = shifted_sqrt(spec, Complex(-2.0 * bg.f()(xi), 0.0), branch);
    LuDecomposition lu(r1 + r2);
    if (lu.singular())
        throw SingularError("explicit_A: root sum not invertible at (xi=" +
                                std::to_string(xi) + ", eta=" + std::to_string(eta) + ")",
                            lu.pivot_ratio());
    return (r1 - r2) * lu.inverse("explicit_A root sum");
}

/// nu(xi) = sqrt(c + 2 f(xi)) and omega(eta) = sqrt(c - 2 h(eta)) of the
/// single-Jordan-block closed forms.
inline Complex jordan2_nu(Complex c, double xi, const Background& bg) {
    return guarded_sqrt(c + 2.0 * bg.f()(xi), 1e-12, "jordan2 nu");
}
inline Complex jordan2_omega(Complex c, double eta, const Background& bg) {
    return guarded_sqrt(c - 2.0 * bg.h()(eta), 1e-12, "jordan2 omega");
}

inline void require_unit_slope(const Background& bg, const char* what) {
    const bool ok = bg.f().is_affine() && bg.h().is_affine() &&
                    std::abs(bg.f().derivative()(0.0) + 1.0) < 1e-14 &&
                    std::abs(bg.h().derivative()(0.0) - 1.0) < 1e-14;
    if (!ok)
        throw ValidationError({std::string(what) +
                               " requires the unit-slope background f = f0 - xi, h = h0 + eta"});
}

/// Closed-form Pi for the 2x2 Jordan block and the unit-slope background:
///   Lambda_1 = e^{-(nu+omega)^2/4} (I - (nu/omega + omega/nu)/4 S_1) C_1,
///   Lambda_2 = e^{+(nu+omega)^2/4} (I + (nu/omega + omega/nu)/4 S_1) C_2,
/// where C = [C_1 C_2] is the 2 x 2p parameter matrix of the family. The
/// value of Pi at the origin is this formula evaluated there (the parameter
/// matrix is not that value).
inline ComplexMatrix explicit_pi_jordan2(Point at, Complex c, const ComplexMatrix& param,
                                         std::size_t p, const Background& bg) {
    require_unit_slope(bg, "explicit_pi_jordan2");
    if (param.rows() != 2 || param.cols() != 2 * p)
        throw DimensionError("explicit_pi_jordan2: parameter matrix must be 2x" +
                             std::to_string(2 * p) + ", got " + param.shape_string());
    const Complex nu = jordan2_nu(c, at.xi, bg);
    const Complex omega = jordan2_omega(c, at.eta, bg);
    const Complex t = nu / omega + omega / nu;
    const Complex sum = nu + omega;
    const Complex e = std::exp(-sum * sum / 4.0);

    ComplexMatrix m1{{e, -e * t / 4.0}, {0.0, e}};
    ComplexMatrix m2{{1.0 / e, t / (4.0 * e)}, {0.0, 1.0 / e}};
    ComplexMatrix pi(2, 2 * p);
    pi.set_block(0, 0, m1 * param.block(0, 0, 2, p));
    pi.set_block(0, p, m2 * param.block(0, p, 2, p));
    return pi;
}

/// Recovers the parameter matrix of the closed-form Pi family from its value
/// at the origin (inverts the two triangular factors there).
inline ComplexMatrix jordan2_param_from_origin(Complex c, const Background& bg,
                                               const ComplexMatrix& pi_origin,
                                               std::size_t p) {
    require_unit_slope(bg, "jordan2_param_from_origin");
    if (pi_origin.rows() != 2 || pi_origin.cols() != 2 * p)
        throw DimensionError("jordan2_param_from_origin: Pi(0,0) must be 2x" +
                             std::to_string(2 * p));
    const Complex nu = jordan2_nu(c, 0.0, bg);
    const Complex omega = jordan2_omega(c, 0.0, bg);
    const Complex t = nu / omega + omega / nu;
    const Complex sum = nu + omega;
    const Complex e = std::exp(-sum * sum / 4.0);
    ComplexMatrix m1_inv{{1.0 / e, t / (4.0 * e)}, {0.0, 1.0 / e}};
    ComplexMatrix m2_inv{{e, -e * t / 4.0}, {0.0, e}};
    ComplexMatrix param(2, 2 * p);
    param.set_block(0, 0, m1_inv * pi_origin.block(0, 0, 2, p));
    param.set_block(0, p, m2_inv * pi_origin.block(0, p, 2, p));
    return param;
}

/// S recovered from the identity A S - S A* = i Pi J Pi* (unique away from
/// the resonance set of A); Hermitian by uniqueness.
inline ComplexMatrix solve_S_identity(const ComplexMatrix& a, const ComplexMatrix& pi,
                                      const ComplexMatrix& jmat, double tol = 1e-9) {
    const ComplexMatrix k = Complex(0, 1) * (pi * (jmat * pi.adjoint()));
    ComplexMatrix s = solve_sylvester(a, a.adjoint(), k, tol);
    const double herm = difference_norm(s, s.adjoint()) / relative_scale(s);
    if (herm > tol)
        throw ResonanceError("solve_S_identity: solution not Hermitian (deviation " +
                             std::to_string(herm) + ")");
    return s;
}

}  // namespace gbdt

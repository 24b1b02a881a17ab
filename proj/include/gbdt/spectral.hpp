#pragma once

#include <complex>

#include "gbdt/background.hpp"
#include "gbdt/errors.hpp"
#include "gbdt/jordan.hpp"

namespace gbdt {

/// Signs applied to the two principal roots in the closed form of lambda.
struct SqrtBranch {
    int minus_h = 1;  // sign of sqrt(z - 2h)
    int plus_f = 1;   // sign of sqrt(z + 2f)
};

/// A sample of the hidden spectral parameter together with the spectral
/// function value it induces at a point.
struct SpectralPoint {
    Complex z;
    Complex lambda;
};

/// Non-isospectral spectral function
///   lambda(xi,eta,z) = (sqrt(z-2h) - sqrt(z+2f)) / (sqrt(z-2h) + sqrt(z+2f)).
/// Branch cuts of the two roots and a vanishing denominator raise
/// BranchCutError; the caller restricts domains instead of continuing across.
inline Complex lambda_of(Complex z, double xi, double eta, const Background& bg,
                         SqrtBranch branch = {}, double tol = 1e-12) {
    const Complex wm = z - 2.0 * bg.h()(eta);
    const Complex wp = z + 2.0 * bg.f()(xi);
    const Complex rm = double(branch.minus_h) * guarded_sqrt(wm, tol, "lambda_of");
    const Complex rp = double(branch.plus_f) * guarded_sqrt(wp, tol, "lambda_of");
    const Complex den = rm + rp;
    if (std::abs(den) <= tol * std::max(1.0, std::abs(rm) + std::abs(rp)))
        throw BranchCutError("lambda_of: root sum vanishes (denominator zero)");
    return (rm - rp) / den;
}

inline SpectralPoint spectral_point(Complex z, double xi, double eta, const Background& bg,
                                    SqrtBranch branch = {}) {
    return {z, lambda_of(z, xi, eta, bg, branch)};
}

/// Right-hand sides of the total-derivative equations lambda satisfies;
/// used by the finite-difference verification of the closed form.
inline Complex lambda_xi_rhs(Complex lambda, double xi, double eta, const Background& bg) {
    const double a = bg.alpha(xi, eta);
    return -(bg.alpha_xi(xi) / a) * lambda * (lambda + 1.0) / (lambda - 1.0);
}

inline Complex lambda_eta_rhs(Complex lambda, double xi, double eta, const Background& bg) {
    const double a = bg.alpha(xi, eta);
    return -(bg.alpha_eta(eta) / a) * lambda * (lambda - 1.0) / (lambda + 1.0);
}

}  // namespace gbdt

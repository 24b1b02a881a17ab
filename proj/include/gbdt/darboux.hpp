#pragma once

#include <cmath>
#include <complex>
#include <utility>

#include "gbdt/background.hpp"
#include "gbdt/errors.hpp"
#include "gbdt/flow.hpp"
#include "gbdt/matrix.hpp"
#include "gbdt/path.hpp"
#include "gbdt/rk4.hpp"
#include "gbdt/spectral.hpp"

namespace gbdt {

/// The transfer-matrix form of the Darboux matrix at one point:
///   w_A(lambda) = I - i J Pi* S^-1 (A - lambda I)^-1 Pi.
inline ComplexMatrix darboux_matrix(const GbdtState& state, const ComplexMatrix& jmat,
                                    Complex lambda, double cond_limit = 1e8) {
    const std::size_t n = state.A.rows();
    InverseResult s_inv = [&] {
        try {
            return inverse(state.S, "S in the transfer matrix");
        } catch (const SingularError& e) {
            throw SingularError("darboux_matrix: outside points of invertibility of S",
                                e.condition_estimate);
        }
    }();
    if (s_inv.condition > cond_limit)
        throw SingularError("darboux_matrix: outside points of invertibility of S",
                            s_inv.condition);
    ComplexMatrix shifted = state.A;
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= lambda;
    InverseResult res = [&] {
        try {
            return inverse(shifted, "A - lambda I");
        } catch (const SingularError& e) {
            throw SingularError("darboux_matrix: lambda is a pole (on the spectrum of A)",
                                e.condition_estimate);
        }
    }();
    return ComplexMatrix::identity(jmat.rows()) -
           Complex(0, 1) * (jmat * state.Pi.adjoint() * s_inv.inv * res.inv * state.Pi);
}

/// Transformed coefficients of the flowed system:
///   qhat = (I - iJPi*S^-1(A-I)^-1Pi) q (I + iJPi*(A*-I)^-1S^-1Pi)
///          - 2i (alpha_xi/alpha) JPi*S^-1(A-I)^-1 S (A*-I)^-1 S^-1 Pi,
/// and likewise for Qhat with A + I and alpha_eta.
struct TransformedCoefficients {
    ComplexMatrix qhat, Qhat;
};

inline TransformedCoefficients transformed_coefficients(const GbdtState& state,
                                                        const ComplexMatrix& jmat,
                                                        const Background& bg) {
    const std::size_t n = state.A.rows();
    const std::size_t m = jmat.rows();
    const ComplexMatrix eye_n = ComplexMatrix::identity(n);
    const ComplexMatrix eye_m = ComplexMatrix::identity(m);
    const ComplexMatrix s_inv = inverse(state.S, "S in transformed coefficients").inv;
    const ComplexMatrix piH = state.Pi.adjoint();

    const double xi = state.at.xi, eta = state.at.eta;
    const double av = bg.alpha(xi, eta);
    if (av == 0.0) throw PathError("alpha vanishes", xi, eta, 2);
    const double bx = bg.alpha_xi(xi) / av;
    const double by = bg.alpha_eta(eta) / av;

    auto one_side = [&](const ComplexMatrix& a_shift, const ComplexMatrix& coeff,
                        double beta) {
        const ComplexMatrix binv = inverse(a_shift, "A -+ I in transformed coefficients").inv;
        const ComplexMatrix binvH = binv.adjoint();
        const ComplexMatrix left = eye_m - Complex(0, 1) * (jmat * piH * s_inv * binv * state.Pi);
        const ComplexMatrix right = eye_m + Complex(0, 1) * (jmat * piH * binvH * s_inv * state.Pi);
        const ComplexMatrix tail = (jmat * piH * s_inv * binv * state.S * binvH * s_inv *
                                    state.Pi) * Complex(0, -2.0 * beta);
        return ComplexMatrix(left * coeff * right + tail);
    };

    TransformedCoefficients out;
    out.qhat = one_side(state.A - eye_n, bg.q(xi, eta), bx);
    out.Qhat = one_side(state.A + eye_n, bg.Q(xi, eta), by);
    return out;
}

/// Deviation from the skew-adjointness conditions qhat J = -J qhat*,
/// Qhat J = -J Qhat*.
inline std::pair<double, double> transformed_skew_residual(const TransformedCoefficients& tc,
                                                           const ComplexMatrix& jmat) {
    const double rq = difference_norm(tc.qhat * jmat, -(jmat * tc.qhat.adjoint())) /
                      std::max(1.0, tc.qhat.frobenius_norm());
    const double rQ = difference_norm(tc.Qhat * jmat, -(jmat * tc.Qhat.adjoint())) /
                      std::max(1.0, tc.Qhat.frobenius_norm());
    return {rq, rQ};
}

namespace detail {

template <class DerivFn>
ComplexMatrix integrate_companion_path(ComplexMatrix w, const PathSpec& path,
                                       double richardson_tol, DerivFn&& f) {
    path.validate();
    Point from = path.waypoints.front();
    for (std::size_t k = 1; k < path.waypoints.size(); ++k) {
        const Point to = path.waypoints[k];
        const double len = distance(from, to);
        if (len == 0.0) continue;
        const int nsteps = std::max(1, int(std::ceil(len / path.step)));
        const double ux = (to.xi - from.xi) / len;
        const double uy = (to.eta - from.eta) / len;
        auto deriv = [&](double t, const ComplexMatrix& y) {
            return f(Point{from.xi + t * ux, from.eta + t * uy}, ux, uy, y);
        };
        const ComplexMatrix coarse = rk4_integrate(w, 0.0, len, nsteps, deriv);
        const ComplexMatrix fine = rk4_integrate(w, 0.0, len, 2 * nsteps, deriv);
        const double diff = difference_norm(coarse, fine) / relative_scale(fine);
        if (diff > richardson_tol)
            throw AccuracyError("step-halving disagreement " + std::to_string(diff) +
                                " integrating a fundamental solution; reduce the step");
        w = fine;
        from = to;
    }
    return w;
}

}  // namespace detail

/// Fundamental solution of the seed system, w(0,0) = I:
///   w_xi = -q/(lambda - 1) w,  w_eta = -Q/(lambda + 1) w,
/// with lambda = lambda(xi,eta,z). Poles of the coefficients (lambda -> +-1)
/// raise PathError with the location.
inline ComplexMatrix fundamental_solution(const Background& bg, Complex z,
                                          const PathSpec& path, SqrtBranch branch = {},
                                          double pole_floor = 1e-8,
                                          double richardson_tol = 1e-8) {
    auto deriv = [&](Point p, double ux, double uy, const ComplexMatrix& w) {
        const Complex lam = lambda_of(z, p.xi, p.eta, bg, branch);
        if (std::abs(lam - 1.0) <= pole_floor)
            throw PathError("lambda hits the pole at +1", p.xi, p.eta);
        if (std::abs(lam + 1.0) <= pole_floor)
            throw PathError("lambda hits the pole at -1", p.xi, p.eta);
        const ComplexMatrix g = bg.q(p.xi, p.eta) * (-1.0 / (lam - 1.0));
        const ComplexMatrix f = bg.Q(p.xi, p.eta) * (-1.0 / (lam + 1.0));
        return ComplexMatrix((g * w) * Complex(ux) + (f * w) * Complex(uy));
    };
    return detail::integrate_companion_path(ComplexMatrix::identity(bg.m()), path,
                                            richardson_tol, deriv);
}

/// Fundamental solution of the transformed system, integrated directly with
/// the transformed coefficients built from the co-propagated state;
/// what(0,0) = I.
inline ComplexMatrix transformed_fundamental_solution(const Flow& flow, Complex z,
                                                      const PathSpec& path,
                                                      SqrtBranch branch = {},
                                                      double pole_floor = 1e-8) {
    const Background& bg = flow.background();
    auto coeff = [&](Point p, const ComplexMatrix& a, const ComplexMatrix& pi,
                     const ComplexMatrix& s) {
        const Complex lam = lambda_of(z, p.xi, p.eta, bg, branch);
        if (std::abs(lam - 1.0) <= pole_floor || std::abs(lam + 1.0) <= pole_floor)
            throw PathError("lambda hits a pole", p.xi, p.eta);
        GbdtState tmp;
        tmp.at = p;
        tmp.A = a;
        tmp.Pi = pi;
        tmp.S = s;
        TransformedCoefficients tc = transformed_coefficients(tmp, flow.triple().J(), bg);
        ComplexMatrix gx = tc.qhat * (-1.0 / (lam - 1.0));
        ComplexMatrix ge = tc.Qhat * (-1.0 / (lam + 1.0));
        return std::pair{std::move(gx), std::move(ge)};
    };
    auto [state, w] = flow.propagate_with_companion(
        path, ComplexMatrix::identity(flow.triple().m()), coeff);
    (void)state;
    return w;
}

}  // namespace gbdt

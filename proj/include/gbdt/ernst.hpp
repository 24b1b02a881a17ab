#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gbdt/background.hpp"
#include "gbdt/darboux.hpp"
#include "gbdt/errors.hpp"
#include "gbdt/flow.hpp"
#include "gbdt/grid.hpp"
#include "gbdt/jordan.hpp"
#include "gbdt/matrix.hpp"
#include "gbdt/triple.hpp"

namespace gbdt {

/// Closed-form Hamiltonian pairs solving the coupled system
///   JH - JcH + i [JH, JcH] = 0,  H_eta = cH_xi  (H >= 0, cH >= 0):
/// a constant pair H = cH = G, or the shift profile H = cH = g(xi+eta) P.
class HamiltonianPair {
public:
    static HamiltonianPair constant(ComplexMatrix g, double psd_tol = 1e-10) {
        validate_psd(g, psd_tol, "constant Hamiltonian");
        HamiltonianPair hp;
        hp.base_ = std::move(g);
        hp.constant_ = true;
        return hp;
    }

    static HamiltonianPair shift_profile(RealPolynomial profile, ComplexMatrix base,
                                         double psd_tol = 1e-10) {
        validate_psd(base, psd_tol, "shift-profile base");
        HamiltonianPair hp;
        hp.base_ = std::move(base);
        hp.profile_ = std::move(profile);
        hp.dprofile_ = hp.profile_.derivative();
        hp.constant_ = false;
        return hp;
    }

    std::size_t m() const { return base_.rows(); }
    bool is_constant() const { return constant_; }

    ComplexMatrix H(double xi, double eta) const { return value(xi + eta); }
    ComplexMatrix cH(double xi, double eta) const { return value(xi + eta); }

    /// Closed-form derivatives (never differenced).
    ComplexMatrix H_eta(double xi, double eta) const { return dvalue(xi + eta); }
    ComplexMatrix cH_xi(double xi, double eta) const { return dvalue(xi + eta); }

private:
    static void validate_psd(const ComplexMatrix& g, double tol, const char* what) {
        if (!g.square()) throw ValidationError({std::string(what) + " must be square"});
        if (difference_norm(g, g.adjoint()) > 1e-12 * relative_scale(g))
            throw ValidationError({std::string(what) + " must be Hermitian"});
        const auto evs = hermitian_eigenvalues(g);
        if (!evs.empty() && evs.front() < -tol * relative_scale(g))
            throw ValidationError({std::string(what) + " must be positive semidefinite (min eigenvalue " +
                                   std::to_string(evs.front()) + ")"});
    }

    ComplexMatrix value(double s) const {
        if (constant_) return base_;
        const double g = profile_(s);
        if (g < 0.0)
            throw ValidationError({"shift profile becomes negative at s = " + std::to_string(s)});
        return base_ * g;
    }

    ComplexMatrix dvalue(double s) const {
        if (constant_) return ComplexMatrix::zero(base_.rows(), base_.cols());
        return base_ * dprofile_(s);
    }

    ComplexMatrix base_;
    RealPolynomial profile_, dprofile_;
    bool constant_ = true;
};

/// Residuals of the coupled system at one point: the algebraic line
/// ||JH - JcH + i[JH, JcH]|| and the derivative line ||H_eta - cH_xi||
/// (the latter needs externally produced derivatives).
inline double ernst_algebraic_residual(const ComplexMatrix& h, const ComplexMatrix& ch,
                                       const ComplexMatrix& jmat) {
    const ComplexMatrix jh = jmat * h;
    const ComplexMatrix jch = jmat * ch;
    return (jh - jch + Complex(0, 1) * (jh * jch - jch * jh)).frobenius_norm();
}

/// A(xi,eta) = (curlyA - (xi+eta) I)^-1; the anti-diagonal xi + eta must
/// stay away from the spectrum.
inline ComplexMatrix ernst_A(const JordanSpec& spec, double xi, double eta,
                             double spectrum_floor = 1e-8) {
    const double s = xi + eta;
    if (spec.distance_to_spectrum(Complex(s, 0)) <= spectrum_floor)
        throw PathError("xi + eta collides with the spectrum", xi, eta,
                        int(PointStatus::SingularA));
    ComplexMatrix shifted = spec.reconstruct();
    for (std::size_t i = 0; i < shifted.rows(); ++i) shifted(i, i) -= s;
    return inverse(shifted, "resolvent of the generalized eigenvalue").inv;
}

using ErnstState = GbdtState;

struct ErnstOptions {
    double step = 1e-3;
    double richardson_tol = 1e-8;
    double cond_limit = 1e8;
    double spectrum_floor = 1e-6;
    double identity_tol = 1e-10;
};

/// Propagation for the Ernst-type transformation:
///   Pi_xi = -i A Pi J H,                Pi_eta = -i A Pi J cH,
///   S_xi  = Pi J H J Pi* - (A S + S A*), S_eta = Pi J cH J Pi* - (A S + S A*),
/// with A the resolvent field. The identity is anchored at A(0,0) =
/// curlyA^-1 and transported exactly by these equations.
class ErnstFlow {
public:
    ErnstFlow(Triple triple, HamiltonianPair pair, ErnstOptions opt = ErnstOptions{})
        : triple_(std::move(triple)), pair_(std::move(pair)), opt_(opt) {
        if (pair_.m() != triple_.m())
            throw ValidationError({"Hamiltonian size does not match J size"});
        initial_A_ = ernst_A(triple_.spec(), 0.0, 0.0, opt_.spectrum_floor);
        triple_.require_identity(initial_A_, opt_.identity_tol);
    }

    const Triple& triple() const { return triple_; }
    const HamiltonianPair& pair() const { return pair_; }
    const ComplexMatrix& initial_A() const { return initial_A_; }

    GbdtState origin_state() const {
        return assemble_state({0, 0}, initial_A_, triple_.Pi0(), triple_.S0(), triple_.J());
    }

    GbdtState propagate(const PathSpec& path) const {
        path.validate();
        GbdtState s = origin_state();
        for (std::size_t k = 1; k < path.waypoints.size(); ++k)
            s = run_segment(s, path.waypoints[k]);
        return s;
    }

    GbdtState continue_to(const GbdtState& base, Point target) const {
        GbdtState s = base;
        if (target.xi != base.at.xi) s = run_segment(s, {target.xi, base.at.eta});
        if (target.eta != s.at.eta) s = run_segment(s, {target.xi, target.eta});
        return s;
    }

    StateGrid propagate_grid(const Grid& grid) const {
        return propagate_grid_from(grid, origin_state(),
                                   [this](const GbdtState& cur, Point to) {
                                       return run_segment(cur, to);
                                   });
    }

private:
    GbdtState run_segment(const GbdtState& from, Point to) const {
        const double len = distance(from.at, to);
        if (len == 0.0) return from;
        const int nsteps = std::max(1, int(std::ceil(len / opt_.step)));
        const double ux = (to.xi - from.at.xi) / len;
        const double uy = (to.eta - from.at.eta) / len;

        detail::MatVec y0;
        y0.parts.push_back(from.Pi);
        y0.parts.push_back(from.S);
        auto deriv = [&](double t, const detail::MatVec& y) {
            return derivative(from.at.xi + t * ux, from.at.eta + t * uy, ux, uy, y);
        };
        const detail::MatVec coarse = rk4_integrate(y0, 0.0, len, nsteps, deriv);
        const detail::MatVec fine = rk4_integrate(y0, 0.0, len, 2 * nsteps, deriv);
        for (std::size_t k = 0; k < fine.parts.size(); ++k) {
            const double diff = difference_norm(coarse.parts[k], fine.parts[k]) /
                                relative_scale(fine.parts[k]);
            if (diff > opt_.richardson_tol)
                throw AccuracyError("step-halving disagreement " + std::to_string(diff) +
                                    " on segment to (xi=" + std::to_string(to.xi) +
                                    ", eta=" + std::to_string(to.eta) + ")");
        }
        return assemble_state(to, ernst_A(triple_.spec(), to.xi, to.eta, opt_.spectrum_floor),
                              fine.parts[0], fine.parts[1], triple_.J());
    }

    detail::MatVec derivative(double x, double e, double ux, double uy,
                              const detail::MatVec& y) const {
        const ComplexMatrix a = ernst_A(triple_.spec(), x, e, opt_.spectrum_floor);
        const ComplexMatrix& pi = y.parts[0];
        const ComplexMatrix& s = y.parts[1];
        const ComplexMatrix& jmat = triple_.J();
        const ComplexMatrix h = pair_.H(x, e);
        const ComplexMatrix ch = pair_.cH(x, e);

        const ComplexMatrix drift = a * s + s * a.adjoint();
        const ComplexMatrix pij = pi * jmat;
        ComplexMatrix dpi = (a * pij * h) * Complex(0, -ux) + (a * pij * ch) * Complex(0, -uy);
        ComplexMatrix ds = (pij * h * jmat * pi.adjoint() - drift) * Complex(ux) +
                           (pij * ch * jmat * pi.adjoint() - drift) * Complex(uy);
        detail::MatVec dy;
        dy.parts.push_back(std::move(dpi));
        dy.parts.push_back(std::move(ds));
        return dy;
    }

    Triple triple_;
    HamiltonianPair pair_;
    ErnstOptions opt_;
    ComplexMatrix initial_A_;
};

/// Normalizing solution w0 = w_A(xi,eta,0) = I - i J Pi* S^-1 A^-1 Pi.
inline ComplexMatrix ernst_w0(const ErnstState& state, const ComplexMatrix& jmat,
                              double cond_limit = 1e8) {
    return darboux_matrix(state, jmat, Complex(0, 0), cond_limit);
}

/// Coefficients of the linear systems w0 satisfies:
///   G0 = -i J Pi* S^-1 Pi - [J Pi* S^-1 Pi, J H],
///   F0 = -i J Pi* S^-1 Pi - [J Pi* S^-1 Pi, J cH].
struct W0Coefficients {
    ComplexMatrix G0, F0;
};

inline W0Coefficients ernst_w0_coefficients(const ErnstState& state,
                                            const HamiltonianPair& pair,
                                            const ComplexMatrix& jmat) {
    const ComplexMatrix sinv = inverse(state.S, "S in w0 coefficients").inv;
    const ComplexMatrix k = jmat * state.Pi.adjoint() * sinv * state.Pi;
    const ComplexMatrix jh = jmat * pair.H(state.at.xi, state.at.eta);
    const ComplexMatrix jch = jmat * pair.cH(state.at.xi, state.at.eta);
    W0Coefficients out;
    out.G0 = k * Complex(0, -1) - (k * jh - jh * k);
    out.F0 = k * Complex(0, -1) - (k * jch - jch * k);
    return out;
}

/// Darboux matrix of the Ernst-type system:
///   v(xi,eta,z) = w0^-1 w_A(xi,eta,(z - xi - eta)^-1).
inline ComplexMatrix ernst_darboux(const ErnstState& state, const ComplexMatrix& jmat,
                                   Complex z, double cond_limit = 1e8,
                                   double pole_floor = 1e-10) {
    const double s = state.at.xi + state.at.eta;
    if (std::abs(z - s) <= pole_floor)
        throw BranchCutError("ernst_darboux: z collides with xi + eta");
    const Complex lambda = 1.0 / (z - s);
    const ComplexMatrix w0 = ernst_w0(state, jmat, cond_limit);
    const ComplexMatrix wa = darboux_matrix(state, jmat, lambda, cond_limit);
    return inverse(w0, "w0 in the Ernst Darboux matrix").inv * wa;
}

/// Transformed Hamiltonians Htilde = w0* H w0, cHtilde = w0* cH w0.
struct TransformedHamiltonians {
    ComplexMatrix Htilde, cHtilde, w0;
};

inline TransformedHamiltonians transformed_hamiltonians(const ErnstState& state,
                                                        const HamiltonianPair& pair,
                                                        const ComplexMatrix& jmat,
                                                        double cond_limit = 1e8) {
    TransformedHamiltonians out;
    out.w0 = ernst_w0(state, jmat, cond_limit);
    out.Htilde = out.w0.adjoint() * pair.H(state.at.xi, state.at.eta) * out.w0;
    out.cHtilde = out.w0.adjoint() * pair.cH(state.at.xi, state.at.eta) * out.w0;
    return out;
}

/// Sorted spectrum of J H for Hermitian PSD H, via the Hermitian matrix
/// H^{1/2} J H^{1/2} (same spectrum, including zero multiplicities).
inline std::vector<double> spectrum_j_hermitian(const ComplexMatrix& jmat,
                                                const ComplexMatrix& h) {
    const ComplexMatrix r = hermitian_sqrt(h);
    return hermitian_eigenvalues(r * jmat * r);
}

}  // namespace gbdt

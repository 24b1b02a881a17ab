#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gbdt/errors.hpp"
#include "gbdt/matrix.hpp"

namespace gbdt {

/// Real-coefficient polynomial c0 + c1 x + ... with a stored closed-form
/// derivative; background derivatives are never obtained by differencing.
class RealPolynomial {
public:
    RealPolynomial() : coeffs_{0.0} {}
    explicit RealPolynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) coeffs_.push_back(0.0);
        for (double c : coeffs_)
            if (!std::isfinite(c)) throw ValidationError({"non-finite polynomial coefficient"});
    }

    static RealPolynomial constant(double c) { return RealPolynomial({c}); }
    static RealPolynomial affine(double a, double b) { return RealPolynomial({a, b}); }

    double operator()(double x) const {
        double v = 0.0;
        for (std::size_t i = coeffs_.size(); i-- > 0;) v = v * x + coeffs_[i];
        return v;
    }

    RealPolynomial derivative() const {
        if (coeffs_.size() <= 1) return RealPolynomial({0.0});
        std::vector<double> d(coeffs_.size() - 1);
        for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = double(i) * coeffs_[i];
        return RealPolynomial(std::move(d));
    }

    const std::vector<double>& coefficients() const { return coeffs_; }

    bool is_affine() const { return coeffs_.size() <= 2; }

private:
    std::vector<double> coeffs_;
};

/// j = diag(I_p, -I_p).
inline ComplexMatrix j_signature(std::size_t p) {
    ComplexMatrix j(2 * p, 2 * p);
    for (std::size_t i = 0; i < p; ++i) j(i, i) = 1.0;
    for (std::size_t i = p; i < 2 * p; ++i) j(i, i) = -1.0;
    return j;
}

enum class JKind { OffDiagonal, ImaginaryOffDiagonal, Pauli2 };

/// The admissible J choices for the exponential-diagonal seed:
///   offdiag     [[0, I_p],[I_p, 0]]
///   i-offdiag   [[0, -i I_p],[i I_p, 0]]
///   pauli2      the 2x2 second Pauli matrix (i-offdiag with p = 1)
inline ComplexMatrix make_j_matrix(JKind kind, std::size_t p) {
    if (kind == JKind::Pauli2 && p != 1)
        throw ValidationError({"pauli2 signature requires p = 1"});
    ComplexMatrix j(2 * p, 2 * p);
    for (std::size_t i = 0; i < p; ++i) {
        if (kind == JKind::OffDiagonal) {
            j(i, p + i) = 1.0;
            j(p + i, i) = 1.0;
        } else {
            j(i, p + i) = Complex(0, -1);
            j(p + i, i) = Complex(0, 1);
        }
    }
    return j;
}

/// Matrix-valued coefficient fields of a seed solution.
struct SeedFunctions {
    std::size_t m = 0;
    std::function<ComplexMatrix(double, double)> u;
    std::function<ComplexMatrix(double, double)> q;
    std::function<ComplexMatrix(double, double)> Q;
};

/// The initial data the transformation is applied to: the splitting
/// alpha = f(xi) + h(eta) and a seed solution with its coefficients
/// q = u_xi u^-1, Q = -u_eta u^-1. The built-in seed is the
/// exponential-diagonal family u = exp((f - h) j).
class Background {
public:
    static Background exp_diag(RealPolynomial f, RealPolynomial h, std::size_t p) {
        if (p == 0) throw ValidationError({"exp-diag seed requires p >= 1"});
        Background bg(std::move(f), std::move(h));
        bg.p_ = p;
        bg.m_ = 2 * p;
        bg.exp_diag_ = true;
        return bg;
    }

    static Background custom(RealPolynomial f, RealPolynomial h, SeedFunctions seed) {
        if (seed.m == 0 || !seed.u || !seed.q || !seed.Q)
            throw ValidationError({"custom seed requires m and all three fields"});
        Background bg(std::move(f), std::move(h));
        bg.m_ = seed.m;
        bg.seed_ = std::move(seed);
        return bg;
    }

    const RealPolynomial& f() const { return f_; }
    const RealPolynomial& h() const { return h_; }

    double alpha(double xi, double eta) const { return f_(xi) + h_(eta); }
    double alpha_xi(double xi) const { return df_(xi); }
    double alpha_eta(double eta) const { return dh_(eta); }

    std::size_t m() const { return m_; }
    std::size_t p() const { return p_; }
    bool has_exp_diag_seed() const { return exp_diag_; }

    /// Seed solution value; for the exp-diag family this is
    /// diag(e^{f-h} I_p, e^{-(f-h)} I_p).
    ComplexMatrix u(double xi, double eta) const {
        if (!exp_diag_) return seed_.u(xi, eta);
        const double s = f_(xi) - h_(eta);
        ComplexMatrix v(m_, m_);
        for (std::size_t i = 0; i < p_; ++i) v(i, i) = std::exp(s);
        for (std::size_t i = p_; i < m_; ++i) v(i, i) = std::exp(-s);
        return v;
    }

    ComplexMatrix q(double xi, double eta) const {
        if (!exp_diag_) return seed_.q(xi, eta);
        return j_signature(p_) * df_(xi);
    }

    ComplexMatrix Q(double xi, double eta) const {
        if (!exp_diag_) return seed_.Q(xi, eta);
        return j_signature(p_) * dh_(eta);
    }

    /// Deviations from the skew-adjointness conditions q J = -J q*,
    /// Q J = -J Q* at a point, relative to max(1, ||.||).
    std::pair<double, double> skew_adjoint_residual(const ComplexMatrix& jmat, double xi,
                                                    double eta) const {
        const ComplexMatrix qv = q(xi, eta);
        const ComplexMatrix Qv = Q(xi, eta);
        const double rq = difference_norm(qv * jmat, -(jmat * qv.adjoint())) /
                          std::max(1.0, qv.frobenius_norm());
        const double rQ = difference_norm(Qv * jmat, -(jmat * Qv.adjoint())) /
                          std::max(1.0, Qv.frobenius_norm());
        return {rq, rQ};
    }

    /// Whether the seed is normalized to u(0,0) = I.
    double seed_origin_residual() const {
        return difference_norm(u(0.0, 0.0), ComplexMatrix::identity(m_));
    }

private:
    Background(RealPolynomial f, RealPolynomial h)
        : f_(std::move(f)), h_(std::move(h)), df_(f_.derivative()), dh_(h_.derivative()) {}

    RealPolynomial f_, h_, df_, dh_;
    std::size_t m_ = 0, p_ = 0;
    bool exp_diag_ = false;
    SeedFunctions seed_;
};

}  // namespace gbdt

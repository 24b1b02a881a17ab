#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gbdt/background.hpp"
#include "gbdt/ernst.hpp"
#include "gbdt/flow.hpp"
#include "gbdt/grid.hpp"
#include "gbdt/matrix.hpp"
#include "gbdt/path.hpp"

namespace gbdt {

/// One verification line: residual statistics against a pinned tolerance,
/// with the fraction of points that could be evaluated. A check passes only
/// if the residual bound holds AND enough points were covered, so exclusion
/// can never fake a pass.
struct CheckResult {
    std::string name;
    double max_residual = 0.0;
    double mean_residual = 0.0;
    double tolerance = 0.0;
    double coverage = 1.0;
    double coverage_floor = 0.9;
    bool pass = false;

    static CheckResult from_samples(std::string name, const std::vector<double>& residuals,
                                    std::size_t requested, double tolerance,
                                    double coverage_floor = 0.9) {
        CheckResult r;
        r.name = std::move(name);
        r.tolerance = tolerance;
        r.coverage_floor = coverage_floor;
        r.coverage = requested == 0 ? 0.0 : double(residuals.size()) / double(requested);
        for (double v : residuals) {
            r.max_residual = std::max(r.max_residual, v);
            r.mean_residual += v;
        }
        if (!residuals.empty()) r.mean_residual /= double(residuals.size());
        r.pass = !residuals.empty() && r.max_residual <= tolerance &&
                 r.coverage >= coverage_floor;
        return r;
    }
};

struct ResidualReport {
    std::vector<CheckResult> checks;

    bool pass() const {
        if (checks.empty()) return false;
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    double max_residual() const {
        double r = 0.0;
        for (const auto& c : checks) r = std::max(r, c.max_residual);
        return r;
    }
};

/// A matrix field that may be unavailable at some points.
using MatrixSampler = std::function<std::optional<ComplexMatrix>(Point)>;

/// Exact-node sampler over a tabulated field; probes must land on grid
/// nodes (finite-difference step = grid step).
inline MatrixSampler field_sampler(const FieldGrid& field) {
    return [&field](Point p) -> std::optional<ComplexMatrix> {
        const Grid& g = field.grid;
        const double fi = (p.xi - g.xi0) / g.dxi;
        const double fj = (p.eta - g.eta0) / g.deta;
        const double ri = std::round(fi), rj = std::round(fj);
        if (std::abs(fi - ri) > 1e-6 || std::abs(fj - rj) > 1e-6) return std::nullopt;
        if (ri < 0 || rj < 0 || ri >= double(g.nxi) || rj >= double(g.neta))
            return std::nullopt;
        const std::size_t idx = g.index(std::size_t(ri), std::size_t(rj));
        if (!field.ok(idx)) return std::nullopt;
        return field.values[idx];
    };
}

/// Wraps a throwing evaluator into a sampler that reports unavailability.
template <class Fn>
MatrixSampler guarded_sampler(Fn&& fn) {
    return [fn = std::forward<Fn>(fn)](Point p) -> std::optional<ComplexMatrix> {
        try {
            return fn(p);
        } catch (const Error&) {
            return std::nullopt;
        }
    };
}

inline std::vector<Point> grid_points(const Grid& g) {
    std::vector<Point> pts;
    pts.reserve(g.size());
    for (std::size_t j = 0; j < g.neta; ++j)
        for (std::size_t i = 0; i < g.nxi; ++i) pts.push_back({g.xi(i), g.eta(j)});
    return pts;
}

inline std::vector<Point> interior_grid_points(const Grid& g) {
    std::vector<Point> pts;
    for (std::size_t j = 1; j + 1 < g.neta; ++j)
        for (std::size_t i = 1; i + 1 < g.nxi; ++i) pts.push_back({g.xi(i), g.eta(j)});
    return pts;
}

/// Central-difference residual of the field equation
///   (alpha u_xi u^-1)_eta + (alpha u_eta u^-1)_xi = 0
/// over the given points. The derivative of each product is obtained by
/// differencing the assembled product field, not by the product rule.
inline CheckResult check_pde_sigma(const MatrixSampler& u,
                                   const std::function<double(Point)>& alpha,
                                   const std::vector<Point>& points, double fd_step,
                                   double tolerance = 1e-5, double coverage_floor = 0.9) {
    const double d = fd_step;
    std::vector<double> residuals;
    for (Point p : points) {
        // 3x3 stencil of u around p.
        std::optional<ComplexMatrix> st[3][3];
        bool complete = true;
        for (int a = -1; a <= 1 && complete; ++a)
            for (int b = -1; b <= 1; ++b) {
                st[a + 1][b + 1] = u({p.xi + a * d, p.eta + b * d});
                if (!st[a + 1][b + 1]) {
                    complete = false;
                    break;
                }
            }
        if (!complete) continue;
        auto val = [&](int a, int b) -> const ComplexMatrix& { return *st[a + 1][b + 1]; };
        auto P = [&](int b) {  // alpha u_xi u^-1 at (p.xi, p.eta + b d)
            ComplexMatrix du = (val(1, b) - val(-1, b)) * (1.0 / (2 * d));
            return ComplexMatrix(du * inverse(val(0, b)).inv *
                                 alpha({p.xi, p.eta + b * d}));
        };
        auto R = [&](int a) {  // alpha u_eta u^-1 at (p.xi + a d, p.eta)
            ComplexMatrix du = (val(a, 1) - val(a, -1)) * (1.0 / (2 * d));
            return ComplexMatrix(du * inverse(val(a, 0)).inv *
                                 alpha({p.xi + a * d, p.eta}));
        };
        ComplexMatrix residual;
        try {
            residual = (P(1) - P(-1)) * (1.0 / (2 * d)) + (R(1) - R(-1)) * (1.0 / (2 * d));
        } catch (const Error&) {
            continue;
        }
        residuals.push_back(residual.frobenius_norm());
    }
    return CheckResult::from_samples("pde-sigma", residuals, points.size(), tolerance,
                                     coverage_floor);
}

/// Pointwise J-unitarity ||u* J u - J|| over the points.
inline CheckResult check_j_unitarity(const MatrixSampler& u, const ComplexMatrix& jmat,
                                     const std::vector<Point>& points,
                                     double tolerance = 1e-9, double coverage_floor = 0.9) {
    std::vector<double> residuals;
    for (Point p : points) {
        auto v = u(p);
        if (!v) continue;
        residuals.push_back(difference_norm(v->adjoint() * jmat * *v, jmat));
    }
    return CheckResult::from_samples("j-unitarity", residuals, points.size(), tolerance,
                                     coverage_floor);
}

/// The transported matrix identity and the Hermiticity of S over a set of
/// states.
inline ResidualReport check_identity(const std::vector<GbdtState>& states,
                                     const ComplexMatrix& jmat, double tol_identity = 1e-8,
                                     double tol_hermitian = 1e-10) {
    std::vector<double> identity, hermitian;
    for (const auto& st : states) {
        const ComplexMatrix rhs = Complex(0, 1) * (st.Pi * (jmat * st.Pi.adjoint()));
        identity.push_back(difference_norm(st.A * st.S - st.S * st.A.adjoint(), rhs) /
                           relative_scale(st.S));
        hermitian.push_back(HermitianFlag{}.deviation(st.S));
    }
    ResidualReport report;
    report.checks.push_back(CheckResult::from_samples("identity-transport", identity,
                                                      states.size(), tol_identity, 1.0));
    report.checks.push_back(CheckResult::from_samples("S-hermitian", hermitian,
                                                      states.size(), tol_hermitian, 1.0));
    return report;
}

/// Path independence realized behaviorally: endpoints of the axis-aligned
/// route and a staircase must agree for Pi and S at every target.
inline ResidualReport check_compatibility(
    const std::function<GbdtState(const PathSpec&)>& propagate,
    const std::vector<Point>& targets, double step = 1e-3, double tolerance = 1e-7,
    double coverage_floor = 0.9) {
    std::vector<double> dpi, ds;
    for (Point t : targets) {
        try {
            GbdtState a = propagate(PathSpec::l_path(t, step));
            GbdtState b = propagate(PathSpec::staircase(t, 4, step));
            dpi.push_back(difference_norm(a.Pi, b.Pi));
            if (a.S.rows() > 0) ds.push_back(difference_norm(a.S, b.S));
        } catch (const Error&) {
            continue;
        }
    }
    ResidualReport report;
    report.checks.push_back(CheckResult::from_samples("compatibility-Pi", dpi,
                                                      targets.size(), tolerance,
                                                      coverage_floor));
    report.checks.push_back(CheckResult::from_samples("compatibility-S", ds, targets.size(),
                                                      tolerance, coverage_floor));
    return report;
}

/// Zero-curvature conditions on a coefficient pair:
///   q_eta + Q_xi = [q, Q]   and   (alpha q)_eta = (alpha Q)_xi.
inline ResidualReport check_zero_curvature(const MatrixSampler& q, const MatrixSampler& Q,
                                           const std::function<double(Point)>& alpha,
                                           const std::vector<Point>& points, double fd_step,
                                           double tolerance = 1e-5,
                                           double coverage_floor = 0.9) {
    const double d = fd_step;
    std::vector<double> commutator_line, alpha_line;
    for (Point p : points) {
        auto q0 = q(p), qep = q({p.xi, p.eta + d}), qem = q({p.xi, p.eta - d});
        auto Q0 = Q(p), Qxp = Q({p.xi + d, p.eta}), Qxm = Q({p.xi - d, p.eta});
        if (!q0 || !qep || !qem || !Q0 || !Qxp || !Qxm) continue;
        ComplexMatrix q_eta = (*qep - *qem) * (1.0 / (2 * d));
        ComplexMatrix Q_xi = (*Qxp - *Qxm) * (1.0 / (2 * d));
        commutator_line.push_back(
            difference_norm(q_eta + Q_xi, *q0 * *Q0 - *Q0 * *q0));
        ComplexMatrix aq_eta = (*qep * alpha({p.xi, p.eta + d}) -
                                *qem * alpha({p.xi, p.eta - d})) * (1.0 / (2 * d));
        ComplexMatrix aQ_xi = (*Qxp * alpha({p.xi + d, p.eta}) -
                               *Qxm * alpha({p.xi - d, p.eta})) * (1.0 / (2 * d));
        alpha_line.push_back(difference_norm(aq_eta, aQ_xi));
    }
    ResidualReport report;
    report.checks.push_back(CheckResult::from_samples("zero-curvature-commutator",
                                                      commutator_line, points.size(),
                                                      tolerance, coverage_floor));
    report.checks.push_back(CheckResult::from_samples("zero-curvature-alpha", alpha_line,
                                                      points.size(), tolerance,
                                                      coverage_floor));
    return report;
}

/// The coupled Hamiltonian system: exact algebraic line and differenced
/// derivative line.
inline ResidualReport check_ernst_pair(const MatrixSampler& h, const MatrixSampler& ch,
                                       const ComplexMatrix& jmat,
                                       const std::vector<Point>& points, double fd_step,
                                       double tol_algebraic = 1e-10,
                                       double tol_derivative = 1e-6,
                                       double coverage_floor = 0.9) {
    const double d = fd_step;
    std::vector<double> algebraic, derivative;
    for (Point p : points) {
        auto h0 = h(p), ch0 = ch(p);
        if (!h0 || !ch0) continue;
        algebraic.push_back(ernst_algebraic_residual(*h0, *ch0, jmat));
        auto hep = h({p.xi, p.eta + d}), hem = h({p.xi, p.eta - d});
        auto cxp = ch({p.xi + d, p.eta}), cxm = ch({p.xi - d, p.eta});
        if (!hep || !hem || !cxp || !cxm) continue;
        ComplexMatrix h_eta = (*hep - *hem) * (1.0 / (2 * d));
        ComplexMatrix ch_xi = (*cxp - *cxm) * (1.0 / (2 * d));
        derivative.push_back(difference_norm(h_eta, ch_xi));
    }
    ResidualReport report;
    report.checks.push_back(CheckResult::from_samples("ernst-algebraic", algebraic,
                                                      points.size(), tol_algebraic,
                                                      coverage_floor));
    report.checks.push_back(CheckResult::from_samples("ernst-derivative", derivative,
                                                      points.size(), tol_derivative,
                                                      coverage_floor));
    return report;
}

/// Determinant constancy of a field: max |det u - d| over covered points.
inline CheckResult check_det_constant(const FieldGrid& field, double expected,
                                      double tolerance = 1e-8,
                                      double coverage_floor = 0.9) {
    std::vector<double> residuals;
    for (std::size_t idx = 0; idx < field.values.size(); ++idx) {
        if (!field.ok(idx)) continue;
        residuals.push_back(std::abs(determinant(field.values[idx]) - Complex(expected)));
    }
    return CheckResult::from_samples("det-constant", residuals, field.values.size(),
                                     tolerance, coverage_floor);
}

/// det u = alpha^2 pointwise (relative to max(1, alpha^2)).
inline CheckResult check_det_alpha_squared(const FieldGrid& field, double tolerance = 1e-8,
                                           double coverage_floor = 0.9) {
    std::vector<double> residuals;
    for (std::size_t idx = 0; idx < field.values.size(); ++idx) {
        if (!field.ok(idx)) continue;
        const double a2 = field.alpha[idx] * field.alpha[idx];
        residuals.push_back(std::abs(determinant(field.values[idx]) - Complex(a2)) /
                            std::max(1.0, a2));
    }
    return CheckResult::from_samples("det-alpha-squared", residuals, field.values.size(),
                                     tolerance, coverage_floor);
}

/// Realness of a field: max |Im entries|.
inline CheckResult check_realness(const FieldGrid& field, double tolerance = 1e-9,
                                  double coverage_floor = 0.9) {
    std::vector<double> residuals;
    for (std::size_t idx = 0; idx < field.values.size(); ++idx) {
        if (!field.ok(idx)) continue;
        residuals.push_back(field.values[idx].max_imag_abs());
    }
    return CheckResult::from_samples("realness", residuals, field.values.size(), tolerance,
                                     coverage_floor);
}

}  // namespace gbdt

#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gbdt/darboux.hpp"
#include "gbdt/explicit_solutions.hpp"
#include "gbdt/flow.hpp"
#include "gbdt/grid.hpp"
#include "gbdt/matrix.hpp"
#include "gbdt/parallel.hpp"
#include "gbdt/triple.hpp"

namespace gbdt {

/// Seed solution data at one point.
struct SeedValues {
    ComplexMatrix u, q, Q;
};

inline SeedValues seed_solution(const Background& bg, Point at) {
    return {bg.u(at.xi, at.eta), bg.q(at.xi, at.eta), bg.Q(at.xi, at.eta)};
}

/// The multiplier of the transformed solution:
///   U(xi,eta) = I - i J Pi* S^-1 A^-1 Pi
/// (the transfer matrix at lambda = 0).
inline ComplexMatrix calU(const GbdtState& state, const ComplexMatrix& jmat,
                          double cond_limit = 1e8) {
    return darboux_matrix(state, jmat, Complex(0, 0), cond_limit);
}

/// How per-point states are produced for the transform: propagated by the
/// coupled flow, or assembled from the closed forms of the single
/// Jordan-block family (A explicit, Pi explicit, S from the identity).
enum class SigmaAssembly { OdePropagation, ExplicitJordan2 };

struct SigmaOptions {
    SigmaAssembly assembly = SigmaAssembly::OdePropagation;
    Anchor anchor = Anchor::ExplicitField;
    BranchChoice branch = BranchChoice::principal();
    double step = 1e-3;
    double cond_limit = 1e8;
    double richardson_tol = 1e-8;
    double seed_tol = 1e-12;
    int threads = 1;  // explicit assembly maps points independently

    FlowOptions flow_options() const {
        FlowOptions fo;
        fo.step = step;
        fo.richardson_tol = richardson_tol;
        fo.cond_limit = cond_limit;
        fo.with_S = true;
        return fo;
    }
};

/// Transformed solution on a grid plus the states it came from.
struct SigmaSolution {
    FieldGrid field;   // u_hat values, flags, alpha
    StateGrid states;  // matching per-point states (for probes/diagnostics)
};

/// Per-point engine for the transformed sigma-model solution u_hat = U u.
class SigmaTransform {
public:
    SigmaTransform(Triple triple, Background bg, SigmaOptions opt = SigmaOptions{})
        : triple_(std::move(triple)), bg_(std::move(bg)), opt_(opt) {
        validate_seed();
        if (opt_.assembly == SigmaAssembly::OdePropagation) {
            flow_ = std::make_shared<Flow>(triple_, bg_, opt_.anchor, opt_.branch,
                                           opt_.flow_options());
        } else {
            if (triple_.spec().blocks().size() != 1 || triple_.spec().size() != 2)
                throw ValidationError(
                    {"explicit assembly needs a single 2x2 Jordan block"});
            c_ = triple_.spec().blocks().front().eigenvalue;
            param_ = jordan2_param_from_origin(c_, bg_, triple_.Pi0(), triple_.m() / 2);
            // The identity is anchored at the closed-form A(0,0).
            triple_.require_identity(explicit_A(0.0, 0.0, triple_.spec(), bg_, opt_.branch));
        }
    }

    const Triple& triple() const { return triple_; }
    const Background& bg() const { return bg_; }
    const SigmaOptions& options() const { return opt_; }
    const Flow& flow() const {
        if (!flow_) throw Error("no flow in explicit assembly mode");
        return *flow_;
    }

    /// State at an arbitrary point (throws on precondition failure).
    GbdtState state_at(Point p) const {
        if (flow_) return flow_->propagate(PathSpec::l_path(p, opt_.step));
        return explicit_state(p);
    }

    /// State at a probe point near a known base state.
    GbdtState state_near(const GbdtState& base, Point p) const {
        if (flow_) return flow_->continue_to(base, p);
        return explicit_state(p);
    }

    ComplexMatrix u_hat(const GbdtState& st) const {
        return calU(st, triple_.J(), opt_.cond_limit) * bg_.u(st.at.xi, st.at.eta);
    }

    ComplexMatrix u_hat_at(Point p) const { return u_hat(state_at(p)); }

    SigmaSolution on_grid(const Grid& grid) const {
        SigmaSolution out;
        out.field = FieldGrid(grid, triple_.m());
        if (flow_)
            out.states = flow_->propagate_grid(grid);
        else
            out.states = explicit_grid(grid);
        for (std::size_t idx = 0; idx < grid.size(); ++idx) {
            const std::size_t i = idx % grid.nxi, j = idx / grid.nxi;
            out.field.alpha[idx] = bg_.alpha(grid.xi(i), grid.eta(j));
            if (!out.states.ok(idx)) {
                out.field.status[idx] = out.states.status[idx];
                continue;
            }
            try {
                out.field.values[idx] = u_hat(out.states.states[idx]);
                out.field.status[idx] = int(PointStatus::Ok);
            } catch (const SingularError&) {
                out.field.status[idx] = int(PointStatus::SingularS);
            } catch (const Error&) {
                out.field.status[idx] = int(PointStatus::Failed);
            }
        }
        return out;
    }

private:
    void validate_seed() {
        std::vector<std::string> issues;
        if (bg_.m() != triple_.m())
            issues.push_back("seed size does not match J size");
        const double u0 = bg_.seed_origin_residual();
        if (u0 > opt_.seed_tol)
            issues.push_back("seed is not normalized to u(0,0) = I (deviation " +
                             std::to_string(u0) + ")");
        for (Point p : {Point{0, 0}, Point{0.1, -0.1}, Point{-0.05, 0.2}}) {
            auto [rq, rQ] = bg_.skew_adjoint_residual(triple_.J(), p.xi, p.eta);
            if (rq > opt_.seed_tol || rQ > opt_.seed_tol) {
                issues.push_back("seed coefficients fail the skew-adjointness conditions");
                break;
            }
        }
        if (!issues.empty()) throw ValidationError(std::move(issues));
    }

    GbdtState explicit_state(Point p) const {
        ComplexMatrix a = explicit_A(p.xi, p.eta, triple_.spec(), bg_, opt_.branch);
        ComplexMatrix pi = explicit_pi_jordan2(p, c_, param_, triple_.m() / 2, bg_);
        ComplexMatrix s = solve_S_identity(a, pi, triple_.J());
        return assemble_state(p, std::move(a), std::move(pi), std::move(s), triple_.J());
    }

    StateGrid explicit_grid(const Grid& grid) const {
        StateGrid sg(grid);
        parallel_for(grid.size(), opt_.threads, [&](std::size_t idx) {
            const std::size_t i = idx % grid.nxi, j = idx / grid.nxi;
            try {
                sg.states[idx] = explicit_state({grid.xi(i), grid.eta(j)});
                sg.status[idx] = int(PointStatus::Ok);
            } catch (const ResonanceError&) {
                sg.status[idx] = int(PointStatus::Resonant);
            } catch (const BranchCutError&) {
                sg.status[idx] = int(PointStatus::BranchCut);
            } catch (const SingularError&) {
                sg.status[idx] = int(PointStatus::SingularA);
            } catch (const Error&) {
                sg.status[idx] = int(PointStatus::Failed);
            }
        });
        return sg;
    }

    Triple triple_;
    Background bg_;
    SigmaOptions opt_;
    std::shared_ptr<Flow> flow_;
    Complex c_{};
    ComplexMatrix param_;
};

inline SigmaSolution transform_sigma(const Triple& triple, const Background& bg,
                                     const Grid& grid, SigmaOptions opt = SigmaOptions{}) {
    return SigmaTransform(triple, bg, opt).on_grid(grid);
}

/// Gravitational solution: u_tilde = alpha d^{-1/2} U u with
/// d = det(U(0,0) u(0,0)) > 0; requires the real 2x2 class.
struct GravSolution {
    FieldGrid field;       // u_tilde
    FieldGrid field_hat;   // the underlying u_hat = U u
    StateGrid states;
    double d = 0.0;
};

inline GravSolution transform_grav(const Triple& triple, const Background& bg,
                                   const Grid& grid, SigmaOptions opt = SigmaOptions{},
                                   double real_tol = 1e-9) {
    std::vector<std::string> issues;
    if (triple.m() != 2) issues.push_back("gravitational case requires m = 2");
    if (triple.max_imag() > 1e-12)
        issues.push_back("triple data (S0, Pi0, iJ) must be real");
    if (triple.spec().reconstruct().max_imag_abs() > 1e-12)
        issues.push_back("generalized eigenvalue matrix must be real");
    if (!issues.empty()) throw ValidationError(std::move(issues));

    SigmaTransform transform(triple, bg, opt);

    // d of the determinant normalization, from the origin state.
    const GbdtState origin = transform.state_at({0.0, 0.0});
    const ComplexMatrix u_hat0 = transform.u_hat(origin);
    const Complex d_complex = determinant(u_hat0);
    if (std::abs(d_complex.imag()) > real_tol)
        throw ValidationError({"determinant at the origin is not real"});
    const double d = d_complex.real();
    if (!(d > 0.0))
        throw ValidationError({"determinant normalization requires d > 0, got d = " +
                               std::to_string(d)});

    GravSolution out;
    SigmaSolution sigma = transform.on_grid(grid);
    out.field_hat = sigma.field;
    out.states = std::move(sigma.states);
    out.d = d;
    out.field = FieldGrid(grid, 2);
    out.field.alpha = out.field_hat.alpha;
    const double scale = 1.0 / std::sqrt(d);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        out.field.status[idx] = out.field_hat.status[idx];
        if (!out.field_hat.ok(idx)) continue;
        ComplexMatrix v = out.field_hat.values[idx] * (out.field.alpha[idx] * scale);
        if (v.max_imag_abs() > real_tol) {
            out.field.status[idx] = int(PointStatus::Failed);
            continue;
        }
        out.field.values[idx] = std::move(v);
    }
    return out;
}

/// Determinant normalization of a real 2x2 field:
///   u = alpha (det ucheck)^{-1/2} ucheck,
/// flagging points with nonpositive determinant.
inline FieldGrid normalize_det(const std::vector<double>& alpha, const FieldGrid& ucheck,
                               double real_tol = 1e-9) {
    if (ucheck.m != 2) throw ValidationError({"normalize_det requires 2x2 fields"});
    if (alpha.size() != ucheck.values.size())
        throw ValidationError({"normalize_det: alpha and field sizes differ"});
    FieldGrid out = ucheck;
    out.alpha = alpha;
    for (std::size_t idx = 0; idx < ucheck.values.size(); ++idx) {
        if (!ucheck.ok(idx)) continue;
        const ComplexMatrix& v = ucheck.values[idx];
        if (v.max_imag_abs() > real_tol) {
            out.status[idx] = int(PointStatus::Failed);
            continue;
        }
        const Complex det = determinant(v);
        if (!(det.real() > 0.0) || std::abs(det.imag()) > real_tol) {
            out.status[idx] = int(PointStatus::Failed);
            continue;
        }
        out.values[idx] = v * (alpha[idx] / std::sqrt(det.real()));
    }
    return out;
}

}  // namespace gbdt

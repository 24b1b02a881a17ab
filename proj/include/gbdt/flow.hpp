#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "gbdt/background.hpp"
#include "gbdt/errors.hpp"
#include "gbdt/explicit_solutions.hpp"
#include "gbdt/grid.hpp"
#include "gbdt/matrix.hpp"
#include "gbdt/path.hpp"
#include "gbdt/rk4.hpp"
#include "gbdt/triple.hpp"

namespace gbdt {

/// How the A-field is produced: co-integrated from the Jordan matrix, or
/// evaluated from the closed form (in which case A(0,0) is the closed form
/// at the origin, not the Jordan matrix).
enum class Anchor { JordanMatrix, ExplicitField };

struct FlowOptions {
    double step = 1e-3;
    double richardson_tol = 1e-8;  // relative step-halving agreement
    double cond_limit = 1e8;
    double alpha_floor = 1e-9;
    bool with_S = true;            // propagate S alongside Pi
    double identity_tol = 1e-10;   // triple identity at the anchor
};

/// Propagated data at one point with its diagnostics.
struct GbdtState {
    Point at;
    ComplexMatrix A, Pi, S;
    double identity_residual = std::numeric_limits<double>::quiet_NaN();
    double cond_S = std::numeric_limits<double>::quiet_NaN();
    double cond_A_minus = std::numeric_limits<double>::quiet_NaN();
    double cond_A_plus = std::numeric_limits<double>::quiet_NaN();
};

/// Builds a state with its diagnostics (identity residual against J, and
/// condition numbers of S and A -+ I).
inline GbdtState assemble_state(Point at, ComplexMatrix a, ComplexMatrix pi, ComplexMatrix s,
                                const ComplexMatrix& jmat) {
    GbdtState st;
    st.at = at;
    st.A = std::move(a);
    st.Pi = std::move(pi);
    st.S = std::move(s);
    const std::size_t n = st.A.rows();
    const ComplexMatrix eye = ComplexMatrix::identity(n);
    auto cond_of = [](const ComplexMatrix& m) {
        LuDecomposition lu(m);
        if (lu.singular()) return std::numeric_limits<double>::infinity();
        return m.frobenius_norm() * lu.inverse().frobenius_norm();
    };
    st.cond_A_minus = cond_of(st.A - eye);
    st.cond_A_plus = cond_of(st.A + eye);
    if (st.S.rows() == n) {
        st.cond_S = cond_of(st.S);
        const ComplexMatrix rhs = Complex(0, 1) * (st.Pi * (jmat * st.Pi.adjoint()));
        st.identity_residual = difference_norm(st.A * st.S - st.S * st.A.adjoint(), rhs) /
                               relative_scale(st.S);
    }
    return st;
}

namespace detail {

/// Stack of matrices with vector-space operations, the RK4 state.
struct MatVec {
    std::vector<ComplexMatrix> parts;

    MatVec operator+(const MatVec& o) const {
        MatVec r = *this;
        for (std::size_t i = 0; i < parts.size(); ++i) r.parts[i] += o.parts[i];
        return r;
    }
    MatVec operator*(double s) const {
        MatVec r = *this;
        for (auto& m : r.parts) m *= Complex(s);
        return r;
    }
};

}  // namespace detail

/// Grid of propagated states sharing axis/column path prefixes.
struct StateGrid {
    Grid grid;
    std::vector<int> status;
    std::vector<GbdtState> states;

    StateGrid() = default;
    explicit StateGrid(const Grid& g)
        : grid(g), status(g.size(), int(PointStatus::Unreachable)), states(g.size()) {}
    bool ok(std::size_t idx) const { return status[idx] == int(PointStatus::Ok); }
};

/// Maps an error raised during propagation to a per-point status flag.
inline int classify_flow_error(const Error& e) {
    if (dynamic_cast<const BranchCutError*>(&e)) return int(PointStatus::BranchCut);
    if (dynamic_cast<const ResonanceError*>(&e)) return int(PointStatus::Resonant);
    if (dynamic_cast<const SingularError*>(&e)) return int(PointStatus::SingularA);
    if (const auto* pe = dynamic_cast<const PathError*>(&e))
        return pe->kind ? pe->kind : int(PointStatus::Failed);
    return int(PointStatus::Failed);
}

/// Shared-prefix grid propagation: march the xi-axis from the origin saving
/// one anchor per column, then march each column in eta. `advance` runs one
/// straight segment; points behind a failed segment are flagged with the
/// failure's status.
template <class AdvanceFn>
StateGrid propagate_grid_from(const Grid& grid, const GbdtState& origin, AdvanceFn&& advance) {
    StateGrid out(grid);
    std::vector<std::optional<GbdtState>> axis(grid.nxi);
    std::vector<int> axis_status(grid.nxi, int(PointStatus::Unreachable));

    auto march = [&](auto&& keys, auto&& flag_or_store, const GbdtState& start) {
        GbdtState cur = start;
        bool dead = false;
        int dead_status = int(PointStatus::Unreachable);
        for (auto key : keys) {
            if (!dead) {
                try {
                    cur = advance(cur, flag_or_store.target(key));
                    flag_or_store.store(key, cur);
                    continue;
                } catch (const Error& e) {
                    dead = true;
                    dead_status = classify_flow_error(e);
                }
            }
            flag_or_store.flag(key, dead_status);
        }
    };

    struct AxisSink {
        const Grid& grid;
        std::vector<std::optional<GbdtState>>& axis;
        std::vector<int>& status;
        Point target(std::size_t i) const { return {grid.xi(i), 0.0}; }
        void store(std::size_t i, const GbdtState& s) { axis[i] = s; }
        void flag(std::size_t i, int st) { status[i] = st; }
    } axis_sink{grid, axis, axis_status};

    auto column_keys = [&](bool right) {
        std::vector<std::size_t> keys;
        for (std::size_t i = 0; i < grid.nxi; ++i)
            if (right ? (grid.xi(i) >= 0.0) : (grid.xi(i) < 0.0)) keys.push_back(i);
        std::sort(keys.begin(), keys.end(), [&](auto a, auto b) {
            return right ? grid.xi(a) < grid.xi(b) : grid.xi(a) > grid.xi(b);
        });
        return keys;
    };
    march(column_keys(true), axis_sink, origin);
    march(column_keys(false), axis_sink, origin);

    for (std::size_t i = 0; i < grid.nxi; ++i) {
        if (!axis[i]) {
            for (std::size_t j = 0; j < grid.neta; ++j)
                out.status[grid.index(i, j)] = axis_status[i];
            continue;
        }
        struct ColumnSink {
            const Grid& grid;
            StateGrid& out;
            std::size_t i;
            Point target(std::size_t j) const { return {grid.xi(i), grid.eta(j)}; }
            void store(std::size_t j, const GbdtState& s) {
                out.states[grid.index(i, j)] = s;
                out.status[grid.index(i, j)] = int(PointStatus::Ok);
            }
            void flag(std::size_t j, int st) { out.status[grid.index(i, j)] = st; }
        } col_sink{grid, out, i};
        auto row_keys = [&](bool up) {
            std::vector<std::size_t> keys;
            for (std::size_t j = 0; j < grid.neta; ++j)
                if (up ? (grid.eta(j) >= 0.0) : (grid.eta(j) < 0.0)) keys.push_back(j);
            std::sort(keys.begin(), keys.end(), [&](auto a, auto b) {
                return up ? grid.eta(a) < grid.eta(b) : grid.eta(a) > grid.eta(b);
            });
            return keys;
        };
        march(row_keys(true), col_sink, *axis[i]);
        march(row_keys(false), col_sink, *axis[i]);
    }
    return out;
}

/// The coupled propagation of (A, Pi, S) along paths from the origin by the
/// first-order systems the transformation is built on. All runs use classical
/// RK4 with a fixed step and a mandatory step-halving verification; no
/// adaptivity, so identical inputs give identical bits.
class Flow {
public:
    Flow(Triple triple, Background bg, Anchor anchor,
         BranchChoice branch = BranchChoice::principal(), FlowOptions opt = FlowOptions{})
        : triple_(std::move(triple)), bg_(std::move(bg)), anchor_(anchor),
          branch_(std::move(branch)), opt_(opt) {
        if (bg_.m() != triple_.m())
            throw ValidationError({"background seed size m=" + std::to_string(bg_.m()) +
                                   " does not match J size m=" + std::to_string(triple_.m())});
        initial_A_ = (anchor_ == Anchor::JordanMatrix)
                         ? triple_.spec().reconstruct()
                         : explicit_A(0.0, 0.0, triple_.spec(), bg_, branch_);
        triple_.require_identity(initial_A_, opt_.identity_tol);
    }

    const Triple& triple() const { return triple_; }
    const Background& background() const { return bg_; }
    const FlowOptions& options() const { return opt_; }
    Anchor anchor() const { return anchor_; }

    /// A(0,0) of this flow; the matrix the triple identity is anchored at.
    const ComplexMatrix& initial_A() const { return initial_A_; }

    GbdtState origin_state() const {
        return finalize({0.0, 0.0}, initial_A_, triple_.Pi0(), triple_.S0());
    }

    GbdtState propagate(const PathSpec& path) const {
        path.validate();
        GbdtState s = origin_state();
        for (std::size_t k = 1; k < path.waypoints.size(); ++k)
            s = run_segment(s, path.waypoints[k], path.step);
        return s;
    }

    /// Short axis-aligned continuation used for finite-difference probes and
    /// shared-prefix grid propagation; exact for the same fields because the
    /// systems are compatible (path independence).
    GbdtState continue_to(const GbdtState& base, Point target) const {
        GbdtState s = base;
        if (target.xi != base.at.xi) s = run_segment(s, {target.xi, base.at.eta}, opt_.step);
        if (target.eta != s.at.eta) s = run_segment(s, {target.xi, target.eta}, opt_.step);
        return s;
    }

    /// Every grid point via the axis-then-column shared-prefix route. Points
    /// behind a failed segment are flagged, never extrapolated.
    StateGrid propagate_grid(const Grid& grid) const {
        return propagate_grid_from(grid, origin_state(),
                                   [this](const GbdtState& cur, Point to) {
                                       return run_segment(cur, to, opt_.step);
                                   });
    }

    /// Co-integrates an m x m companion system W' = (ux Gxi + uy Geta) W
    /// along the path, with coefficients built from the live (A, Pi, S).
    /// CoeffFn: (Point, A, Pi, S) -> pair{Gxi, Geta}.
    template <class CoeffFn>
    std::pair<GbdtState, ComplexMatrix> propagate_with_companion(const PathSpec& path,
                                                                 ComplexMatrix w0,
                                                                 CoeffFn&& coeff) const {
        path.validate();
        GbdtState s = origin_state();
        ComplexMatrix w = std::move(w0);
        for (std::size_t k = 1; k < path.waypoints.size(); ++k) {
            const Point to = path.waypoints[k];
            const double len = distance(s.at, to);
            if (len == 0.0) continue;
            const int nsteps = std::max(1, int(std::ceil(len / path.step)));
            const double ux = (to.xi - s.at.xi) / len;
            const double uy = (to.eta - s.at.eta) / len;
            const bool carry_A = (anchor_ == Anchor::JordanMatrix);

            detail::MatVec y0;
            if (carry_A) y0.parts.push_back(s.A);
            y0.parts.push_back(s.Pi);
            if (opt_.with_S) y0.parts.push_back(s.S);
            y0.parts.push_back(w);

            const Point from = s.at;
            auto deriv = [&](double t, const detail::MatVec& y) {
                const double x = from.xi + t * ux;
                const double e = from.eta + t * uy;
                detail::MatVec base;
                base.parts.assign(y.parts.begin(), y.parts.end() - 1);
                detail::MatVec dy = derivative(x, e, ux, uy, carry_A, base);
                std::size_t part = 0;
                const ComplexMatrix a = carry_A
                                            ? y.parts[part++]
                                            : explicit_A(x, e, triple_.spec(), bg_, branch_);
                const ComplexMatrix& pi = y.parts[part++];
                const ComplexMatrix& sv = opt_.with_S ? y.parts[part++] : s.S;
                auto [gx, ge] = coeff(Point{x, e}, a, pi, sv);
                const ComplexMatrix& wv = y.parts.back();
                dy.parts.push_back((gx * wv) * Complex(ux) + (ge * wv) * Complex(uy));
                return dy;
            };

            const detail::MatVec coarse = rk4_integrate(y0, 0.0, len, nsteps, deriv);
            const detail::MatVec fine = rk4_integrate(y0, 0.0, len, 2 * nsteps, deriv);
            for (std::size_t kk = 0; kk < fine.parts.size(); ++kk) {
                const double diff = difference_norm(coarse.parts[kk], fine.parts[kk]) /
                                    relative_scale(fine.parts[kk]);
                if (diff > opt_.richardson_tol)
                    throw AccuracyError("step-halving disagreement " + std::to_string(diff) +
                                        " in companion integration; reduce the path step");
            }
            std::size_t part = 0;
            ComplexMatrix a = carry_A ? fine.parts[part++]
                                      : explicit_A(to.xi, to.eta, triple_.spec(), bg_, branch_);
            ComplexMatrix pi = fine.parts[part++];
            ComplexMatrix sv = opt_.with_S ? fine.parts[part++] : ComplexMatrix();
            w = fine.parts.back();
            s = finalize(to, std::move(a), std::move(pi), std::move(sv));
        }
        return {std::move(s), std::move(w)};
    }

    /// Assembles state diagnostics at a point already reached.
    GbdtState finalize(Point at, ComplexMatrix a, ComplexMatrix pi, ComplexMatrix s) const {
        return assemble_state(at, std::move(a), std::move(pi), std::move(s), triple_.J());
    }

private:
    /// Straight segment with fixed-step RK4, verified by step halving.
    GbdtState run_segment(const GbdtState& from, Point to, double step) const {
        const double len = distance(from.at, to);
        if (len == 0.0) return from;
        const int nsteps = std::max(1, int(std::ceil(len / step)));
        const double ux = (to.xi - from.at.xi) / len;
        const double uy = (to.eta - from.at.eta) / len;

        const bool carry_A = (anchor_ == Anchor::JordanMatrix);
        detail::MatVec y0;
        if (carry_A) y0.parts.push_back(from.A);
        y0.parts.push_back(from.Pi);
        if (opt_.with_S) y0.parts.push_back(from.S);

        auto deriv = [&](double s, const detail::MatVec& y) {
            const double x = from.at.xi + s * ux;
            const double e = from.at.eta + s * uy;
            return derivative(x, e, ux, uy, carry_A, y);
        };

        const detail::MatVec coarse = rk4_integrate(y0, 0.0, len, nsteps, deriv);
        const detail::MatVec fine = rk4_integrate(y0, 0.0, len, 2 * nsteps, deriv);
        for (std::size_t k = 0; k < fine.parts.size(); ++k) {
            const double diff = difference_norm(coarse.parts[k], fine.parts[k]) /
                                relative_scale(fine.parts[k]);
            if (diff > opt_.richardson_tol)
                throw AccuracyError(
                    "step-halving disagreement " + std::to_string(diff) +
                    " on segment to (xi=" + std::to_string(to.xi) +
                    ", eta=" + std::to_string(to.eta) + "); reduce the path step");
        }

        std::size_t part = 0;
        ComplexMatrix a = carry_A ? fine.parts[part++]
                                  : explicit_A(to.xi, to.eta, triple_.spec(), bg_, branch_);
        ComplexMatrix pi = fine.parts[part++];
        ComplexMatrix s = opt_.with_S ? fine.parts[part++] : ComplexMatrix();
        return finalize(to, std::move(a), std::move(pi), std::move(s));
    }

    detail::MatVec derivative(double x, double e, double ux, double uy, bool carry_A,
                              const detail::MatVec& y) const {
        std::size_t part = 0;
        const ComplexMatrix a =
            carry_A ? y.parts[part++] : explicit_A(x, e, triple_.spec(), bg_, branch_);
        const ComplexMatrix& pi = y.parts[part++];
        const ComplexMatrix* s = opt_.with_S ? &y.parts[part++] : nullptr;

        const std::size_t n = triple_.n();
        const ComplexMatrix eye = ComplexMatrix::identity(n);

        const ComplexMatrix am = a - eye;
        const ComplexMatrix ap = a + eye;
        LuDecomposition lum(am), lup(ap);
        if (lum.singular() || lup.singular())
            throw PathError("A -+ I singular on path", x, e, int(PointStatus::SingularA));
        const ComplexMatrix bm = lum.inverse("A - I on path");
        const ComplexMatrix bp = lup.inverse("A + I on path");
        if (am.frobenius_norm() * bm.frobenius_norm() > opt_.cond_limit ||
            ap.frobenius_norm() * bp.frobenius_norm() > opt_.cond_limit)
            throw PathError("A -+ I beyond the condition limit on path", x, e,
                            int(PointStatus::SingularA));

        double bx = 0.0, by = 0.0;
        if (carry_A || opt_.with_S) {
            const double av = bg_.alpha(x, e);
            if (std::abs(av) <= opt_.alpha_floor)
                throw PathError("alpha vanishes on path", x, e, int(PointStatus::AlphaZero));
            bx = bg_.alpha_xi(x) / av;
            by = bg_.alpha_eta(e) / av;
        }

        const ComplexMatrix qv = bg_.q(x, e);
        const ComplexMatrix Qv = bg_.Q(x, e);

        detail::MatVec dy;
        if (carry_A) {
            ComplexMatrix da = (a + 2.0 * eye + 2.0 * bm) * Complex(-bx * ux) +
                               (a - 2.0 * eye + 2.0 * bp) * Complex(-by * uy);
            dy.parts.push_back(std::move(da));
        }
        {
            ComplexMatrix dpi = (bm * (pi * qv)) * Complex(ux) + (bp * (pi * Qv)) * Complex(uy);
            dy.parts.push_back(std::move(dpi));
        }
        if (opt_.with_S) {
            const ComplexMatrix& sv = *s;
            const ComplexMatrix bmH = bm.adjoint();
            const ComplexMatrix bpH = bp.adjoint();
            const ComplexMatrix tq = pi * (qv * (triple_.J() * pi.adjoint()));
            const ComplexMatrix tQ = pi * (Qv * (triple_.J() * pi.adjoint()));
            ComplexMatrix ds =
                ((sv - 2.0 * (bm * sv * bmH)) * Complex(bx) -
                 Complex(0, 1) * (bm * tq * bmH)) * Complex(ux) +
                ((sv - 2.0 * (bp * sv * bpH)) * Complex(by) -
                 Complex(0, 1) * (bp * tQ * bpH)) * Complex(uy);
            dy.parts.push_back(std::move(ds));
        }
        return dy;
    }

    Triple triple_;
    Background bg_;
    Anchor anchor_;
    BranchChoice branch_;
    FlowOptions opt_;
    ComplexMatrix initial_A_;
};

/// Pi at the end of a path (the Pi-only flow when S is not needed).
inline ComplexMatrix propagate_pi(const Triple& triple, const Background& bg,
                                  const PathSpec& path, Anchor anchor = Anchor::ExplicitField,
                                  const BranchChoice& branch = BranchChoice::principal(),
                                  FlowOptions opt = FlowOptions{}) {
    opt.with_S = false;
    opt.step = path.step;
    Flow flow(triple, bg, anchor, branch, opt);
    return flow.propagate(path).Pi;
}

/// S at the end of a path (propagates the full coupled system).
inline ComplexMatrix propagate_S(const Triple& triple, const Background& bg,
                                 const PathSpec& path, Anchor anchor = Anchor::ExplicitField,
                                 const BranchChoice& branch = BranchChoice::principal(),
                                 FlowOptions opt = FlowOptions{}) {
    opt.with_S = true;
    opt.step = path.step;
    Flow flow(triple, bg, anchor, branch, opt);
    return flow.propagate(path).S;
}

}  // namespace gbdt

#include <catch_amalgamated.hpp>

#include "gbdt/ernst.hpp"
#include "helpers.hpp"

using namespace gbdt;

namespace {

struct ErnstConfig {
    Complex c = Complex(1.0, 1.0);
    JordanSpec spec = JordanSpec::single_block(c, 2);
    ComplexMatrix jmat = make_j_matrix(JKind::OffDiagonal, 1);
    ComplexMatrix pi0 = ComplexMatrix{{Complex(1.0, 0.0), Complex(0.2, 0.1)},
                                      {Complex(-0.1, 0.3), Complex(0.7, 0.0)}};
    Triple triple = make_triple();
    HamiltonianPair pair = HamiltonianPair::constant(ComplexMatrix::identity(2));

    Triple make_triple() const {
        const ComplexMatrix anchor = ernst_A(spec, 0.0, 0.0);
        const ComplexMatrix s0 = solve_S_identity(anchor, pi0, jmat);
        return Triple(spec, s0, pi0, jmat);
    }
};

}  // namespace

TEST_CASE("seed Hamiltonians: constant pair solves the system") {
    HamiltonianPair hp = HamiltonianPair::constant(ComplexMatrix::identity(2));
    ComplexMatrix jmat = make_j_matrix(JKind::OffDiagonal, 1);
    CHECK(ernst_algebraic_residual(hp.H(0.1, 0.2), hp.cH(0.1, 0.2), jmat) <= 1e-14);
    CHECK(hp.H_eta(0.1, 0.2).frobenius_norm() == 0.0);
    CHECK(hp.cH_xi(0.1, 0.2).frobenius_norm() == 0.0);
}

TEST_CASE("seed Hamiltonians: shift profile differentiates in closed form") {
    // H = cH = (1 + s^2) P with a rank-one projector P.
    ComplexMatrix p{{0.5, 0.5}, {0.5, 0.5}};
    HamiltonianPair hp = HamiltonianPair::shift_profile(RealPolynomial({1.0, 0.0, 1.0}), p);
    const double xi = 0.12, eta = 0.31, s = xi + eta;
    CHECK(difference_norm(hp.H(xi, eta), p * (1 + s * s)) <= 1e-14);
    CHECK(difference_norm(hp.H_eta(xi, eta), p * (2 * s)) <= 1e-14);
    CHECK(difference_norm(hp.cH_xi(xi, eta), p * (2 * s)) <= 1e-14);
    // finite-difference cross-check of the stored derivative
    const double d = 1e-6;
    ComplexMatrix fd = (hp.H(xi, eta + d) - hp.H(xi, eta - d)) * (1.0 / (2 * d));
    CHECK(difference_norm(fd, hp.H_eta(xi, eta)) <= 1e-8);
}

TEST_CASE("seed Hamiltonians: indefinite bases are rejected") {
    ComplexMatrix indefinite = ComplexMatrix::diagonal({Complex(1, 0), Complex(-0.5, 0)});
    CHECK_THROWS_AS(HamiltonianPair::constant(indefinite), ValidationError);
    // A non-solving pair (H != cH constant with [JH, JcH] != 0) fails the
    // algebraic line; such pairs can only enter through the residual checks.
    ComplexMatrix jmat = make_j_matrix(JKind::OffDiagonal, 1);
    ComplexMatrix h = ComplexMatrix::diagonal({Complex(2, 0), Complex(1, 0)});
    ComplexMatrix ch{{1.0, 0.3}, {0.3, 1.0}};
    CHECK(ernst_algebraic_residual(h, ch, jmat) > 1e-2);
}

TEST_CASE("ernst_A: scalar, Jordan block, and square property") {
    CHECK(std::abs(ernst_A(JordanSpec::diagonal({Complex(2, 0)}), 0.0, 0.0)(0, 0) -
                   Complex(0.5, 0)) <= 1e-14);

    const Complex c(1.3, 0.4);
    const double xi = 0.1, eta = 0.15;
    const Complex s = 1.0 / (c - xi - eta);
    ComplexMatrix a = ernst_A(JordanSpec::single_block(c, 2), xi, eta);
    CHECK(std::abs(a(0, 0) - s) <= 1e-13);
    CHECK(std::abs(a(0, 1) + s * s) <= 1e-13);
    CHECK(std::abs(a(1, 0)) <= 1e-14);

    // A_xi = A_eta = A^2 by central differences
    JordanSpec spec = JordanSpec::single_block(Complex(1, 1), 2);
    const double d = 1e-5;
    ComplexMatrix a0 = ernst_A(spec, xi, eta);
    ComplexMatrix dx = (ernst_A(spec, xi + d, eta) - ernst_A(spec, xi - d, eta)) *
                       (1.0 / (2 * d));
    ComplexMatrix de = (ernst_A(spec, xi, eta + d) - ernst_A(spec, xi, eta - d)) *
                       (1.0 / (2 * d));
    CHECK(difference_norm(dx, a0 * a0) <= 1e-6);
    CHECK(difference_norm(de, a0 * a0) <= 1e-6);
}

TEST_CASE("ernst_A: spectral collision is flagged") {
    JordanSpec spec = JordanSpec::diagonal({Complex(0.3, 0)});
    CHECK_THROWS_AS(ernst_A(spec, 0.1, 0.2), PathError);
}

TEST_CASE("ernst flow: zero Hamiltonians freeze Pi") {
    ErnstConfig cfg;
    cfg.pair = HamiltonianPair::constant(ComplexMatrix::zero(2, 2));
    ErnstFlow flow(cfg.triple, cfg.pair);
    GbdtState end = flow.propagate(PathSpec::l_path({0.2, 0.15}, 1e-3));
    CHECK(difference_norm(end.Pi, cfg.triple.Pi0()) <= 1e-12);
    CHECK(end.identity_residual <= 1e-8);
    // S follows the homogeneous drift; its derivative matches by differences.
    const double d = 1e-4;
    GbdtState xp = flow.continue_to(end, {0.2 + d, 0.15});
    GbdtState xm = flow.continue_to(end, {0.2 - d, 0.15});
    ComplexMatrix ds = (xp.S - xm.S) * (1.0 / (2 * d));
    ComplexMatrix expected = -(end.A * end.S + end.S * end.A.adjoint());
    CHECK(difference_norm(ds, expected) <= 1e-6);
}

TEST_CASE("ernst flow: identity transported and paths commute") {
    ErnstConfig cfg;
    ErnstFlow flow(cfg.triple, cfg.pair);
    CHECK(cfg.triple.identity_residual(flow.initial_A()) <= 1e-10);
    for (Point target : {Point{0.2, 0.1}, Point{0.05, 0.25}, Point{-0.15, -0.1}}) {
        GbdtState a = flow.propagate(PathSpec::l_path(target, 1e-3));
        GbdtState b = flow.propagate(PathSpec::staircase(target, 5, 1e-3));
        CHECK(a.identity_residual <= 1e-8);
        CHECK(difference_norm(a.Pi, b.Pi) <= 1e-7);
        CHECK(difference_norm(a.S, b.S) <= 1e-7);
        CHECK(HermitianFlag{1e-9}.passes(a.S));
    }
}

TEST_CASE("ernst flow: shift-profile pair propagates too") {
    ErnstConfig cfg;
    ComplexMatrix proj{{0.5, 0.5}, {0.5, 0.5}};
    cfg.pair = HamiltonianPair::shift_profile(RealPolynomial({1.0, 0.0, 1.0}), proj);
    ErnstFlow flow(cfg.triple, cfg.pair);
    GbdtState end = flow.propagate(PathSpec::l_path({0.15, 0.2}, 1e-3));
    CHECK(end.identity_residual <= 1e-8);
}

TEST_CASE("ernst_w0: zero Pi gives the identity; J-relation holds") {
    ErnstConfig cfg;
    ErnstFlow flow(cfg.triple, cfg.pair);
    GbdtState st = flow.propagate(PathSpec::l_path({0.18, 0.07}, 1e-3));
    ComplexMatrix w0 = ernst_w0(st, cfg.jmat);
    CHECK(difference_norm(w0.adjoint() * cfg.jmat * w0, cfg.jmat) <= 1e-9);

    GbdtState zero = st;
    zero.Pi = ComplexMatrix::zero(2, 2);
    zero.S = ComplexMatrix::identity(2);
    CHECK(difference_norm(ernst_w0(zero, cfg.jmat), ComplexMatrix::identity(2)) <= 1e-14);
}

TEST_CASE("ernst_w0 satisfies its linear systems by differences") {
    ErnstConfig cfg;
    ErnstFlow flow(cfg.triple, cfg.pair);
    const Point p{0.15, 0.1};
    const double d = 5e-4;
    GbdtState base = flow.propagate(PathSpec::l_path(p, 1e-3));
    auto w0_at = [&](double xi, double eta) {
        return ernst_w0(flow.continue_to(base, {xi, eta}), cfg.jmat);
    };
    W0Coefficients co = ernst_w0_coefficients(base, cfg.pair, cfg.jmat);
    ComplexMatrix w0 = w0_at(p.xi, p.eta);
    ComplexMatrix dx = (w0_at(p.xi + d, p.eta) - w0_at(p.xi - d, p.eta)) * (1.0 / (2 * d));
    ComplexMatrix de = (w0_at(p.xi, p.eta + d) - w0_at(p.xi, p.eta - d)) * (1.0 / (2 * d));
    CHECK(difference_norm(dx, co.G0 * w0) <= 1e-5);
    CHECK(difference_norm(de, co.F0 * w0) <= 1e-5);
}

TEST_CASE("ernst_darboux: zero Pi gives the identity; pole collisions rejected") {
    ErnstConfig cfg;
    ErnstFlow flow(cfg.triple, cfg.pair);
    GbdtState st = flow.propagate(PathSpec::l_path({0.1, 0.1}, 1e-3));
    GbdtState zero = st;
    zero.Pi = ComplexMatrix::zero(2, 2);
    zero.S = ComplexMatrix::identity(2);
    CHECK(difference_norm(ernst_darboux(zero, cfg.jmat, Complex(3, 1)),
                          ComplexMatrix::identity(2)) <= 1e-13);
    CHECK_THROWS_AS(ernst_darboux(st, cfg.jmat, Complex(0.2, 0)), BranchCutError);
    // z on the spectrum of curlyA makes lambda a pole of the resolvent form.
    CHECK_THROWS_AS(ernst_darboux(st, cfg.jmat, cfg.c), SingularError);
}

TEST_CASE("ernst_darboux satisfies the Darboux systems by differences") {
    ErnstConfig cfg;
    ErnstFlow flow(cfg.triple, cfg.pair);
    const Point p{0.12, 0.18};
    const double d = 5e-4;
    GbdtState base = flow.propagate(PathSpec::l_path(p, 1e-3));
    for (Complex z : {Complex(3, 2), Complex(-2, 1.5), Complex(0.5, -2.5)}) {
        auto v_at = [&](double xi, double eta) {
            return ernst_darboux(flow.continue_to(base, {xi, eta}), cfg.jmat, z);
        };
        TransformedHamiltonians th = transformed_hamiltonians(base, cfg.pair, cfg.jmat);
        const ComplexMatrix h = cfg.pair.H(p.xi, p.eta);
        const ComplexMatrix ch = cfg.pair.cH(p.xi, p.eta);
        const Complex pole = 1.0 / (z - p.xi - p.eta);
        ComplexMatrix v = v_at(p.xi, p.eta);
        ComplexMatrix dx = (v_at(p.xi + d, p.eta) - v_at(p.xi - d, p.eta)) * (1.0 / (2 * d));
        ComplexMatrix de = (v_at(p.xi, p.eta + d) - v_at(p.xi, p.eta - d)) * (1.0 / (2 * d));
        ComplexMatrix rhs_x =
            (cfg.jmat * th.Htilde * v - v * (cfg.jmat * h)) * (Complex(0, 1) * pole);
        ComplexMatrix rhs_e =
            (cfg.jmat * th.cHtilde * v - v * (cfg.jmat * ch)) * (Complex(0, 1) * pole);
        CHECK(difference_norm(dx, rhs_x) <= 1e-5);
        CHECK(difference_norm(de, rhs_e) <= 1e-5);
    }
}

TEST_CASE("transformed Hamiltonians: congruence properties") {
    ErnstConfig cfg;
    ErnstFlow flow(cfg.triple, cfg.pair);
    GbdtState st = flow.propagate(PathSpec::l_path({0.2, 0.12}, 1e-3));
    TransformedHamiltonians th = transformed_hamiltonians(st, cfg.pair, cfg.jmat);

    // w0 = I when Pi = 0 keeps the seed.
    GbdtState zero = st;
    zero.Pi = ComplexMatrix::zero(2, 2);
    zero.S = ComplexMatrix::identity(2);
    TransformedHamiltonians id = transformed_hamiltonians(zero, cfg.pair, cfg.jmat);
    CHECK(difference_norm(id.Htilde, cfg.pair.H(0.2, 0.12)) <= 1e-13);

    CHECK(HermitianFlag{1e-12}.passes(th.Htilde));
    CHECK(HermitianFlag{1e-12}.passes(th.cHtilde));
    const auto evs = hermitian_eigenvalues(th.Htilde);
    CHECK(evs.front() >= -1e-10);

    // Algebraic line of the coupled system transports exactly.
    CHECK(ernst_algebraic_residual(th.Htilde, th.cHtilde, cfg.jmat) <= 1e-10);

    // Spectrum of J Htilde matches the spectrum of J H.
    const auto s1 = spectrum_j_hermitian(cfg.jmat, cfg.pair.H(0.2, 0.12));
    const auto s2 = spectrum_j_hermitian(cfg.jmat, th.Htilde);
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(std::abs(s1[i] - s2[i]) <= 1e-8);
}

TEST_CASE("transformed Hamiltonians: derivative line by differences") {
    ErnstConfig cfg;
    ErnstFlow flow(cfg.triple, cfg.pair);
    const Point p{0.15, 0.08};
    const double d = 5e-4;
    GbdtState base = flow.propagate(PathSpec::l_path(p, 1e-3));
    auto pair_at = [&](double xi, double eta) {
        return transformed_hamiltonians(flow.continue_to(base, {xi, eta}), cfg.pair,
                                        cfg.jmat);
    };
    ComplexMatrix h_eta = (pair_at(p.xi, p.eta + d).Htilde - pair_at(p.xi, p.eta - d).Htilde) *
                          (1.0 / (2 * d));
    ComplexMatrix ch_xi = (pair_at(p.xi + d, p.eta).cHtilde - pair_at(p.xi - d, p.eta).cHtilde) *
                          (1.0 / (2 * d));
    CHECK(difference_norm(h_eta, ch_xi) <= 1e-6);
}

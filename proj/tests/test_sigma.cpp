#include <catch_amalgamated.hpp>

#include "gbdt/sigma.hpp"
#include "helpers.hpp"

using namespace gbdt;

namespace {

/// Independent finite-difference residual of the field equation
/// (alpha u_xi u^-1)_eta + (alpha u_eta u^-1)_xi at one point, differencing
/// the assembled products.
template <class FieldFn>
double pde_residual_at(FieldFn&& u, const Background& bg, Point p, double d) {
    auto P = [&](double xi, double eta) {  // alpha u_xi u^-1
        ComplexMatrix du = (u(xi + d, eta) - u(xi - d, eta)) * (1.0 / (2 * d));
        return ComplexMatrix(du * inverse(u(xi, eta)).inv * bg.alpha(xi, eta));
    };
    auto R = [&](double xi, double eta) {  // alpha u_eta u^-1
        ComplexMatrix du = (u(xi, eta + d) - u(xi, eta - d)) * (1.0 / (2 * d));
        return ComplexMatrix(du * inverse(u(xi, eta)).inv * bg.alpha(xi, eta));
    };
    ComplexMatrix term1 = (P(p.xi, p.eta + d) - P(p.xi, p.eta - d)) * (1.0 / (2 * d));
    ComplexMatrix term2 = (R(p.xi + d, p.eta) - R(p.xi - d, p.eta)) * (1.0 / (2 * d));
    return (term1 + term2).frobenius_norm();
}

Triple scalar_zero_triple(const ComplexMatrix& jmat) {
    JordanSpec spec = JordanSpec::diagonal({Complex(6, 0)});
    return Triple(spec, ComplexMatrix::identity(1), ComplexMatrix::zero(1, 2), jmat);
}

}  // namespace

TEST_CASE("seed_solution: unit-slope coefficients and diagonal identity") {
    Background bg = testcfg::mikhailov_bg();
    SeedValues sv = seed_solution(bg, {0.2, -0.1});
    ComplexMatrix j = j_signature(1);
    CHECK(difference_norm(sv.q, -j) == 0.0);
    CHECK(difference_norm(sv.Q, j) == 0.0);

    Background same = Background::exp_diag(RealPolynomial::affine(0.1, 0.7),
                                           RealPolynomial::affine(0.1, 0.7), 1);
    CHECK(difference_norm(seed_solution(same, {0.3, 0.3}).u,
                          ComplexMatrix::identity(2)) <= 1e-15);
}

TEST_CASE("seed solution satisfies the field equation by differences") {
    Background bg = testcfg::shifted_bg();
    auto u = [&](double xi, double eta) { return bg.u(xi, eta); };
    for (Point p : {Point{0.1, 0.2}, Point{-0.2, -0.1}})
        CHECK(pde_residual_at(u, bg, p, 1e-3) <= 1e-6);
}

TEST_CASE("calU: zero Pi gives the identity and matches the direct formula") {
    testcfg::SigmaConfig cfg;
    Flow flow(cfg.triple, cfg.bg, Anchor::ExplicitField);
    GbdtState st = flow.propagate(PathSpec::l_path({0.2, 0.1}, 1e-3));

    GbdtState zero = st;
    zero.Pi = ComplexMatrix::zero(2, 2);
    zero.S = ComplexMatrix::identity(2);
    CHECK(difference_norm(calU(zero, cfg.jmat), ComplexMatrix::identity(2)) <= 1e-15);

    ComplexMatrix manual =
        ComplexMatrix::identity(2) -
        Complex(0, 1) * (cfg.jmat * st.Pi.adjoint() * inverse(st.S).inv *
                         inverse(st.A).inv * st.Pi);
    CHECK(difference_norm(calU(st, cfg.jmat), manual) <= 1e-12);
}

TEST_CASE("calU is J-unitary on propagated states") {
    testcfg::SigmaConfig cfg;
    Flow flow(cfg.triple, cfg.bg, Anchor::ExplicitField);
    for (Point p : {Point{0.25, 0.2}, Point{-0.2, 0.15}, Point{0.02, -0.28}}) {
        GbdtState st = flow.propagate(PathSpec::l_path(p, 1e-3));
        ComplexMatrix u = calU(st, cfg.jmat);
        CHECK(difference_norm(u.adjoint() * cfg.jmat * u, cfg.jmat) <= 1e-9);
    }
}

TEST_CASE("transform_sigma: zero Pi0 returns the seed everywhere") {
    ComplexMatrix jmat = make_j_matrix(JKind::OffDiagonal, 1);
    Background bg = testcfg::shifted_bg();
    Grid grid = Grid::box(-0.2, 0.2, -0.2, 0.2, 0.1);
    SigmaSolution sol = transform_sigma(scalar_zero_triple(jmat), bg, grid);
    REQUIRE(sol.field.coverage() == 1.0);
    for (std::size_t j = 0; j < grid.neta; ++j)
        for (std::size_t i = 0; i < grid.nxi; ++i) {
            const std::size_t idx = grid.index(i, j);
            CHECK(difference_norm(sol.field.values[idx],
                                  bg.u(grid.xi(i), grid.eta(j))) <= 1e-12);
        }
}

TEST_CASE("transform_sigma: explicit and propagated assemblies agree") {
    testcfg::SigmaConfig cfg;
    SigmaOptions ode;
    ode.assembly = SigmaAssembly::OdePropagation;
    SigmaOptions exp;
    exp.assembly = SigmaAssembly::ExplicitJordan2;
    SigmaTransform t_ode(cfg.triple, cfg.bg, ode);
    SigmaTransform t_exp(cfg.triple, cfg.bg, exp);
    for (Point p : {Point{0.2, 0.1}, Point{-0.15, 0.25}, Point{0.15, 0.15}}) {
        CHECK(difference_norm(t_ode.u_hat_at(p), t_exp.u_hat_at(p)) <= 1e-7);
    }
}

TEST_CASE("transform_sigma: J-unitarity and the field equation hold") {
    testcfg::SigmaConfig cfg;
    SigmaOptions opt;
    opt.assembly = SigmaAssembly::ExplicitJordan2;
    SigmaTransform transform(cfg.triple, cfg.bg, opt);

    Grid grid = Grid::box(-0.3, 0.3, -0.3, 0.3, 0.15);
    SigmaSolution sol = transform.on_grid(grid);
    CHECK(sol.field.coverage() == 1.0);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const ComplexMatrix& uh = sol.field.values[idx];
        CHECK(difference_norm(uh.adjoint() * cfg.jmat * uh, cfg.jmat) <= 1e-9);
    }

    auto u = [&](double xi, double eta) { return transform.u_hat_at({xi, eta}); };
    for (Point p : {Point{0.1, 0.2}, Point{-0.2, 0.1}})
        CHECK(pde_residual_at(u, cfg.bg, p, 1e-3) <= 1e-5);
}

TEST_CASE("transform_grav: zero Pi0 gives d = 1 and u_tilde = alpha u") {
    ComplexMatrix jmat = make_j_matrix(JKind::Pauli2, 1);
    Background bg = testcfg::shifted_bg();
    Grid grid = Grid::box(-0.2, 0.2, -0.2, 0.2, 0.1);
    GravSolution sol = transform_grav(scalar_zero_triple(jmat), bg, grid);
    CHECK(sol.d == Catch::Approx(1.0).margin(1e-12));
    for (std::size_t j = 0; j < grid.neta; ++j)
        for (std::size_t i = 0; i < grid.nxi; ++i) {
            const std::size_t idx = grid.index(i, j);
            REQUIRE(sol.field.ok(idx));
            ComplexMatrix expect = bg.u(grid.xi(i), grid.eta(j)) *
                                   bg.alpha(grid.xi(i), grid.eta(j));
            CHECK(difference_norm(sol.field.values[idx], expect) <= 1e-10);
        }
}

TEST_CASE("transform_grav: real solution with det identities") {
    testcfg::GravConfig cfg;
    Grid grid = Grid::box(-0.25, 0.25, -0.25, 0.25, 0.125);
    GravSolution sol = transform_grav(cfg.triple, cfg.bg, grid);
    REQUIRE(sol.field.coverage() == 1.0);
    CHECK(sol.d > 0.0);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        CHECK(sol.field.values[idx].max_imag_abs() <= 1e-9);
        const double det_hat = determinant(sol.field_hat.values[idx]).real();
        CHECK(std::abs(det_hat - sol.d) <= 1e-8);
        const double det_tilde = determinant(sol.field.values[idx]).real();
        const double a2 = sol.field.alpha[idx] * sol.field.alpha[idx];
        CHECK(std::abs(det_tilde - a2) <= 1e-8 * std::max(1.0, a2));
    }
}

TEST_CASE("transform_grav rejects complex triples") {
    testcfg::SigmaConfig cfg;  // complex c
    Grid grid = Grid::box(0, 0.1, 0, 0.1, 0.05);
    CHECK_THROWS_AS(transform_grav(cfg.triple, cfg.bg, grid), ValidationError);
}

TEST_CASE("normalize_det: identity and diagonal cases") {
    Grid grid;  // single point
    FieldGrid f(grid, 2);
    f.status[0] = int(PointStatus::Ok);
    f.values[0] = ComplexMatrix::identity(2);
    FieldGrid out = normalize_det({1.0}, f);
    CHECK(difference_norm(out.values[0], ComplexMatrix::identity(2)) == 0.0);

    f.values[0] = ComplexMatrix::diagonal({Complex(4, 0), Complex(1, 0)});
    out = normalize_det({2.0}, f);
    CHECK(difference_norm(out.values[0], f.values[0]) <= 1e-14);
    CHECK(determinant(out.values[0]).real() == Catch::Approx(4.0));  // = alpha^2

    f.values[0] = ComplexMatrix::diagonal({Complex(-1, 0), Complex(1, 0)});
    out = normalize_det({1.0}, f);
    CHECK(out.status[0] == int(PointStatus::Failed));
}

TEST_CASE("normalized field satisfies the trace identity by differences") {
    // tr(u_xi u^-1) = (det u)_xi / det u for the normalized gravitational field.
    testcfg::GravConfig cfg;
    SigmaTransform transform(cfg.triple, cfg.bg, SigmaOptions{});
    const GbdtState origin = transform.state_at({0, 0});
    const double d = determinant(transform.u_hat(origin)).real();
    auto u_tilde = [&](double xi, double eta) {
        return ComplexMatrix(transform.u_hat_at({xi, eta}) *
                             (cfg.bg.alpha(xi, eta) / std::sqrt(d)));
    };
    const Point p{0.1, 0.15};
    const double h = 1e-3;
    ComplexMatrix du = (u_tilde(p.xi + h, p.eta) - u_tilde(p.xi - h, p.eta)) * (1.0 / (2 * h));
    const Complex lhs = (du * inverse(u_tilde(p.xi, p.eta)).inv).trace();
    const double det_p = determinant(u_tilde(p.xi + h, p.eta)).real();
    const double det_m = determinant(u_tilde(p.xi - h, p.eta)).real();
    const double det_0 = determinant(u_tilde(p.xi, p.eta)).real();
    const double rhs = (det_p - det_m) / (2 * h) / det_0;
    CHECK(std::abs(lhs - rhs) <= 1e-5);
}

#include <catch_amalgamated.hpp>

#include <random>

#include "gbdt/matrix.hpp"

using gbdt::Complex;
using gbdt::ComplexMatrix;

namespace {

ComplexMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ComplexMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = Complex(u(rng), u(rng));
    return m;
}

}  // namespace

TEST_CASE("product: identity and nilpotent shift") {
    ComplexMatrix m{{Complex(1, 2), Complex(3, -1)}, {Complex(0, 1), Complex(-2, 0)}};
    ComplexMatrix i2 = ComplexMatrix::identity(2);
    CHECK(gbdt::difference_norm(i2 * m, m) == 0.0);

    ComplexMatrix shift{{0, 1}, {0, 0}};
    CHECK((shift * shift).frobenius_norm() == 0.0);
}

TEST_CASE("product: associativity to 1e-12") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        ComplexMatrix a = random_matrix(rng, 3, 3);
        ComplexMatrix b = random_matrix(rng, 3, 3);
        ComplexMatrix c = random_matrix(rng, 3, 3);
        const double err = gbdt::difference_norm((a * b) * c, a * (b * c));
        CHECK(err <= 1e-12 * gbdt::relative_scale(a * b * c));
    }
}

TEST_CASE("product: dimension mismatch names both shapes") {
    ComplexMatrix a(2, 3), b(2, 2);
    try {
        ComplexMatrix c = a * b;
        FAIL("expected DimensionError");
    } catch (const gbdt::DimensionError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2x3") != std::string::npos);
        CHECK(msg.find("2x2") != std::string::npos);
    }
}

TEST_CASE("inverse: diagonal and Jordan block") {
    ComplexMatrix d = ComplexMatrix::diagonal({Complex(2), Complex(-1)});
    auto [dinv, cond] = gbdt::inverse(d);
    CHECK(std::abs(dinv(0, 0) - Complex(0.5)) < 1e-15);
    CHECK(std::abs(dinv(1, 1) - Complex(-1.0)) < 1e-15);
    CHECK(cond > 0.0);

    ComplexMatrix j{{3, 1}, {0, 3}};
    auto [jinv, jcond] = gbdt::inverse(j);
    CHECK(std::abs(jinv(0, 0) - Complex(1.0 / 3.0)) < 1e-14);
    CHECK(std::abs(jinv(0, 1) - Complex(-1.0 / 9.0)) < 1e-14);
    CHECK(std::abs(jinv(1, 0)) < 1e-15);
    CHECK(gbdt::difference_norm(j * jinv, ComplexMatrix::identity(2)) <=
          1e-10 * gbdt::relative_scale(j));
}

TEST_CASE("inverse: zero matrix is singular") {
    ComplexMatrix z(3, 3);
    CHECK_THROWS_AS(gbdt::inverse(z), gbdt::SingularError);
}

TEST_CASE("inverse of inverse returns the original") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        ComplexMatrix a = random_matrix(rng, 4, 4) + ComplexMatrix::identity(4) * 2.0;
        auto r1 = gbdt::inverse(a);
        if (r1.condition > 1e6) continue;
        auto r2 = gbdt::inverse(r1.inv);
        CHECK(gbdt::difference_norm(r2.inv, a) <= 1e-10 * gbdt::relative_scale(a));
    }
}

TEST_CASE("sylvester: homogeneous resonance-free system has X = 0") {
    ComplexMatrix a = ComplexMatrix::diagonal({Complex(0, 1), Complex(0, 2)});
    ComplexMatrix x = gbdt::solve_sylvester(a, a.adjoint(), ComplexMatrix::zero(2, 2));
    CHECK(x.frobenius_norm() <= 1e-14);
}

TEST_CASE("sylvester: reproduces the upper-triangular 2x2 recursion") {
    // Independent oracle: for A = [[a,b],[0,a]], B = A*, the solution of
    // A S - S A* = K is recovered entrywise:
    //   S22 = K22/(a-conj(a)), S21 = (K21 + conj(b) S22)/(a-conj(a)),
    //   S12 = (K12 - b S22)/(a-conj(a)),
    //   S11 = (K11 + conj(b) S12 - b S21)/(a-conj(a)).
    const Complex a(0.3, 0.8), b(-0.2, 0.4);
    ComplexMatrix A{{a, b}, {0, a}};
    ComplexMatrix K{{Complex(0, 0.5), Complex(0.1, 0.2)},
                    {Complex(-0.1, 0.2), Complex(0, -0.7)}};
    const Complex den = a - std::conj(a);
    const Complex s22 = K(1, 1) / den;
    const Complex s21 = (K(1, 0) + std::conj(b) * s22) / den;
    const Complex s12 = (K(0, 1) - b * s22) / den;
    const Complex s11 = (K(0, 0) + std::conj(b) * s12 - b * s21) / den;

    ComplexMatrix x = gbdt::solve_sylvester(A, A.adjoint(), K);
    CHECK(std::abs(x(1, 1) - s22) < 1e-12);
    CHECK(std::abs(x(1, 0) - s21) < 1e-12);
    CHECK(std::abs(x(0, 1) - s12) < 1e-12);
    CHECK(std::abs(x(0, 0) - s11) < 1e-12);
}

TEST_CASE("sylvester: random well-separated system, residual check") {
    std::mt19937_64 rng(11);
    ComplexMatrix a = random_matrix(rng, 4, 4) + ComplexMatrix::identity(4) * Complex(0, 3);
    ComplexMatrix b = random_matrix(rng, 4, 4) - ComplexMatrix::identity(4) * Complex(0, 3);
    ComplexMatrix c = random_matrix(rng, 4, 4);
    ComplexMatrix x = gbdt::solve_sylvester(a, b, c);
    const double res = gbdt::difference_norm(a * x - x * b, c);
    CHECK(res <= 1e-9 * gbdt::relative_scale(c));
}

TEST_CASE("sylvester: coincident spectra raise a resonance error") {
    ComplexMatrix a = ComplexMatrix::diagonal({Complex(1), Complex(2)});
    ComplexMatrix c{{1, 0}, {0, 1}};
    CHECK_THROWS_AS(gbdt::solve_sylvester(a, a, c), gbdt::ResonanceError);
}

TEST_CASE("matrix_exp: identity, triangular block, group inverse") {
    CHECK(gbdt::difference_norm(gbdt::matrix_exp(ComplexMatrix::zero(3, 3)),
                                ComplexMatrix::identity(3)) == 0.0);

    const Complex s(0.4, -1.1), t(2.0, 0.3);
    ComplexMatrix blk{{s, t}, {0, s}};
    ComplexMatrix expected{{std::exp(s), std::exp(s) * t}, {0, std::exp(s)}};
    CHECK(gbdt::difference_norm(gbdt::matrix_exp(blk), expected) <=
          1e-12 * gbdt::relative_scale(expected));

    std::mt19937_64 rng(3);
    ComplexMatrix a = random_matrix(rng, 3, 3) * 2.0;
    ComplexMatrix prod = gbdt::matrix_exp(a) * gbdt::matrix_exp(-a);
    CHECK(gbdt::difference_norm(prod, ComplexMatrix::identity(3)) <= 1e-10);
}

TEST_CASE("matrix_exp: adjoint compatibility") {
    std::mt19937_64 rng(5);
    ComplexMatrix a = random_matrix(rng, 3, 3);
    CHECK(gbdt::difference_norm(gbdt::matrix_exp(a).adjoint(),
                                gbdt::matrix_exp(a.adjoint())) <= 1e-12 *
          gbdt::relative_scale(gbdt::matrix_exp(a)));
}

TEST_CASE("hermitian flag") {
    ComplexMatrix h{{Complex(1, 0), Complex(0.5, 0.25)}, {Complex(0.5, -0.25), Complex(2, 0)}};
    gbdt::HermitianFlag flag{1e-10};
    CHECK(flag.passes(h));
    h(0, 1) += Complex(0, 1e-3);
    CHECK(!flag.passes(h));
}

TEST_CASE("hermitian eigenvalues: analytic 2x2 and reconstruction") {
    // [[2, i],[-i, 2]] has eigenvalues 1 and 3.
    ComplexMatrix h{{Complex(2, 0), Complex(0, 1)}, {Complex(0, -1), Complex(2, 0)}};
    auto eig = gbdt::hermitian_eigen(h);
    REQUIRE(eig.values.size() == 2);
    CHECK(std::abs(eig.values[0] - 1.0) < 1e-12);
    CHECK(std::abs(eig.values[1] - 3.0) < 1e-12);
    ComplexMatrix d = ComplexMatrix::diagonal({eig.values[0], eig.values[1]});
    CHECK(gbdt::difference_norm(eig.vectors * d * eig.vectors.adjoint(), h) <= 1e-12 * 3);

    std::mt19937_64 rng(9);
    ComplexMatrix g = random_matrix(rng, 5, 5);
    ComplexMatrix a = g + g.adjoint();
    auto e2 = gbdt::hermitian_eigen(a);
    ComplexMatrix d2(5, 5);
    for (int i = 0; i < 5; ++i) d2(i, i) = e2.values[i];
    CHECK(gbdt::difference_norm(e2.vectors * d2 * e2.vectors.adjoint(), a) <=
          1e-11 * gbdt::relative_scale(a));
    double tr = 0;
    for (double v : e2.values) tr += v;
    CHECK(std::abs(tr - a.trace().real()) < 1e-11 * gbdt::relative_scale(a));
}

TEST_CASE("hermitian sqrt squares back") {
    std::mt19937_64 rng(13);
    ComplexMatrix g = random_matrix(rng, 4, 4);
    ComplexMatrix psd = g * g.adjoint();
    ComplexMatrix r = gbdt::hermitian_sqrt(psd);
    CHECK(gbdt::difference_norm(r * r, psd) <= 1e-10 * gbdt::relative_scale(psd));
}

TEST_CASE("non-finite entries are rejected on construction") {
    CHECK_THROWS_AS(ComplexMatrix({{Complex(std::nan(""), 0)}}), gbdt::Error);
}

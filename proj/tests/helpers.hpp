#pragma once

// Shared test configurations: the literal unit-slope background of the
// worked closed-form family, its shifted regular variant, and triples built
// so that the identity holds at the flow's own A(0,0).

#include "gbdt/background.hpp"
#include "gbdt/explicit_solutions.hpp"
#include "gbdt/flow.hpp"
#include "gbdt/triple.hpp"

namespace testcfg {

using namespace gbdt;

/// f = -xi, h = eta (alpha = eta - xi vanishes on the diagonal).
inline Background mikhailov_bg(std::size_t p = 1) {
    return Background::exp_diag(RealPolynomial::affine(0.0, -1.0),
                                RealPolynomial::affine(0.0, 1.0), p);
}

/// f = 1/2 - xi, h = 1/2 + eta (alpha = 1 + eta - xi > 0 on [-0.3,0.3]^2).
inline Background shifted_bg(std::size_t p = 1) {
    return Background::exp_diag(RealPolynomial::affine(0.5, -1.0),
                                RealPolynomial::affine(0.5, 1.0), p);
}

/// Triple for the 2x2 Jordan-block family anchored at the closed-form
/// A(0,0): Pi0 is the closed-form Pi at the origin and S0 solves the
/// identity there (requires non-real c).
inline Triple jordan2_triple(Complex c, const Background& bg, const ComplexMatrix& jmat,
                             const ComplexMatrix& param) {
    JordanSpec spec = JordanSpec::single_block(c, 2);
    const ComplexMatrix a0 = explicit_A(0.0, 0.0, spec, bg);
    const ComplexMatrix pi0 = explicit_pi_jordan2({0.0, 0.0}, c, param, jmat.rows() / 2, bg);
    const ComplexMatrix s0 = solve_S_identity(a0, pi0, jmat);
    return Triple(spec, s0, pi0, jmat);
}

inline ComplexMatrix default_param() {
    return ComplexMatrix{{Complex(1.0, 0.0), Complex(0.3, 0.2)},
                         {Complex(-0.1, 0.4), Complex(0.8, 0.0)}};
}

/// Parameter kept close to the identity so the transformed fields stay
/// moderate in size over the test domain.
inline ComplexMatrix tame_param() {
    return ComplexMatrix{{Complex(1.0, 0.0), Complex(0.1, 0.05)},
                         {Complex(-0.05, 0.1), Complex(1.0, 0.0)}};
}

/// The regular sigma-model configuration used across tests and acceptance:
/// shifted background, c = 1.5 + 2i, off-diagonal J.
struct SigmaConfig {
    Background bg = shifted_bg();
    Complex c = Complex(1.5, 2.0);
    ComplexMatrix jmat = make_j_matrix(JKind::OffDiagonal, 1);
    ComplexMatrix param = tame_param();
    Triple triple = jordan2_triple(c, bg, jmat, param);
};

/// Real triple for the gravitational corollary: c = 6, J = sigma_2,
/// S0 = I and Pi0 = [[1,0],[0,b0]] with b0 the off-diagonal entry of
/// A(0,0), so that A0 S0 - S0 A0^T = det(Pi0) (iJ) holds exactly.
struct GravConfig {
    Background bg = shifted_bg();
    Complex c = Complex(6.0, 0.0);
    ComplexMatrix jmat = make_j_matrix(JKind::Pauli2, 1);
    JordanSpec spec = JordanSpec::single_block(c, 2);
    ComplexMatrix a0 = explicit_A(0.0, 0.0, spec, bg);
    ComplexMatrix s0 = ComplexMatrix::identity(2);
    ComplexMatrix pi0 = ComplexMatrix{{1.0, 0.0}, {0.0, a0(0, 1)}};
    Triple triple = Triple(spec, s0, pi0, jmat);
};

}  // namespace testcfg

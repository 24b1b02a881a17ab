#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gbdt/errors.hpp"
#include "gbdt/matrix.hpp"

namespace gbdt {

struct JordanBlock {
    Complex eigenvalue;
    std::size_t size = 1;
};

/// A matrix given as E * blockdiag(Jordan blocks) * E^-1. Jordan data is
/// input, never computed: the similarity and the block list are the caller's
/// statement about the matrix.
class JordanSpec {
public:
    JordanSpec(std::vector<JordanBlock> blocks, ComplexMatrix similarity,
               double condition_limit = 1e8)
        : blocks_(std::move(blocks)), e_(std::move(similarity)) {
        std::vector<std::string> issues;
        n_ = 0;
        for (const auto& b : blocks_) {
            if (b.size == 0) issues.push_back("Jordan block of size zero");
            n_ += b.size;
        }
        if (blocks_.empty()) issues.push_back("empty Jordan block list");
        if (!e_.square() || e_.rows() != n_)
            issues.push_back("similarity matrix " + e_.shape_string() +
                             " does not match total size " + std::to_string(n_));
        if (!issues.empty()) throw ValidationError(std::move(issues));
        InverseResult inv = inverse(e_, "Jordan similarity");
        if (inv.condition > condition_limit)
            throw SingularError("Jordan similarity matrix too ill-conditioned", inv.condition);
        e_inv_ = std::move(inv.inv);
    }

    /// Blocks with E = I.
    explicit JordanSpec(const std::vector<JordanBlock>& blocks)
        : JordanSpec(blocks, sized_identity(blocks)) {}

    static JordanSpec single_block(Complex eigenvalue, std::size_t size) {
        return JordanSpec({JordanBlock{eigenvalue, size}});
    }

    static JordanSpec diagonal(const std::vector<Complex>& eigenvalues) {
        std::vector<JordanBlock> blocks;
        blocks.reserve(eigenvalues.size());
        for (Complex ev : eigenvalues) blocks.push_back({ev, 1});
        return JordanSpec(std::move(blocks));
    }

    std::size_t size() const { return n_; }
    const std::vector<JordanBlock>& blocks() const { return blocks_; }
    const ComplexMatrix& similarity() const { return e_; }
    const ComplexMatrix& similarity_inverse() const { return e_inv_; }

    std::vector<Complex> eigenvalues() const {
        std::vector<Complex> evs;
        evs.reserve(blocks_.size());
        for (const auto& b : blocks_) evs.push_back(b.eigenvalue);
        return evs;
    }

    double spectral_radius() const {
        double r = 0.0;
        for (const auto& b : blocks_) r = std::max(r, std::abs(b.eigenvalue));
        return r;
    }

    double distance_to_spectrum(Complex z) const {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& b : blocks_) d = std::min(d, std::abs(z - b.eigenvalue));
        return d;
    }

    ComplexMatrix jordan_matrix() const {
        ComplexMatrix j(n_, n_);
        std::size_t off = 0;
        for (const auto& b : blocks_) {
            for (std::size_t i = 0; i < b.size; ++i) {
                j(off + i, off + i) = b.eigenvalue;
                if (i + 1 < b.size) j(off + i, off + i + 1) = 1.0;
            }
            off += b.size;
        }
        return j;
    }

    ComplexMatrix reconstruct() const { return e_ * jordan_matrix() * e_inv_; }

private:
    static ComplexMatrix sized_identity(const std::vector<JordanBlock>& blocks) {
        std::size_t n = 0;
        for (const auto& b : blocks) n += b.size;
        return ComplexMatrix::identity(n);
    }

    std::vector<JordanBlock> blocks_;
    ComplexMatrix e_, e_inv_;
    std::size_t n_ = 0;
};

/// Per-block sign applied to the principal square root (cut on the negative
/// real axis). Defaults to +1 everywhere.
class BranchChoice {
public:
    BranchChoice() = default;
    explicit BranchChoice(std::vector<int> signs) : signs_(std::move(signs)) {
        for (int s : signs_)
            if (s != 1 && s != -1)
                throw ValidationError({"branch signs must be +1 or -1"});
    }

    static BranchChoice principal() { return BranchChoice(); }

    int sign(std::size_t block_index) const {
        if (block_index < signs_.size()) return signs_[block_index];
        return 1;
    }

    const std::vector<int>& signs() const { return signs_; }

private:
    std::vector<int> signs_;
};

/// Principal square root with proximity guards: rejects arguments at the
/// origin and flags points sitting on the negative-real cut.
inline Complex guarded_sqrt(Complex w, double tol, const char* what) {
    const double scale = std::max(1.0, std::abs(w));
    if (std::abs(w) <= tol * scale || std::abs(w) == 0.0)
        throw BranchCutError(std::string(what) + ": argument vanishes (square root branch point)");
    if (w.real() < 0.0 && std::abs(w.imag()) <= tol * scale)
        throw BranchCutError(std::string(what) + ": argument on the negative-real branch cut");
    return std::sqrt(w);
}

/// Toeplitz coefficients c_0..c_{n-1} of the upper-triangular square root of
/// the shifted Jordan block (lambda - mu) I + S_1:
///   c_0 = +-sqrt(lambda - mu), c_1 = 1/(2 c_0),
///   c_i = -(c_1 c_{i-1} + ... + c_{i-1} c_1) / (2 c_0)   (i >= 2),
/// forcing every coefficient of S_i (i >= 2) in the square to zero.
inline std::vector<Complex> toeplitz_block_sqrt(Complex lambda, Complex mu, std::size_t n,
                                                int branch_sign = 1, double tol = 1e-12) {
    if (n == 0) throw ValidationError({"Toeplitz square root of empty block"});
    const Complex w = lambda - mu;
    if (std::abs(w) <= tol * std::max(1.0, std::max(std::abs(lambda), std::abs(mu))))
        throw BranchCutError("toeplitz_block_sqrt: eigenvalue on shift locus (lambda = mu)");
    std::vector<Complex> c(n);
    c[0] = double(branch_sign) * guarded_sqrt(w, tol, "toeplitz_block_sqrt");
    if (n > 1) c[1] = 1.0 / (2.0 * c[0]);
    for (std::size_t i = 2; i < n; ++i) {
        Complex acc = 0.0;
        for (std::size_t j = 1; j < i; ++j) acc += c[j] * c[i - j];
        c[i] = -acc / (2.0 * c[0]);
    }
    return c;
}

inline ComplexMatrix upper_toeplitz(const std::vector<Complex>& c) {
    const std::size_t n = c.size();
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m(i, j) = c[j - i];
    return m;
}

/// R(mu) = E D(mu) E^-1 with R(mu)^2 = A - mu I. D is block diagonal with
/// upper-triangular Toeplitz blocks, one per Jordan block, so roots at
/// different shifts commute.
inline ComplexMatrix shifted_sqrt(const JordanSpec& spec, Complex mu,
                                  const BranchChoice& branch = BranchChoice::principal(),
                                  double tol = 1e-12) {
    const std::size_t n = spec.size();
    ComplexMatrix d(n, n);
    std::size_t off = 0, index = 0;
    for (const auto& b : spec.blocks()) {
        std::vector<Complex> c =
            toeplitz_block_sqrt(b.eigenvalue, mu, b.size, branch.sign(index), tol);
        d.set_block(off, off, upper_toeplitz(c));
        off += b.size;
        ++index;
    }
    return spec.similarity() * d * spec.similarity_inverse();
}

}  // namespace gbdt

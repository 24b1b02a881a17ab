#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gbdt/errors.hpp"

namespace gbdt {

using Complex = std::complex<double>;

/// Dense complex matrix, row-major. Sized for the n <= 32 envelope this
/// library works in; no attempt at cache blocking or sparsity.
class ComplexMatrix {
public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_)
            throw DimensionError("entry count " + std::to_string(data_.size()) +
                                 " does not match shape " + shape_string());
        require_finite();
    }

    /// Row-wise brace construction: ComplexMatrix{{a,b},{c,d}}.
    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw DimensionError("ragged row in matrix literal");
            data_.insert(data_.end(), r.begin(), r.end());
        }
        require_finite();
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix zero(std::size_t rows, std::size_t cols) {
        return ComplexMatrix(rows, cols);
    }

    static ComplexMatrix diagonal(const std::vector<Complex>& d) {
        ComplexMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<Complex>& entries() const { return data_; }

    std::string shape_string() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_shape(o, "+");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }

    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_shape(o, "-");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }

    ComplexMatrix& operator*=(Complex s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
    friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(ComplexMatrix a, double s) { return a *= Complex(s); }
    friend ComplexMatrix operator*(double s, ComplexMatrix a) { return a *= Complex(s); }
    friend ComplexMatrix operator-(ComplexMatrix a) { return a *= Complex(-1.0); }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_)
            throw DimensionError("product shape mismatch: " + a.shape_string() +
                                 " * " + b.shape_string());
        ComplexMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Complex aik = a(i, k);
                if (aik == Complex(0.0)) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        }
        return c;
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    ComplexMatrix transpose() const {
        ComplexMatrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
        return m;
    }

    ComplexMatrix conjugate() const {
        ComplexMatrix m(rows_, cols_);
        for (std::size_t k = 0; k < data_.size(); ++k) m.data_[k] = std::conj(data_[k]);
        return m;
    }

    ComplexMatrix real_part() const {
        ComplexMatrix m(rows_, cols_);
        for (std::size_t k = 0; k < data_.size(); ++k) m.data_[k] = data_[k].real();
        return m;
    }

    double max_imag_abs() const {
        double r = 0.0;
        for (const auto& v : data_) r = std::max(r, std::abs(v.imag()));
        return r;
    }

    Complex trace() const {
        Complex t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    double max_abs() const {
        double r = 0.0;
        for (const auto& v : data_) r = std::max(r, std::abs(v));
        return r;
    }

    bool is_finite() const {
        for (const auto& v : data_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    ComplexMatrix block(std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) const {
        ComplexMatrix m(h, w);
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j) m(i, j) = (*this)(r0 + i, c0 + j);
        return m;
    }

    void set_block(std::size_t r0, std::size_t c0, const ComplexMatrix& m) {
        for (std::size_t i = 0; i < m.rows_; ++i)
            for (std::size_t j = 0; j < m.cols_; ++j) (*this)(r0 + i, c0 + j) = m(i, j);
    }

private:
    void require_same_shape(const ComplexMatrix& o, const char* op) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DimensionError(std::string("shape mismatch for '") + op + "': " +
                                 shape_string() + " vs " + o.shape_string());
    }

    void require_finite() const {
        if (!is_finite()) throw Error("non-finite entry in matrix construction");
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Complex> data_;
};

inline double relative_scale(const ComplexMatrix& m) {
    return std::max(1.0, m.frobenius_norm());
}

/// ||a - b||_F; shapes must agree.
inline double difference_norm(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a - b).frobenius_norm();
}

/// Hermitian deviation test relative to max(1, ||M||_F).
struct HermitianFlag {
    double tolerance = 1e-10;
    bool passes(const ComplexMatrix& m) const { return deviation(m) <= tolerance; }
    double deviation(const ComplexMatrix& m) const {
        return difference_norm(m, m.adjoint()) / relative_scale(m);
    }
};

/// LU factorization with partial pivoting. Singularity is decided from the
/// pivot sequence; the pivot ratio doubles as the condition proxy carried by
/// SingularError when no inverse exists.
class LuDecomposition {
public:
    explicit LuDecomposition(ComplexMatrix a) : lu_(std::move(a)) {
        if (!lu_.square())
            throw DimensionError("LU requires a square matrix, got " + lu_.shape_string());
        const std::size_t n = lu_.rows();
        perm_.resize(n);
        for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
        max_pivot_ = 0.0;
        min_pivot_ = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t piv = k;
            double best = std::abs(lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                const double v = std::abs(lu_(i, k));
                if (v > best) { best = v; piv = i; }
            }
            if (piv != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
                std::swap(perm_[k], perm_[piv]);
                sign_ = -sign_;
            }
            max_pivot_ = std::max(max_pivot_, best);
            min_pivot_ = std::min(min_pivot_, best);
            if (best == 0.0) continue;  // exactly singular; keep factoring the rest
            const Complex inv_piv = 1.0 / lu_(k, k);
            for (std::size_t i = k + 1; i < n; ++i) {
                const Complex f = lu_(i, k) * inv_piv;
                lu_(i, k) = f;
                if (f == Complex(0.0)) continue;
                for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
            }
        }
    }

    std::size_t size() const { return lu_.rows(); }

    bool singular(double rel_tol = 1e-13) const {
        return max_pivot_ == 0.0 || min_pivot_ <= rel_tol * double(size()) * max_pivot_;
    }

    /// max|pivot| / min|pivot| (infinite for an exactly singular factor).
    double pivot_ratio() const {
        if (min_pivot_ == 0.0) return std::numeric_limits<double>::infinity();
        return max_pivot_ / min_pivot_;
    }

    Complex determinant() const {
        Complex d = sign_;
        for (std::size_t i = 0; i < size(); ++i) d *= lu_(i, i);
        return d;
    }

    ComplexMatrix solve(const ComplexMatrix& b, const char* what = "linear solve") const {
        if (b.rows() != size())
            throw DimensionError("solve shape mismatch: " + lu_.shape_string() +
                                 " \\ " + b.shape_string());
        if (singular())
            throw SingularError(std::string(what) + ": matrix singular to tolerance",
                                pivot_ratio());
        const std::size_t n = size(), m = b.cols();
        ComplexMatrix x(n, m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) x(i, j) = b(perm_[i], j);
        // forward substitution (unit lower)
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t k = 0; k < i; ++k) {
                const Complex f = lu_(i, k);
                if (f == Complex(0.0)) continue;
                for (std::size_t j = 0; j < m; ++j) x(i, j) -= f * x(k, j);
            }
        // back substitution
        for (std::size_t ii = n; ii-- > 0;) {
            const Complex inv_piv = 1.0 / lu_(ii, ii);
            for (std::size_t j = 0; j < m; ++j) x(ii, j) *= inv_piv;
            for (std::size_t k = 0; k < ii; ++k) {
                const Complex f = lu_(k, ii);
                if (f == Complex(0.0)) continue;
                for (std::size_t j = 0; j < m; ++j) x(k, j) -= f * x(ii, j);
            }
        }
        return x;
    }

    ComplexMatrix inverse(const char* what = "inverse") const {
        return solve(ComplexMatrix::identity(size()), what);
    }

private:
    ComplexMatrix lu_;
    std::vector<std::size_t> perm_;
    int sign_ = 1;
    double max_pivot_ = 0.0, min_pivot_ = 0.0;
};

struct InverseResult {
    ComplexMatrix inv;
    double condition;  // ||A||_F * ||A^-1||_F
};

/// Inverse with a condition estimate. Throws SingularError (carrying the
/// pivot-ratio estimate) when singular to tolerance.
inline InverseResult inverse(const ComplexMatrix& a, const char* what = "inverse") {
    LuDecomposition lu(a);
    ComplexMatrix inv = lu.inverse(what);
    const double cond = a.frobenius_norm() * inv.frobenius_norm();
    return {std::move(inv), cond};
}

inline ComplexMatrix solve(const ComplexMatrix& a, const ComplexMatrix& b,
                           const char* what = "linear solve") {
    return LuDecomposition(a).solve(b, what);
}

inline Complex determinant(const ComplexMatrix& a) {
    return LuDecomposition(a).determinant();
}

/// Solves A X - X B = C through the Kronecker system
/// (I (x) A - B^T (x) I) vec(X) = vec(C) with partial-pivot elimination.
/// Near-coincident spectra of A and B surface as an ill-conditioned Kronecker
/// factor and raise ResonanceError.
inline ComplexMatrix solve_sylvester(const ComplexMatrix& a, const ComplexMatrix& b,
                                     const ComplexMatrix& c,
                                     double residual_tol = 1e-9,
                                     double pivot_ratio_limit = 1e12) {
    if (!a.square() || !b.square())
        throw DimensionError("sylvester operands must be square: " + a.shape_string() +
                             ", " + b.shape_string());
    const std::size_t n = a.rows(), m = b.rows();
    if (c.rows() != n || c.cols() != m)
        throw DimensionError("sylvester right-hand side " + c.shape_string() +
                             " does not match " + std::to_string(n) + "x" + std::to_string(m));

    ComplexMatrix big(n * m, n * m);
    // vec is column-stacked: index(i,j) = i + j*n.
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t row = i + j * n;
            for (std::size_t k = 0; k < n; ++k) big(row, k + j * n) += a(i, k);
            for (std::size_t l = 0; l < m; ++l) big(row, i + l * n) -= b(l, j);
        }
    ComplexMatrix rhs(n * m, 1);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i) rhs(i + j * n, 0) = c(i, j);

    LuDecomposition lu(std::move(big));
    if (lu.singular() || lu.pivot_ratio() > pivot_ratio_limit)
        throw ResonanceError("resonant Sylvester: spectra of the operands (nearly) intersect"
                             " (Kronecker pivot ratio " + std::to_string(lu.pivot_ratio()) + ")");
    ComplexMatrix vec;
    try {
        vec = lu.solve(rhs, "sylvester");
    } catch (const SingularError& e) {
        throw ResonanceError(std::string("resonant Sylvester: ") + e.what());
    }
    ComplexMatrix x(n, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i) x(i, j) = vec(i + j * n, 0);

    const double res = difference_norm(a * x - x * b, c) / relative_scale(c);
    if (res > residual_tol)
        throw ResonanceError("resonant Sylvester: back-substituted residual " +
                             std::to_string(res) + " exceeds tolerance");
    return x;
}

/// Scaling-and-squaring matrix exponential (Taylor on the scaled matrix).
inline ComplexMatrix matrix_exp(const ComplexMatrix& a) {
    if (!a.square())
        throw DimensionError("matrix exponential requires a square matrix, got " +
                             a.shape_string());
    const double norm = a.frobenius_norm();
    int s = 0;
    if (norm > 1.0 / 16.0) s = int(std::ceil(std::log2(norm * 16.0)));
    const double scale = std::ldexp(1.0, -s);
    ComplexMatrix x = a * scale;
    ComplexMatrix sum = ComplexMatrix::identity(a.rows());
    ComplexMatrix term = ComplexMatrix::identity(a.rows());
    for (int k = 1; k <= 20; ++k) {
        term = term * x * (1.0 / k);
        sum += term;
        if (term.frobenius_norm() <= 1e-18 * relative_scale(sum)) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix by cyclic
/// complex Jacobi sweeps. A is symmetrized internally to suppress roundoff
/// drift in the input; inputs must pass a Hermitian check upstream.
struct HermitianEigen {
    std::vector<double> values;  // ascending
    ComplexMatrix vectors;       // columns; A = V diag(values) V*
};

inline HermitianEigen hermitian_eigen(const ComplexMatrix& a_in) {
    if (!a_in.square())
        throw DimensionError("hermitian eigensolver requires a square matrix, got " +
                             a_in.shape_string());
    const std::size_t n = a_in.rows();
    ComplexMatrix a = (a_in + a_in.adjoint()) * 0.5;
    ComplexMatrix v = ComplexMatrix::identity(n);
    const double scale = std::max(a.frobenius_norm(), 1e-300);

    auto offdiag = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += std::norm(a(i, j));
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 60 && offdiag() > 1e-15 * scale; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-18 * scale) continue;
                const Complex phase = apq / mag;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * mag);
                const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                              : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double co = 1.0 / std::sqrt(1.0 + t * t);
                const double si = t * co;
                // Unitary on the (p,q) plane: U(p,p)=c, U(p,q)=s,
                // U(q,p)=-conj(phase)s, U(q,q)=conj(phase)c.  A <- U* A U.
                const Complex upq = si;
                const Complex uqp = -std::conj(phase) * si;
                const Complex uqq = std::conj(phase) * co;
                for (std::size_t i = 0; i < n; ++i) {  // columns: A <- A U
                    const Complex aip = a(i, p), aiq = a(i, q);
                    a(i, p) = aip * co + aiq * uqp;
                    a(i, q) = aip * upq + aiq * uqq;
                }
                for (std::size_t j = 0; j < n; ++j) {  // rows: A <- U* A
                    const Complex apj = a(p, j), aqj = a(q, j);
                    a(p, j) = co * apj + std::conj(uqp) * aqj;
                    a(q, j) = std::conj(upq) * apj + std::conj(uqq) * aqj;
                }
                for (std::size_t i = 0; i < n; ++i) {  // accumulate V <- V U
                    const Complex vip = v(i, p), viq = v(i, q);
                    v(i, p) = vip * co + viq * uqp;
                    v(i, q) = vip * upq + viq * uqq;
                }
            }
        }
    }

    HermitianEigen out;
    out.values.resize(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return a(i, i).real() < a(j, j).real();
    });
    out.vectors = ComplexMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& a) {
    return hermitian_eigen(a).values;
}

/// Positive-semidefinite square root. Eigenvalues below -floor_tol*scale are
/// rejected; small negative noise is clamped to zero.
inline ComplexMatrix hermitian_sqrt(const ComplexMatrix& a, double floor_tol = 1e-10) {
    HermitianEigen eig = hermitian_eigen(a);
    const double scale = relative_scale(a);
    ComplexMatrix d(a.rows(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double lam = eig.values[i];
        if (lam < -floor_tol * scale)
            throw Error("hermitian_sqrt: matrix is not positive semidefinite (eigenvalue " +
                        std::to_string(lam) + ")");
        d(i, i) = std::sqrt(std::max(lam, 0.0));
    }
    return eig.vectors * d * eig.vectors.adjoint();
}

}  // namespace gbdt

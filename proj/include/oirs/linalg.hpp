#pragma once
// Small dense real matrices: exactly the constructions the estimation
// equations need (products, transpose, Hadamard, Kronecker, vec, block
// diagonal of columns, SPD solves). Storage is row-major.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace oirs {

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    /// Row-major nested initializer: Matrix{{1, 2}, {3, 4}}.
    Matrix(std::initializer_list<std::initializer_list<double>> init)
    {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_)
                throw DimensionError("Matrix: ragged initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    static Matrix column(const std::vector<double>& v)
    {
        Matrix m(v.size(), 1);
        m.data_ = v;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Matrix col(std::size_t c) const
    {
        Matrix out(rows_, 1);
        for (std::size_t r = 0; r < rows_; ++r)
            out(r, 0) = (*this)(r, c);
        return out;
    }

    Matrix operator+(const Matrix& o) const { return zip(o, [](double a, double b) { return a + b; }); }
    Matrix operator-(const Matrix& o) const { return zip(o, [](double a, double b) { return a - b; }); }
    Matrix operator*(double s) const
    {
        Matrix out = *this;
        for (double& v : out.data_)
            v *= s;
        return out;
    }

    bool operator==(const Matrix&) const = default;

    bool all_finite() const
    {
        for (double v : data_)
            if (!std::isfinite(v))
                return false;
        return true;
    }

private:
    template <class Op>
    Matrix zip(const Matrix& o, Op op) const
    {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DimensionError("elementwise op: shape mismatch");
        Matrix out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i)
            out.data_[i] = op(data_[i], o.data_[i]);
        return out;
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.rows())
        throw DimensionError("matmul: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0)
                continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) += aik * b(k, j);
        }
    return out;
}

inline Matrix transpose(const Matrix& a)
{
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out(j, i) = a(i, j);
    return out;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("hadamard: shape mismatch");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out(i, j) = a(i, j) * b(i, j);
    return out;
}

inline Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return out;
}

/// Stacks the columns of `a` into one column.
inline Matrix vec(const Matrix& a)
{
    Matrix out(a.size(), 1);
    std::size_t k = 0;
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i)
            out(k++, 0) = a(i, j);
    return out;
}

/// Inverse of vec for a rows x cols matrix.
inline Matrix unvec(const Matrix& v, std::size_t rows, std::size_t cols)
{
    if (v.cols() != 1 || v.rows() != rows * cols)
        throw DimensionError("unvec: size mismatch");
    Matrix out(rows, cols);
    std::size_t k = 0;
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i)
            out(i, j) = v(k++, 0);
    return out;
}

/// (N*K) x K block-diagonal matrix whose k-th diagonal block is column k of `a`.
inline Matrix blkdiag_columns(const Matrix& a)
{
    const std::size_t n = a.rows();
    const std::size_t k = a.cols();
    Matrix out(n * k, k);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t r = 0; r < n; ++r)
            out(c * n + r, c) = a(r, c);
    return out;
}

inline double frobenius_norm(const Matrix& a)
{
    double s = 0.0;
    for (double v : a.data())
        s += v * v;
    return std::sqrt(s);
}

namespace detail {

inline Eigen::MatrixXd to_eigen(const Matrix& a)
{
    Eigen::MatrixXd m(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
    return m;
}

inline Matrix from_eigen(const Eigen::MatrixXd& m)
{
    Matrix a(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
    return a;
}

} // namespace detail

/**
 * @brief Solves A X = B for symmetric positive definite A (Cholesky).
 *
 * Throws NumericError when the factorization fails, i.e. A is not SPD.
 */
inline Matrix solve_spd(const Matrix& a, const Matrix& b)
{
    if (a.rows() != a.cols())
        throw DimensionError("solve_spd: A must be square");
    if (b.rows() != a.rows())
        throw DimensionError("solve_spd: B row count must match A");
    const Eigen::LLT<Eigen::MatrixXd> llt(detail::to_eigen(a));
    if (llt.info() != Eigen::Success)
        throw NumericError("solve_spd: matrix is not positive definite");
    return detail::from_eigen(llt.solve(detail::to_eigen(b)));
}

/// Numerical rank with relative threshold `rel_tol` on the pivots of a rank-revealing QR.
inline std::size_t numerical_rank(const Matrix& a, double rel_tol = 1e-10)
{
    if (a.size() == 0)
        return 0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(detail::to_eigen(a));
    qr.setThreshold(rel_tol);
    return static_cast<std::size_t>(qr.rank());
}

} // namespace oirs

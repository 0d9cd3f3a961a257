#pragma once

// Minimal dense/sparse linear algebra with a pinned accumulation order.
//
// Everything on the encrypt/decrypt path runs through these routines:
// plain row-major dot-product loops, no reassociation, no FMA contraction
// (disabled project-wide). Rebuilding the project must reproduce existing
// ciphertexts bit for bit.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace esncrypt {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Compressed sparse row matrix.
struct CsrMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<std::size_t> row_start;   // rows + 1 entries
    std::vector<std::uint32_t> col;
    std::vector<double> value;

    /// y = A x; rows traversed in order, entries within a row in order.
    void multiply(std::span<const double> x, std::span<double> y) const;

    std::size_t nonzeros() const { return value.size(); }
    void scale(double s);
    Matrix to_dense() const;

    /// Builds from a dense row-major buffer, keeping exact nonzeros.
    static CsrMatrix from_dense(std::size_t rows, std::size_t cols,
                                std::span<const double> data);
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

/// In-place Cholesky factorization of a symmetric positive-definite matrix;
/// only the lower triangle is referenced and written. Returns false on a
/// non-positive pivot.
bool cholesky_factor(Matrix& a);

/// Solves L L^T x = b with the factor produced by cholesky_factor,
/// overwriting b with x. A zero right-hand side yields an exactly zero
/// solution.
void cholesky_solve_in_place(const Matrix& l, std::span<double> b);

/// Four independent right-hand sides in one pass over the factor. Each
/// solution is bit-identical to cholesky_solve_in_place on that side.
void cholesky_solve_rows4(const Matrix& l, std::span<double> b0, std::span<double> b1,
                          std::span<double> b2, std::span<double> b3);

}  // namespace esncrypt

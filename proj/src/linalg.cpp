#include "esncrypt/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace esncrypt {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        const std::size_t end = row_start[r + 1];
        for (std::size_t k = row_start[r]; k < end; ++k) {
            acc += value[k] * x[col[k]];
        }
        y[r] = acc;
    }
}

void CsrMatrix::scale(double s) {
    for (double& v : value) v *= s;
}

Matrix CsrMatrix::to_dense() const {
    Matrix d(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = row_start[r]; k < row_start[r + 1]; ++k) {
            d(r, col[k]) = value[k];
        }
    }
    return d;
}

CsrMatrix CsrMatrix::from_dense(std::size_t rows, std::size_t cols,
                                std::span<const double> data) {
    if (data.size() != rows * cols) throw std::invalid_argument("dense buffer size mismatch");
    CsrMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_start.resize(rows + 1, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = data[r * cols + c];
            if (v != 0.0) {
                m.col.push_back(static_cast<std::uint32_t>(c));
                m.value.push_back(v);
            }
        }
        m.row_start[r + 1] = m.value.size();
    }
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

bool cholesky_factor(Matrix& a) {
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
        const double diag = a(j, j);
        double d = diag;
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        // A pivot this far below the original diagonal is cancellation
        // noise: the matrix is singular to working precision.
        if (!(d > diag * 1e-13) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / ljj;
        }
    }
    return true;
}

void cholesky_solve_in_place(const Matrix& l, std::span<double> b) {
    const std::size_t n = l.rows();
    // Forward: L z = b
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
        b[i] = s / l(i, i);
    }
    // Backward: L^T x = z
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * b[k];
        b[ii] = s / l(ii, ii);
    }
}

void cholesky_solve_rows4(const Matrix& l, std::span<double> b0, std::span<double> b1,
                          std::span<double> b2, std::span<double> b3) {
    const std::size_t n = l.rows();
    double* p0 = b0.data();
    double* p1 = b1.data();
    double* p2 = b2.data();
    double* p3 = b3.data();
    // Same per-side operation sequence as the single solve; the four
    // accumulator chains are independent.
    for (std::size_t i = 0; i < n; ++i) {
        double s0 = p0[i], s1 = p1[i], s2 = p2[i], s3 = p3[i];
        const std::span<const double> lrow = l.row(i);
        for (std::size_t k = 0; k < i; ++k) {
            const double lv = lrow[k];
            s0 -= lv * p0[k];
            s1 -= lv * p1[k];
            s2 -= lv * p2[k];
            s3 -= lv * p3[k];
        }
        const double d = l(i, i);
        p0[i] = s0 / d;
        p1[i] = s1 / d;
        p2[i] = s2 / d;
        p3[i] = s3 / d;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s0 = p0[ii], s1 = p1[ii], s2 = p2[ii], s3 = p3[ii];
        for (std::size_t k = ii + 1; k < n; ++k) {
            const double lv = l(k, ii);
            s0 -= lv * p0[k];
            s1 -= lv * p1[k];
            s2 -= lv * p2[k];
            s3 -= lv * p3[k];
        }
        const double d = l(ii, ii);
        p0[ii] = s0 / d;
        p1[ii] = s1 / d;
        p2[ii] = s2 / d;
        p3[ii] = s3 / d;
    }
}

}  // namespace esncrypt

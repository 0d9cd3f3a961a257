#pragma once

// Test-only oracles, independent of the library's numerical paths: the
// ridge readout is checked against an explicit dense matrix inversion and
// spectral radii against a dense eigensolver.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "esncrypt/codec.hpp"
#include "esncrypt/esn.hpp"
#include "esncrypt/linalg.hpp"
#include "esncrypt/rng.hpp"

namespace oracles {

inline Eigen::MatrixXd csr_to_eigen(const esncrypt::CsrMatrix& m) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.rows),
                                              static_cast<Eigen::Index>(m.cols));
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t k = m.row_start[r]; k < m.row_start[r + 1]; ++k) {
            d(static_cast<Eigen::Index>(r), m.col[k]) = m.value[k];
        }
    }
    return d;
}

inline double dense_spectral_radius(const esncrypt::CsrMatrix& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(csr_to_eigen(m), false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Brute-force evaluation of W = Y R^T (R R^T + beta I)^{-1} with an
/// explicit dense inverse.
inline Eigen::MatrixXd dense_inverse_readout(const esncrypt::StateMatrix& states,
                                             std::span<const esncrypt::OneHot> targets,
                                             double beta) {
    const auto n = static_cast<Eigen::Index>(states.state_dim);
    const auto steps = static_cast<Eigen::Index>(states.steps);
    Eigen::MatrixXd r(n, steps);
    for (Eigen::Index t = 0; t < steps; ++t) {
        const auto col = states.column(static_cast<std::size_t>(t));
        for (Eigen::Index i = 0; i < n; ++i) r(i, t) = col[static_cast<std::size_t>(i)];
    }
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(256, steps);
    for (Eigen::Index t = 0; t < steps; ++t) {
        y(targets[static_cast<std::size_t>(t)].index, t) = 1.0;
    }
    const Eigen::MatrixXd gram =
        r * r.transpose() + beta * Eigen::MatrixXd::Identity(n, n);
    return y * r.transpose() * gram.inverse();
}

inline double readout_rel_error(const esncrypt::ReadoutMatrix& w, const Eigen::MatrixXd& ref) {
    double num = 0.0, den = 0.0;
    for (Eigen::Index b = 0; b < 256; ++b) {
        for (Eigen::Index j = 0; j < ref.cols(); ++j) {
            const double d = w.weights[static_cast<std::size_t>(b) * w.state_dim +
                                       static_cast<std::size_t>(j)] -
                             ref(b, j);
            num += d * d;
            den += ref(b, j) * ref(b, j);
        }
    }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

inline std::vector<double> softmax(std::span<const double> scores) {
    const double peak = *std::max_element(scores.begin(), scores.end());
    std::vector<double> out(scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - peak);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

inline esncrypt::StateMatrix random_states(std::size_t n, std::size_t steps,
                                           std::uint64_t seed) {
    esncrypt::StateMatrix s;
    s.state_dim = n;
    s.steps = steps;
    s.data.resize(n * steps);
    esncrypt::Xoshiro256 rng(seed);
    for (double& v : s.data) v = rng.uniform01();
    return s;
}

inline std::vector<esncrypt::OneHot> random_targets(std::size_t steps, std::uint64_t seed) {
    std::vector<esncrypt::OneHot> t(steps);
    esncrypt::Xoshiro256 rng(seed);
    for (auto& h : t) h.index = static_cast<std::uint8_t>(rng.below(256));
    return t;
}

inline esncrypt::CsrMatrix random_sparse(std::size_t n, double density, std::uint64_t seed) {
    esncrypt::Xoshiro256 rng(seed);
    std::vector<double> dense(n * n, 0.0);
    for (double& v : dense) {
        if (rng.bernoulli(density)) v = rng.uniform_symmetric(1.0);
    }
    return esncrypt::CsrMatrix::from_dense(n, n, dense);
}

}  // namespace oracles

#include "esncrypt/esn.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "esncrypt/errors.hpp"
#include "esncrypt/rng.hpp"

namespace esncrypt {

namespace {

void check_state_dim(const EsnKey& key, std::size_t got) {
    if (got != key.reservoir_size()) {
        throw CryptoError("corrupted key or state: state length " + std::to_string(got) +
                          " does not match reservoir size " +
                          std::to_string(key.reservoir_size()));
    }
}

double normalize(std::span<double> v) {
    const double n = norm2(v);
    if (n > 0.0) {
        for (double& x : v) x /= n;
    }
    return n;
}

double dense_spectral_radius(const CsrMatrix& m) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.rows),
                                              static_cast<Eigen::Index>(m.cols));
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t k = m.row_start[r]; k < m.row_start[r + 1]; ++k) {
            d(static_cast<Eigen::Index>(r), m.col[k]) = m.value[k];
        }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(d, false);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("dense eigensolver failed on reservoir matrix", 0.0);
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

ReservoirState zero_state(const EsnKey& key) {
    return ReservoirState(key.reservoir_size(), 0.0);
}

void update_state_into(std::span<const double> prev, OneHot input, const EsnKey& key,
                       std::span<double> out, std::span<double> scratch) {
    const std::size_t n = key.reservoir_size();
    if (prev.size() != n) check_state_dim(key, prev.size());
    key.reservoir_weights.multiply(prev, scratch);
    const std::span<const double> in_col = key.input_column(input.index);
    const double alpha = key.params.leaking_rate;
    const double keep = 1.0 - alpha;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = keep * prev[i] + alpha * logistic(scratch[i] + in_col[i]);
    }
}

ReservoirState update_state(const ReservoirState& prev, OneHot input, const EsnKey& key) {
    check_state_dim(key, prev.size());
    ReservoirState out(prev.size());
    std::vector<double> scratch(prev.size());
    update_state_into(prev, input, key, out, scratch);
    return out;
}

StateMatrix drive(const EsnKey& key, std::span<const OneHot> inputs,
                  const ReservoirState& initial) {
    if (inputs.empty()) throw std::invalid_argument("drive: empty input sequence, nothing to record");
    check_state_dim(key, initial.size());

    const std::size_t n = key.reservoir_size();
    StateMatrix states;
    states.state_dim = n;
    states.steps = inputs.size();
    states.data.resize(n * inputs.size());

    std::vector<double> scratch(n);
    std::span<const double> prev = initial;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        const std::span<double> cur = states.column(t);
        update_state_into(prev, inputs[t], key, cur, scratch);
        prev = cur;
    }
    return states;
}

ReadoutMatrix train_readout(const StateMatrix& states, std::span<const OneHot> targets,
                            double beta) {
    const std::size_t n = states.state_dim;
    const std::size_t steps = states.steps;
    if (steps == 0 || n == 0) throw std::invalid_argument("train_readout: empty state matrix");
    if (targets.size() != steps) {
        throw std::invalid_argument("train_readout: state and target widths differ");
    }
    if (!(beta >= 0.0)) throw std::invalid_argument("train_readout: beta must be non-negative");

    // Gram matrix R R^T + beta I; lower triangle accumulated in step order,
    // then mirrored.
    Matrix gram(n, n);
    for (std::size_t t = 0; t < steps; ++t) {
        const std::span<const double> r = states.column(t);
        for (std::size_t i = 0; i < n; ++i) {
            const double ri = r[i];
            const std::span<double> row = gram.row(i);
            for (std::size_t j = 0; j <= i; ++j) row[j] += ri * r[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) gram(j, i) = gram(i, j);
    }
    for (std::size_t i = 0; i < n; ++i) gram(i, i) += beta;

    // Y R^T lands directly in the readout buffer: row b sums the states at
    // steps whose target byte is b. Rows of absent byte values are never
    // touched and stay exactly zero through the solve.
    ReadoutMatrix readout;
    readout.state_dim = n;
    readout.weights.assign(kAlphabetSize * n, 0.0);
    bool present[kAlphabetSize] = {};
    for (std::size_t t = 0; t < steps; ++t) {
        const std::uint8_t b = targets[t].index;
        present[b] = true;
        const std::span<const double> r = states.column(t);
        const std::span<double> row = readout.row(b);
        for (std::size_t j = 0; j < n; ++j) row[j] += r[j];
    }

    if (!cholesky_factor(gram)) {
        throw CryptoError(
            "untrainable chunk: regularized Gram matrix is singular to working precision");
    }

    std::vector<std::uint16_t> rows;
    rows.reserve(kAlphabetSize);
    for (std::size_t b = 0; b < kAlphabetSize; ++b) {
        if (present[b]) rows.push_back(static_cast<std::uint16_t>(b));
    }
    // Solve w_b (R R^T + beta I) = c_b for every present row; the Gram
    // matrix is symmetric, so each is a plain SPD solve on the row.
    for (std::size_t k = 0; k + 4 <= rows.size(); k += 4) {
        cholesky_solve_rows4(gram, readout.row(rows[k]), readout.row(rows[k + 1]),
                             readout.row(rows[k + 2]), readout.row(rows[k + 3]));
    }
    for (std::size_t k = rows.size() - (rows.size() % 4); k < rows.size(); ++k) {
        cholesky_solve_in_place(gram, readout.row(rows[k]));
    }
    return readout;
}

std::vector<double> readout_scores(const ReadoutMatrix& w, const ReservoirState& state) {
    if (state.size() != w.state_dim) {
        throw CryptoError("readout dimension mismatch: state length " +
                          std::to_string(state.size()) + " vs readout width " +
                          std::to_string(w.state_dim));
    }
    std::vector<double> scores(kAlphabetSize, 0.0);
    for (std::size_t b = 0; b < kAlphabetSize; ++b) {
        scores[b] = dot(w.row(b), state);
    }
    return scores;
}

void readout_scores_into(const ReadoutMatrix& w, std::span<const double> state,
                         std::span<const std::uint16_t> active_rows, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t n = w.state_dim;
    const double* s = state.data();
    std::size_t k = 0;
    // Four independent accumulator chains; each row still sums its own
    // products strictly in index order, so results match the plain loop
    // bit for bit.
    for (; k + 4 <= active_rows.size(); k += 4) {
        const double* r0 = w.row(active_rows[k]).data();
        const double* r1 = w.row(active_rows[k + 1]).data();
        const double* r2 = w.row(active_rows[k + 2]).data();
        const double* r3 = w.row(active_rows[k + 3]).data();
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double sj = s[j];
            a0 += r0[j] * sj;
            a1 += r1[j] * sj;
            a2 += r2[j] * sj;
            a3 += r3[j] * sj;
        }
        out[active_rows[k]] = a0;
        out[active_rows[k + 1]] = a1;
        out[active_rows[k + 2]] = a2;
        out[active_rows[k + 3]] = a3;
    }
    for (; k < active_rows.size(); ++k) {
        out[active_rows[k]] = dot(w.row(active_rows[k]), state);
    }
}

SpectralEstimate spectral_radius_detail(const CsrMatrix& m, double tol,
                                        std::size_t max_iterations) {
    if (m.rows != m.cols) throw std::invalid_argument("spectral_radius: matrix must be square");
    if (!(tol > 0.0)) throw std::invalid_argument("spectral_radius: tolerance must be positive");
    const std::size_t n = m.rows;
    if (n == 0) throw std::invalid_argument("spectral_radius: empty matrix");
    if (m.nonzeros() == 0) return {0.0, 0, false};
    if (n == 1) return {std::abs(m.value[0]), 0, false};

    const double accept_residual = std::max(10.0 * tol, 1e-12);
    SpectralEstimate best{0.0, 0, false};
    double best_residual = std::numeric_limits<double>::infinity();

    std::size_t used = 0;
    std::uint64_t restart_counter = 0;

    std::vector<double> u0(n), u1(n), u2(n);
    {
        Xoshiro256 rng(0x5EEDC0DE00000001ull);
        for (double& v : u1) v = rng.uniform_symmetric(1.0);
        normalize(u1);

        bool have_prev = false;
        double n1 = 0.0;
        double prev_estimate = -1.0;
        int stable = 0;
        // Stagnation tracking: if a 2000-iteration window brings no real
        // residual progress while far from convergence, restart from a
        // fresh seeded direction.
        double window_best = std::numeric_limits<double>::infinity();
        double prev_window_best = std::numeric_limits<double>::infinity();

        while (used < max_iterations) {
            ++used;
            m.multiply(u1, u2);
            const double n2 = normalize(u2);
            // Iterates collapsed to numerical zero: nilpotent up to rounding.
            if (n2 < 1e-150) return {0.0, used, false};

            // Hypothesis 1: simple dominant real eigenvalue. Rayleigh
            // quotient with relative residual.
            const double lam = n2 * dot(u1, u2);
            double r1sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = n2 * u2[i] - lam * u1[i];
                r1sq += d * d;
            }
            double estimate = std::abs(lam);
            double residual = std::sqrt(r1sq) / n2;

            // Hypothesis 2: two dominant eigenvalues (complex pair or
            // +/- real). Fit A^2 u0 = s A u0 + p u0 on the last three
            // iterates; |mu| of the recurrence roots is the radius.
            if (have_prev) {
                const double g = dot(u1, u0);
                const double det = 1.0 - g * g;
                if (std::abs(det) > 1e-12) {
                    const double scale = n1 * n2;
                    const double cu1 = scale * dot(u2, u1);
                    const double cu0 = scale * dot(u2, u0);
                    const double sp = (cu1 - g * cu0) / det;  // coefficient on u1
                    const double p = (cu0 - g * cu1) / det;   // coefficient on u0
                    double r2sq = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        const double d = scale * u2[i] - sp * u1[i] - p * u0[i];
                        r2sq += d * d;
                    }
                    const double res2 = std::sqrt(r2sq) / scale;
                    if (res2 < residual) {
                        const double s = sp / n1;
                        const double disc = s * s + 4.0 * p;
                        double est2;
                        if (disc < 0.0) {
                            est2 = std::sqrt(-p);
                        } else {
                            const double root = std::sqrt(disc);
                            est2 = std::max(std::abs(0.5 * (s + root)),
                                            std::abs(0.5 * (s - root)));
                        }
                        estimate = est2;
                        residual = res2;
                    }
                }
            }

            if (residual < best_residual) {
                best_residual = residual;
                best = {estimate, used, false};
            }
            if (prev_estimate >= 0.0 &&
                std::abs(estimate - prev_estimate) <= tol * std::max(estimate, 1e-300)) {
                ++stable;
            } else {
                stable = 0;
            }
            prev_estimate = estimate;
            if (residual <= accept_residual && stable >= 3) {
                return {estimate, used, false};
            }

            window_best = std::min(window_best, residual);
            if (used % 2000 == 0) {
                if (window_best > 1e-3 && window_best > 0.9 * prev_window_best) {
                    ++restart_counter;
                    Xoshiro256 restart_rng(0x5EEDC0DE00000001ull + restart_counter);
                    for (double& v : u1) v = restart_rng.uniform_symmetric(1.0);
                    normalize(u1);
                    have_prev = false;
                    stable = 0;
                    prev_estimate = -1.0;
                    prev_window_best = std::numeric_limits<double>::infinity();
                    window_best = std::numeric_limits<double>::infinity();
                    continue;
                }
                prev_window_best = window_best;
                window_best = std::numeric_limits<double>::infinity();
            }

            std::swap(u0, u1);
            std::swap(u1, u2);
            n1 = n2;
            have_prev = true;
        }
    }

    if (n <= 512) {
        return {dense_spectral_radius(m), used, true};
    }
    throw ConvergenceError("spectral radius estimate did not converge after " +
                               std::to_string(used) + " iterations (best " +
                               std::to_string(best.radius) + ", residual " +
                               std::to_string(best_residual) + ")",
                           best.radius);
}

double spectral_radius(const CsrMatrix& m, double tol, std::size_t max_iterations) {
    return spectral_radius_detail(m, tol, max_iterations).radius;
}

}  // namespace esncrypt

#pragma once

// The echo state network dynamical system and readout training, as pure
// operations on matrices and vectors.
//
// State update:   r_t = (1 - alpha) r_{t-1} + alpha * logistic(W_res r_{t-1} + W_in x_t)
// Readout:        scores_t = W_out r_t            (linear; argmax at recall)
// Training:       W_out = Y R^T (R R^T + beta I)^{-1}  via an SPD solve

#include <cstdint>
#include <span>
#include <vector>

#include "esncrypt/codec.hpp"
#include "esncrypt/keygen.hpp"
#include "esncrypt/linalg.hpp"

namespace esncrypt {

/// Reservoir activation vector r_t, length n_r. Entries stay in [0, 1):
/// each update is a convex blend of the previous state and a logistic
/// activation.
using ReservoirState = std::vector<double>;

ReservoirState zero_state(const EsnKey& key);

/// Reservoir activations recorded over a driven input sequence, one column
/// per time step, columns stored contiguously.
struct StateMatrix {
    std::size_t state_dim = 0;
    std::size_t steps = 0;
    std::vector<double> data;

    std::span<double> column(std::size_t t) {
        return {data.data() + t * state_dim, state_dim};
    }
    std::span<const double> column(std::size_t t) const {
        return {data.data() + t * state_dim, state_dim};
    }
};

/// Trained linear readout, 256 rows by n_r columns, row-major. Rows for
/// byte values absent from the training targets are exactly zero.
struct ReadoutMatrix {
    std::size_t state_dim = 0;
    std::vector<double> weights;

    std::span<double> row(std::size_t b) {
        return {weights.data() + b * state_dim, state_dim};
    }
    std::span<const double> row(std::size_t b) const {
        return {weights.data() + b * state_dim, state_dim};
    }
};

double logistic(double z);

/// One state-update step. Throws CryptoError on a dimension mismatch
/// between the state and the key.
ReservoirState update_state(const ReservoirState& prev, OneHot input, const EsnKey& key);

/// In-place variant used by the hot loops: writes the new state to `out`,
/// using `scratch` (length n_r) for the pre-activation. `out` must not
/// alias `prev`.
void update_state_into(std::span<const double> prev, OneHot input, const EsnKey& key,
                       std::span<double> out, std::span<double> scratch);

/// Iterates update_state over the whole input sequence from `initial` and
/// records every state. Throws std::invalid_argument on an empty sequence.
StateMatrix drive(const EsnKey& key, std::span<const OneHot> inputs,
                  const ReservoirState& initial);

/// Ridge regression of one-hot targets against recorded states. Targets
/// are given as byte values (the active row of each one-hot column of Y).
/// Solves W (R R^T + beta I) = Y R^T through a Cholesky factorization;
/// never forms an explicit inverse. Rows of Y that are entirely zero
/// produce exactly zero rows of W. Throws CryptoError if the regularized
/// Gram matrix is not positive definite ("untrainable chunk").
ReadoutMatrix train_readout(const StateMatrix& states, std::span<const OneHot> targets,
                            double beta);

/// Linear pre-activation W_out r_t. Softmax is deliberately not applied:
/// argmax of the scores equals argmax of their softmax, so recall decisions
/// are unchanged without it.
std::vector<double> readout_scores(const ReadoutMatrix& w, const ReservoirState& state);

/// Hot-loop variant: fills `out` (length 256). `active_rows` lists the
/// rows to compute; the rest are set to +0.0, exactly what the skipped
/// all-zero rows would produce. Pass all 256 rows for a general matrix.
void readout_scores_into(const ReadoutMatrix& w, std::span<const double> state,
                         std::span<const std::uint16_t> active_rows,
                         std::span<double> out);

struct SpectralEstimate {
    double radius = 0.0;
    std::size_t iterations = 0;
    bool dense_fallback = false;
};

/// Largest eigenvalue magnitude of a square sparse matrix, to relative
/// accuracy `tol`. Power iteration with a deterministic seeded start,
/// O(nnz) per iteration; a dominant complex-conjugate or +/- real pair is
/// resolved from a three-iterate recurrence fit. Matrices up to 512x512
/// fall back to a dense eigensolve if iteration stalls; larger ones throw
/// ConvergenceError carrying the best estimate.
SpectralEstimate spectral_radius_detail(const CsrMatrix& m, double tol,
                                        std::size_t max_iterations = 10000);
double spectral_radius(const CsrMatrix& m, double tol,
                       std::size_t max_iterations = 10000);

}  // namespace esncrypt

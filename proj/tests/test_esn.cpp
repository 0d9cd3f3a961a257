#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "esncrypt/errors.hpp"
#include "esncrypt/esn.hpp"
#include "esncrypt/rng.hpp"
#include "oracles.hpp"

using namespace esncrypt;

namespace {

// A key with explicit weights, bypassing generation.
EsnKey manual_key(std::uint32_t m, double ratio, double alpha,
                  const std::vector<double>& w_res_dense,
                  const std::vector<std::pair<std::uint8_t, std::vector<double>>>& w_in_columns) {
    EsnKey key;
    key.params.chunk_size = m;
    key.params.reservoir_ratio = ratio;
    key.params.leaking_rate = alpha;
    const std::size_t n = key.params.reservoir_size();
    key.input_weights_t = Matrix(kAlphabetSize, n);
    for (const auto& [byte, col] : w_in_columns) {
        for (std::size_t i = 0; i < n; ++i) key.input_weights_t(byte, i) = col[i];
    }
    key.reservoir_weights = CsrMatrix::from_dense(n, n, w_res_dense);
    return key;
}

CsrMatrix csr_from(std::size_t n, const std::vector<double>& dense) {
    return CsrMatrix::from_dense(n, n, dense);
}

}  // namespace

TEST_CASE("update_state: zero pre-activation gives logistic(0) = 0.5 everywhere") {
    EsnKey key = manual_key(4, 1.0, 1.0, std::vector<double>(16, 0.0), {});
    const ReservoirState out = update_state(ReservoirState(4, 0.0), OneHot{17}, key);
    for (double v : out) CHECK(v == 0.5);
}

TEST_CASE("update_state: zero leak rate returns the previous state exactly") {
    EsnKey key = manual_key(4, 1.0, 0.0, std::vector<double>(16, 0.25), {});
    const ReservoirState prev = {0.1, 0.9, 0.3, 0.7};
    const ReservoirState out = update_state(prev, OneHot{0}, key);
    for (std::size_t i = 0; i < 4; ++i) CHECK(out[i] == prev[i]);
}

TEST_CASE("update_state: scalar hand evaluation") {
    // alpha=0.5, W_res=[2], input column for byte 0 = [1]:
    // 0.5*0.5 + 0.5*logistic(2.0) = 0.690398538988941...
    EsnKey key = manual_key(2, 0.5, 0.5, {2.0}, {{0, {1.0}}});
    REQUIRE(key.reservoir_size() == 1);
    const ReservoirState out = update_state({0.5}, OneHot{0}, key);
    CHECK(out[0] == doctest::Approx(0.6903985389889411).epsilon(1e-15));
}

TEST_CASE("update_state: dimension mismatch is a corrupted-state error") {
    EsnKey key = manual_key(4, 1.0, 0.5, std::vector<double>(16, 0.0), {});
    CHECK_THROWS_AS(update_state(ReservoirState(3, 0.0), OneHot{0}, key), CryptoError);
}

TEST_CASE("update_state: output is a convex blend of previous state and activation") {
    KeyParams params;
    params.chunk_size = 16;
    params.reservoir_ratio = 1.0;
    params.seed = 77;
    params.leaking_rate = 1.0;
    const EsnKey full = generate_key(params);
    params.leaking_rate = 0.3;
    const EsnKey blended = generate_key(params);

    Xoshiro256 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        ReservoirState prev(16);
        for (double& v : prev) v = rng.uniform01();
        const OneHot input{static_cast<std::uint8_t>(rng.below(256))};
        const ReservoirState activation = update_state(prev, input, full);
        const ReservoirState out = update_state(prev, input, blended);
        for (std::size_t i = 0; i < 16; ++i) {
            const double lo = std::min(prev[i], activation[i]) - 1e-15;
            const double hi = std::max(prev[i], activation[i]) + 1e-15;
            CHECK(out[i] >= lo);
            CHECK(out[i] <= hi);
        }
    }
}

TEST_CASE("drive: single step equals update_state and composition holds") {
    KeyParams params;
    params.chunk_size = 8;
    params.reservoir_ratio = 1.0;
    params.seed = 3;
    const EsnKey key = generate_key(params);
    const ReservoirState r0(8, 0.0);
    const std::vector<OneHot> inputs = {OneHot{10}, OneHot{20}};

    const StateMatrix one = drive(key, {inputs.data(), 1}, r0);
    const ReservoirState direct = update_state(r0, inputs[0], key);
    REQUIRE(one.steps == 1);
    for (std::size_t i = 0; i < 8; ++i) CHECK(one.column(0)[i] == direct[i]);

    const StateMatrix two = drive(key, inputs, r0);
    const ReservoirState second = update_state(direct, inputs[1], key);
    for (std::size_t i = 0; i < 8; ++i) CHECK(two.column(1)[i] == second[i]);
}

TEST_CASE("drive: bit-identical across runs") {
    KeyParams params;
    params.chunk_size = 32;
    params.reservoir_ratio = 1.0;
    params.seed = 11;
    const EsnKey key = generate_key(params);
    std::vector<OneHot> inputs(64);
    Xoshiro256 rng(8);
    for (auto& h : inputs) h.index = static_cast<std::uint8_t>(rng.below(256));

    const StateMatrix a = drive(key, inputs, zero_state(key));
    const StateMatrix b = drive(key, inputs, zero_state(key));
    REQUIRE(a.data.size() == b.data.size());
    CHECK(std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0);
}

TEST_CASE("drive: empty input sequence is rejected") {
    KeyParams params;
    params.chunk_size = 8;
    params.reservoir_ratio = 1.0;
    params.seed = 3;
    const EsnKey key = generate_key(params);
    CHECK_THROWS_AS(drive(key, {}, zero_state(key)), std::invalid_argument);
    CHECK_THROWS_AS(drive(key, std::vector<OneHot>{OneHot{1}}, ReservoirState(7, 0.0)),
                    CryptoError);
}

TEST_CASE("train_readout: 1x1 systems") {
    StateMatrix states;
    states.state_dim = 1;
    states.steps = 1;
    states.data = {1.0};
    const std::vector<OneHot> targets = {OneHot{5}};

    SUBCASE("beta = 0") {
        const ReadoutMatrix w = train_readout(states, targets, 0.0);
        CHECK(w.row(5)[0] == 1.0);
        for (std::size_t b = 0; b < kAlphabetSize; ++b) {
            if (b != 5) CHECK(w.row(b)[0] == 0.0);
        }
    }
    SUBCASE("beta = 1") {
        const ReadoutMatrix w = train_readout(states, targets, 1.0);
        CHECK(w.row(5)[0] == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("train_readout: rows of absent byte values are exactly zero") {
    const StateMatrix states = oracles::random_states(8, 20, 101);
    std::vector<OneHot> targets(20);
    for (std::size_t t = 0; t < 20; ++t) targets[t].index = (t % 2) ? 3 : 200;

    const ReadoutMatrix w = train_readout(states, targets, 1e-8);
    for (std::size_t b = 0; b < kAlphabetSize; ++b) {
        if (b == 3 || b == 200) continue;
        for (double v : w.row(b)) CHECK(v == 0.0);
    }
    double row3 = 0.0;
    for (double v : w.row(3)) row3 += std::abs(v);
    CHECK(row3 > 0.0);
}

TEST_CASE("train_readout: matches the explicit dense-inverse oracle") {
    const StateMatrix states = oracles::random_states(8, 20, 2024);
    const auto targets = oracles::random_targets(20, 55);
    const ReadoutMatrix w = train_readout(states, targets, 1e-6);
    const Eigen::MatrixXd ref = oracles::dense_inverse_readout(states, targets, 1e-6);
    CHECK(oracles::readout_rel_error(w, ref) <= 1e-6);
}

TEST_CASE("train_readout: normal-equations residual stays below 1e-8") {
    const StateMatrix states = oracles::random_states(16, 64, 77);
    const auto targets = oracles::random_targets(64, 78);
    const double beta = 1e-8;
    const ReadoutMatrix w = train_readout(states, targets, beta);

    const auto n = static_cast<Eigen::Index>(states.state_dim);
    Eigen::MatrixXd r(n, 64);
    for (Eigen::Index t = 0; t < 64; ++t) {
        for (Eigen::Index i = 0; i < n; ++i) r(i, t) = states.column(t)[i];
    }
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(256, 64);
    for (Eigen::Index t = 0; t < 64; ++t) y(targets[t].index, t) = 1.0;
    Eigen::MatrixXd wm(256, n);
    for (Eigen::Index b = 0; b < 256; ++b) {
        for (Eigen::Index j = 0; j < n; ++j) wm(b, j) = w.row(b)[j];
    }
    const Eigen::MatrixXd gram = r * r.transpose() + beta * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd c = y * r.transpose();
    const double residual = (wm * gram - c).norm() / c.norm();
    CHECK(residual <= 1e-8);
}

TEST_CASE("train_readout: singular unregularized system is an untrainable chunk") {
    StateMatrix states;
    states.state_dim = 2;
    states.steps = 3;
    // Rank one: both rows identical.
    states.data = {0.4, 0.4, 0.7, 0.7, 0.9, 0.9};
    const auto targets = oracles::random_targets(3, 9);
    CHECK_THROWS_AS(train_readout(states, targets, 0.0), CryptoError);
    CHECK_NOTHROW(train_readout(states, targets, 1e-6));
}

TEST_CASE("train_readout: width mismatch rejected") {
    const StateMatrix states = oracles::random_states(4, 6, 1);
    const auto targets = oracles::random_targets(5, 2);
    CHECK_THROWS_AS(train_readout(states, targets, 0.0), std::invalid_argument);
}

TEST_CASE("readout_scores: linearity edge cases") {
    ReadoutMatrix w;
    w.state_dim = 8;
    w.weights.assign(kAlphabetSize * 8, 0.0);
    for (std::size_t b = 0; b < 8; ++b) w.row(b)[b] = 1.0;  // identity block

    SUBCASE("zero state gives zero scores") {
        const auto scores = readout_scores(w, ReservoirState(8, 0.0));
        for (double s : scores) CHECK(s == 0.0);
    }
    SUBCASE("unit state selects the matching column") {
        ReservoirState e3(8, 0.0);
        e3[3] = 1.0;
        const auto scores = readout_scores(w, e3);
        for (std::size_t b = 0; b < kAlphabetSize; ++b) CHECK(scores[b] == (b == 3 ? 1.0 : 0.0));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(readout_scores(w, ReservoirState(9, 0.0)), CryptoError);
    }
}

TEST_CASE("readout_scores_into: active-row restriction is exact") {
    ReadoutMatrix w;
    w.state_dim = 16;
    w.weights.assign(kAlphabetSize * 16, 0.0);
    Xoshiro256 rng(31);
    std::vector<std::uint16_t> active;
    for (std::size_t b = 0; b < kAlphabetSize; ++b) {
        if (rng.bernoulli(0.4)) {
            active.push_back(static_cast<std::uint16_t>(b));
            for (double& v : w.row(b)) v = rng.uniform_symmetric(2.0);
        }
    }
    ReservoirState state(16);
    for (double& v : state) v = rng.uniform01();

    const auto full = readout_scores(w, state);
    std::vector<double> restricted(kAlphabetSize, -1.0);
    readout_scores_into(w, state, active, restricted);
    for (std::size_t b = 0; b < kAlphabetSize; ++b) CHECK(full[b] == restricted[b]);
}

TEST_CASE("argmax is softmax-invariant") {
    Xoshiro256 rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> scores(kAlphabetSize);
        const double scale = (trial % 3 == 0) ? 1e8 : 1.0;
        for (double& s : scores) s = rng.uniform_symmetric(scale);
        const auto soft = oracles::softmax(scores);
        const std::size_t soft_arg = static_cast<std::size_t>(
            std::max_element(soft.begin(), soft.end()) - soft.begin());
        CHECK(decode_scores(scores) == soft_arg);
    }
}

TEST_CASE("spectral_radius: fixed spectra") {
    SUBCASE("identity") {
        std::vector<double> dense(25, 0.0);
        for (int i = 0; i < 5; ++i) dense[i * 5 + i] = 1.0;
        CHECK(spectral_radius(csr_from(5, dense), 1e-9) == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("diagonal") {
        const std::vector<double> dense = {2.0, 0, 0, 0, -1.0, 0, 0, 0, 0.5};
        CHECK(spectral_radius(csr_from(3, dense), 1e-9) == doctest::Approx(2.0).epsilon(1e-8));
    }
    SUBCASE("rotation: complex conjugate pair") {
        const std::vector<double> dense = {0.0, -1.0, 1.0, 0.0};
        const SpectralEstimate est = spectral_radius_detail(csr_from(2, dense), 1e-9);
        CHECK(est.radius == doctest::Approx(1.0).epsilon(1e-8));
        CHECK_FALSE(est.dense_fallback);
    }
    SUBCASE("plus/minus real pair") {
        const std::vector<double> dense = {2.0, 0.0, 0.0, -2.0};
        const SpectralEstimate est = spectral_radius_detail(csr_from(2, dense), 1e-9);
        CHECK(est.radius == doctest::Approx(2.0).epsilon(1e-8));
        CHECK_FALSE(est.dense_fallback);
    }
    SUBCASE("nilpotent") {
        const std::vector<double> dense = {0.0, 1.0, 0.0, 0.0};
        CHECK(spectral_radius(csr_from(2, dense), 1e-9) == 0.0);
    }
    SUBCASE("scaled rotation above a smaller real mode") {
        const std::vector<double> dense = {0.0, -0.9, 0.0, 0.9, 0.0, 0.0, 0.0, 0.0, 0.3};
        const SpectralEstimate est = spectral_radius_detail(csr_from(3, dense), 1e-9);
        CHECK(est.radius == doctest::Approx(0.9).epsilon(1e-8));
        CHECK_FALSE(est.dense_fallback);
    }
}

TEST_CASE("spectral_radius: input validation") {
    CsrMatrix rect;
    rect.rows = 2;
    rect.cols = 3;
    rect.row_start = {0, 0, 0};
    CHECK_THROWS_AS(spectral_radius(rect, 1e-9), std::invalid_argument);

    const std::vector<double> dense = {1.0};
    CHECK_THROWS_AS(spectral_radius(csr_from(1, dense), 0.0), std::invalid_argument);
}

TEST_CASE("spectral_radius: random sparse matrices match the dense eigensolver") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const CsrMatrix m = oracles::random_sparse(190, 0.3, seed);
        const SpectralEstimate est = spectral_radius_detail(m, 1e-9);
        const double ref = oracles::dense_spectral_radius(m);
        CHECK_FALSE(est.dense_fallback);
        CHECK(std::abs(est.radius - ref) / ref <= 1e-6);
    }
}

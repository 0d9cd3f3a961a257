#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "esncrypt/codec.hpp"
#include "esncrypt/errors.hpp"
#include "esncrypt/rng.hpp"

using namespace esncrypt;

TEST_CASE("encode/decode is a bijection over all byte values") {
    for (int b = 0; b < 256; ++b) {
        const OneHot h = encode_byte(static_cast<std::uint8_t>(b));
        CHECK(h.index == b);
        CHECK(decode_onehot(h) == b);
    }
}

TEST_CASE("decode_scores: argmax with lowest-index tie-break") {
    std::vector<double> scores(kAlphabetSize, 0.0);

    SUBCASE("plain argmax") {
        scores[65] = 2.0;
        scores[200] = 1.5;
        CHECK(decode_scores(scores) == 65);
        scores[200] = 3.0;
        CHECK(decode_scores(scores) == 200);
    }
    SUBCASE("all-equal scores pick byte 0") { CHECK(decode_scores(scores) == 0); }
    SUBCASE("gap size is irrelevant") {
        scores[200] = 1.0;
        scores[13] = 1.0 - 1e-15;
        CHECK(decode_scores(scores) == 200);
    }
    SUBCASE("NaN is a recall blow-up") {
        scores[7] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(decode_scores(scores), CryptoError);
    }
    SUBCASE("wrong length rejected") {
        std::vector<double> short_scores(17, 0.0);
        CHECK_THROWS_AS(decode_scores(short_scores), std::invalid_argument);
    }
}

TEST_CASE("decode_scores is permutation-equivariant on tie-free vectors") {
    Xoshiro256 rng(99);
    std::vector<double> scores(kAlphabetSize);
    std::iota(scores.begin(), scores.end(), 0.0);  // strictly increasing: tie-free
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::size_t> perm(kAlphabetSize);
        std::iota(perm.begin(), perm.end(), 0u);
        for (std::size_t i = 0; i + 1 < perm.size(); ++i) {
            std::swap(perm[i], perm[i + rng.below(perm.size() - i)]);
        }
        std::vector<double> permuted(kAlphabetSize);
        for (std::size_t i = 0; i < kAlphabetSize; ++i) permuted[perm[i]] = scores[i];
        const std::size_t arg = decode_scores(scores);
        CHECK(decode_scores(permuted) == perm[arg]);
    }
}

TEST_CASE("build_training_pair: single byte") {
    const std::uint8_t chunk[] = {0x41};
    const TrainingPair pair = build_training_pair(chunk, 0x00);
    REQUIRE(pair.inputs.size() == 1);
    REQUIRE(pair.targets.size() == 1);
    CHECK(pair.inputs[0].index == 0);
    CHECK(pair.targets[0].index == 0x41);
}

TEST_CASE("build_training_pair: shift by one time step") {
    const std::uint8_t chunk[] = {1, 2, 3};
    const TrainingPair pair = build_training_pair(chunk, 0x00);
    REQUIRE(pair.inputs.size() == 3);
    CHECK(pair.inputs[0].index == 0);
    CHECK(pair.inputs[1].index == 1);
    CHECK(pair.inputs[2].index == 2);
    CHECK(pair.targets[0].index == 1);
    CHECK(pair.targets[1].index == 2);
    CHECK(pair.targets[2].index == 3);
}

TEST_CASE("build_training_pair: shift property and target inverse on random chunks") {
    Xoshiro256 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::uint8_t> chunk(1 + rng.below(300));
        for (auto& b : chunk) b = static_cast<std::uint8_t>(rng.below(256));
        const std::uint8_t b0 = static_cast<std::uint8_t>(rng.below(256));

        const TrainingPair pair = build_training_pair(chunk, b0);
        REQUIRE(pair.inputs.size() == chunk.size());
        REQUIRE(pair.targets.size() == chunk.size());
        CHECK(pair.inputs[0].index == b0);
        for (std::size_t t = 0; t + 1 < chunk.size(); ++t) {
            CHECK(pair.inputs[t + 1] == pair.targets[t]);
        }
        for (std::size_t t = 0; t < chunk.size(); ++t) {
            CHECK(pair.targets[t].index == chunk[t]);
        }
    }
}

TEST_CASE("build_training_pair: empty chunk rejected") {
    CHECK_THROWS_AS(build_training_pair({}, 0x00), std::invalid_argument);
}

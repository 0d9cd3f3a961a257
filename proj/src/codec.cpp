#include "esncrypt/codec.hpp"

#include <cmath>
#include <stdexcept>

#include "esncrypt/errors.hpp"

namespace esncrypt {

std::uint8_t decode_scores(std::span<const double> scores) {
    if (scores.size() != kAlphabetSize) {
        throw std::invalid_argument("score vector must have 256 entries");
    }
    std::size_t best = 0;
    double best_value = scores[0];
    if (std::isnan(best_value)) throw CryptoError("numerical blow-up during recall (NaN score)");
    for (std::size_t i = 1; i < kAlphabetSize; ++i) {
        const double s = scores[i];
        if (std::isnan(s)) throw CryptoError("numerical blow-up during recall (NaN score)");
        if (s > best_value) {
            best_value = s;
            best = i;
        }
    }
    return static_cast<std::uint8_t>(best);
}

TrainingPair build_training_pair(std::span<const std::uint8_t> chunk, std::uint8_t dummy_byte) {
    if (chunk.empty()) throw std::invalid_argument("cannot build a training pair from an empty chunk");
    TrainingPair pair;
    pair.inputs.reserve(chunk.size());
    pair.targets.reserve(chunk.size());
    pair.inputs.push_back(encode_byte(dummy_byte));
    for (std::size_t i = 0; i + 1 < chunk.size(); ++i) pair.inputs.push_back(encode_byte(chunk[i]));
    for (std::uint8_t b : chunk) pair.targets.push_back(encode_byte(b));
    return pair;
}

}  // namespace esncrypt

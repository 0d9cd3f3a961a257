#pragma once

// Byte <-> one-hot conversions and the shifted training pairs used to
// memorize a chunk.

#include <cstdint>
#include <span>
#include <vector>

namespace esncrypt {

inline constexpr std::size_t kAlphabetSize = 256;

/// Logical one-hot vector over byte values. Only the active index is
/// stored; matrix products expand it lazily as a column selection, which
/// must stay semantically invisible.
struct OneHot {
    std::uint8_t index = 0;

    bool operator==(const OneHot&) const = default;
};

inline OneHot encode_byte(std::uint8_t b) { return OneHot{b}; }
inline std::uint8_t decode_onehot(OneHot h) { return h.index; }

/// Argmax over a length-256 score vector, ties broken by lowest index.
/// Throws CryptoError if any entry is NaN (numerical blow-up in recall).
std::uint8_t decode_scores(std::span<const double> scores);

/// Input sequence [b0, c_0 .. c_{N-2}] and target sequence [c_0 .. c_{N-1}]
/// for a chunk c of length N: same length, shifted by one time step.
struct TrainingPair {
    std::vector<OneHot> inputs;
    std::vector<OneHot> targets;
};

TrainingPair build_training_pair(std::span<const std::uint8_t> chunk, std::uint8_t dummy_byte);

}  // namespace esncrypt

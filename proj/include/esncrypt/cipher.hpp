#pragma once

// The encryption engine. Encrypting a chunk trains a readout matrix that
// memorizes it; that matrix is the ciphertext. Decrypting free-runs the
// network from the dummy byte, feeding each recalled byte back as the next
// input. Messages are split into chunks of the key's chunk size, each
// memorized independently from a zero reservoir state.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "esncrypt/esn.hpp"
#include "esncrypt/keygen.hpp"

namespace esncrypt {

struct ChunkCiphertext {
    ReadoutMatrix readout;        // 256 x n_r
    std::uint32_t plain_len = 0;  // in [1, m]
};

struct CiphertextHeader {
    std::uint16_t version = 1;
    std::array<std::uint8_t, 16> key_fingerprint{};
    std::uint32_t chunk_size = 0;  // m
    std::uint32_t state_dim = 0;   // n_r
    std::uint64_t total_len = 0;
    std::uint32_t chunk_count = 0;
};

struct Ciphertext {
    CiphertextHeader header;
    std::vector<ChunkCiphertext> chunks;
};

/// Trains a readout on one chunk (1..m bytes), then verifies recall by
/// decrypting internally and comparing byte for byte. Only a verified
/// readout is returned; a recall mismatch throws CryptoError carrying the
/// first mismatching position ("unmemorizable chunk").
ChunkCiphertext encrypt_chunk(const EsnKey& key, std::span<const std::uint8_t> chunk);

/// Regenerates a chunk: from the zero state and the dummy-byte input,
/// update / score / argmax / feed back, for exactly plain_len steps.
std::vector<std::uint8_t> decrypt_chunk(const EsnKey& key, const ChunkCiphertext& ct);

/// Splits the plaintext into ceil(N/m) chunks (the last may be short;
/// no padding) and encrypts each independently. `jobs` > 1 processes
/// chunks concurrently; the result is bit-identical to jobs == 1.
Ciphertext encrypt(const EsnKey& key, std::span<const std::uint8_t> plaintext,
                   unsigned jobs = 1);

/// Concatenated chunk recalls, in order. Does not require the key
/// fingerprint to match (wrong-key decryption is a supported analysis
/// path); callers that want the guard should check fingerprint_matches.
std::vector<std::uint8_t> decrypt(const EsnKey& key, const Ciphertext& ct,
                                  unsigned jobs = 1);

bool fingerprint_matches(const EsnKey& key, const Ciphertext& ct);

/// Container format, little-endian: magic "ESNC" | version u16 |
/// key_fingerprint 16 bytes | m u32 | n_r u32 | total_len u64 |
/// chunk_count u32 | per chunk: plain_len u32, readout f64[256*n_r]
/// row-major. No trailing data.
std::vector<std::uint8_t> serialize_ciphertext(const Ciphertext& ct);
Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes);

/// Exact serialized size implied by a header.
std::uint64_t serialized_ciphertext_size(const CiphertextHeader& header);

}  // namespace esncrypt

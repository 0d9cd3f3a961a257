#pragma once

// Secret keys: a randomly generated echo state network, reproducible
// bit-for-bit from (parameters, seed).

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "esncrypt/linalg.hpp"

namespace esncrypt {

/// Generation parameters. Defaults are the reference operating point:
/// 200-byte chunks, 190 reservoir neurons, leak 0.07, unit spectral
/// radius, input scale 0.5, 30% connectivity on both weight matrices.
struct KeyParams {
    std::uint32_t chunk_size = 200;       ///< m, bytes per chunk
    double reservoir_ratio = 0.95;        ///< n_r = round(ratio * m)
    double leaking_rate = 0.07;           ///< alpha in [0, 1]
    double spectral_radius = 1.0;         ///< rho, target for W_res
    double input_scale = 0.5;             ///< a, W_in entries in [-a, a]
    double input_connectivity = 0.30;
    double reservoir_connectivity = 0.30;
    double beta = 1e-8;                   ///< ridge regularization
    std::uint64_t seed = 0;

    std::size_t reservoir_size() const;   ///< n_r

    /// Throws FormatError if any field is out of range.
    void validate() const;

    bool operator==(const KeyParams&) const = default;
};

/// The secret key. Matrices are regenerated from (params, seed); only the
/// compact parameter form is ever serialized.
struct EsnKey {
    KeyParams params;

    /// W_in transposed: 256 x n_r row-major, so the column of W_in selected
    /// by a one-hot input is a contiguous row here.
    Matrix input_weights_t;

    /// W_res, n_r x n_r, sparse, scaled to spectral radius rho.
    CsrMatrix reservoir_weights;

    /// Prepended before every chunk so recall does not depend on the
    /// chunk's first byte. Fixed, not key material.
    std::uint8_t dummy_byte = 0x00;

    std::size_t reservoir_size() const { return params.reservoir_size(); }
    std::span<const double> input_column(std::uint8_t byte) const {
        return input_weights_t.row(byte);
    }
};

EsnKey generate_key(const KeyParams& params);

/// Compact form: magic "ESNK" | version u16 | m u32 | ratio f64 | alpha f64
/// | rho f64 | a f64 | input_conn f64 | reservoir_conn f64 | beta f64
/// | seed u64 | b0 u8, little-endian, no trailing data.
std::vector<std::uint8_t> serialize_key(const EsnKey& key);
EsnKey deserialize_key(std::span<const std::uint8_t> bytes);

/// 16-byte digest of the serialized compact form (FNV-1a 128). Collision
/// resistance is not a goal; this only lets ciphertext headers flag
/// wrong-key decryption attempts.
std::array<std::uint8_t, 16> key_fingerprint(const EsnKey& key);

}  // namespace esncrypt

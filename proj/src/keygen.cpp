#include "esncrypt/keygen.hpp"

#include <cmath>
#include <cstring>

#include "esncrypt/errors.hpp"
#include "esncrypt/esn.hpp"
#include "esncrypt/io.hpp"
#include "esncrypt/rng.hpp"

namespace esncrypt {

namespace {

constexpr char kMagic[4] = {'E', 'S', 'N', 'K'};
constexpr std::uint16_t kVersion = 1;
constexpr double kSpectralTol = 1e-9;
constexpr std::size_t kSpectralIterationCap = 10000;

}  // namespace

std::size_t KeyParams::reservoir_size() const {
    return static_cast<std::size_t>(std::llround(reservoir_ratio * chunk_size));
}

void KeyParams::validate() const {
    auto bad = [](const std::string& what) { throw FormatError("corrupt key: " + what); };
    if (chunk_size < 2) bad("chunk size must be at least 2");
    if (!(reservoir_ratio > 0.0) || reservoir_ratio > 1.0) bad("reservoir ratio outside (0, 1]");
    if (!(leaking_rate >= 0.0) || leaking_rate > 1.0) bad("leaking rate outside [0, 1]");
    if (!(spectral_radius > 0.0) || !std::isfinite(spectral_radius)) bad("spectral radius must be positive");
    if (!(input_scale > 0.0) || !std::isfinite(input_scale)) bad("input scale must be positive");
    if (!(input_connectivity > 0.0) || input_connectivity > 1.0) bad("input connectivity outside (0, 1]");
    if (!(reservoir_connectivity > 0.0) || reservoir_connectivity > 1.0) bad("reservoir connectivity outside (0, 1]");
    if (!(beta >= 0.0) || !std::isfinite(beta)) bad("beta must be non-negative");
    if (reservoir_size() < 1) bad("reservoir would be empty");
}

EsnKey generate_key(const KeyParams& params) {
    params.validate();
    const std::size_t n_r = params.reservoir_size();

    // Normative draw order, one xoshiro256** stream seeded from the key
    // seed: W_in values (row-major n_r x 256), W_in Bernoulli masks (same
    // order), W_res values (row-major n_r x n_r), W_res masks. The full
    // dense sample is always drawn; masking never skips a draw.
    Xoshiro256 rng(params.seed);

    EsnKey key;
    key.params = params;
    key.input_weights_t = Matrix(kAlphabetSize, n_r);
    for (std::size_t i = 0; i < n_r; ++i) {
        for (std::size_t j = 0; j < kAlphabetSize; ++j) {
            key.input_weights_t(j, i) = rng.uniform_symmetric(params.input_scale);
        }
    }
    for (std::size_t i = 0; i < n_r; ++i) {
        for (std::size_t j = 0; j < kAlphabetSize; ++j) {
            if (!rng.bernoulli(params.input_connectivity)) key.input_weights_t(j, i) = 0.0;
        }
    }

    std::vector<double> dense(n_r * n_r);
    for (double& v : dense) v = rng.uniform_symmetric(1.0);
    for (double& v : dense) {
        if (!rng.bernoulli(params.reservoir_connectivity)) v = 0.0;
    }

    key.reservoir_weights = CsrMatrix::from_dense(n_r, n_r, dense);
    const double raw_radius =
        spectral_radius(key.reservoir_weights, kSpectralTol, kSpectralIterationCap);
    if (raw_radius < 1e-12) {
        throw CryptoError(
            "generated reservoir has zero spectral radius; "
            "increase reservoir connectivity or choose a different seed");
    }
    key.reservoir_weights.scale(params.spectral_radius / raw_radius);
    return key;
}

std::vector<std::uint8_t> serialize_key(const EsnKey& key) {
    ByteWriter w;
    w.bytes({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
    w.u16(kVersion);
    w.u32(key.params.chunk_size);
    w.f64(key.params.reservoir_ratio);
    w.f64(key.params.leaking_rate);
    w.f64(key.params.spectral_radius);
    w.f64(key.params.input_scale);
    w.f64(key.params.input_connectivity);
    w.f64(key.params.reservoir_connectivity);
    w.f64(key.params.beta);
    w.u64(key.params.seed);
    w.u8(key.dummy_byte);
    return w.take();
}

EsnKey deserialize_key(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    std::uint8_t magic[4];
    r.bytes(magic);
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a key file", 0);
    const std::uint16_t version = r.u16();
    if (version != kVersion) {
        throw FormatError("unsupported key version " + std::to_string(version), 4);
    }
    KeyParams p;
    p.chunk_size = r.u32();
    p.reservoir_ratio = r.f64();
    p.leaking_rate = r.f64();
    p.spectral_radius = r.f64();
    p.input_scale = r.f64();
    p.input_connectivity = r.f64();
    p.reservoir_connectivity = r.f64();
    p.beta = r.f64();
    p.seed = r.u64();
    const std::uint8_t b0 = r.u8();
    r.expect_end("key file");

    p.validate();
    EsnKey key = generate_key(p);
    key.dummy_byte = b0;
    return key;
}

std::array<std::uint8_t, 16> key_fingerprint(const EsnKey& key) {
    // FNV-1a, 128-bit variant: offset basis 0x6c62272e07bb014262b821756295c58d,
    // prime 2^88 + 2^8 + 0x3b. Digest is the little-endian bytes of the
    // final state.
    const std::vector<std::uint8_t> compact = serialize_key(key);
    unsigned __int128 hash = (static_cast<unsigned __int128>(0x6c62272e07bb0142ull) << 64) |
                             0x62b821756295c58dull;
    const unsigned __int128 prime =
        (static_cast<unsigned __int128>(1) << 88) | (1u << 8) | 0x3b;
    for (std::uint8_t b : compact) {
        hash ^= b;
        hash *= prime;
    }
    std::array<std::uint8_t, 16> digest;
    for (int i = 0; i < 16; ++i) {
        digest[i] = static_cast<std::uint8_t>(hash >> (8 * i));
    }
    return digest;
}

}  // namespace esncrypt

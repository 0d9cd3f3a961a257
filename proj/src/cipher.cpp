#include "esncrypt/cipher.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "esncrypt/errors.hpp"
#include "esncrypt/io.hpp"

namespace esncrypt {

namespace {

constexpr char kMagic[4] = {'E', 'S', 'N', 'C'};
constexpr std::uint16_t kVersion = 1;

/// Runs fn(i) for i in [0, count). With jobs > 1 the calls run on a small
/// thread pool; the lowest-index pending error wins and is rethrown after
/// all workers drain.
template <typename Fn>
void for_each_index(std::size_t count, unsigned jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr error;
    std::size_t error_index = SIZE_MAX;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
                next.store(count);
            }
        }
    };

    const unsigned thread_count = static_cast<unsigned>(
        std::min<std::size_t>(jobs, count));
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (unsigned t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void check_key_compatibility(const EsnKey& key, const CiphertextHeader& h) {
    if (h.chunk_size != key.params.chunk_size ||
        h.state_dim != key.reservoir_size()) {
        throw CryptoError("key/ciphertext mismatch: container expects m=" +
                          std::to_string(h.chunk_size) + ", n_r=" +
                          std::to_string(h.state_dim) + " but key has m=" +
                          std::to_string(key.params.chunk_size) + ", n_r=" +
                          std::to_string(key.reservoir_size()));
    }
}

}  // namespace

ChunkCiphertext encrypt_chunk(const EsnKey& key, std::span<const std::uint8_t> chunk) {
    if (chunk.empty()) throw std::invalid_argument("encrypt_chunk: empty chunk");
    if (chunk.size() > key.params.chunk_size) {
        throw std::invalid_argument("encrypt_chunk: chunk longer than key chunk size");
    }

    const TrainingPair pair = build_training_pair(chunk, key.dummy_byte);
    const StateMatrix states = drive(key, pair.inputs, zero_state(key));
    ChunkCiphertext ct;
    ct.readout = train_readout(states, pair.targets, key.params.beta);
    ct.plain_len = static_cast<std::uint32_t>(chunk.size());

    // Recall verification: the readout is only a valid ciphertext if the
    // receiver's free-running recall reproduces the chunk exactly.
    const std::vector<std::uint8_t> recalled = decrypt_chunk(key, ct);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
        if (recalled[i] != chunk[i]) {
            throw CryptoError("unmemorizable chunk: recall verification failed at byte " +
                                  std::to_string(i),
                              static_cast<std::int64_t>(i));
        }
    }
    return ct;
}

std::vector<std::uint8_t> decrypt_chunk(const EsnKey& key, const ChunkCiphertext& ct) {
    const std::size_t n = key.reservoir_size();
    if (ct.readout.state_dim != n || ct.readout.weights.size() != kAlphabetSize * n) {
        throw CryptoError("key/ciphertext mismatch: readout width " +
                          std::to_string(ct.readout.state_dim) + " vs reservoir size " +
                          std::to_string(n));
    }
    if (ct.plain_len == 0) throw std::invalid_argument("decrypt_chunk: empty chunk");

    // Rows that are entirely zero always score exactly +0.0; skip them.
    std::vector<std::uint16_t> active;
    active.reserve(kAlphabetSize);
    for (std::size_t b = 0; b < kAlphabetSize; ++b) {
        const std::span<const double> row = ct.readout.row(b);
        for (double v : row) {
            if (v != 0.0) {
                active.push_back(static_cast<std::uint16_t>(b));
                break;
            }
        }
    }

    std::vector<std::uint8_t> out;
    out.reserve(ct.plain_len);
    std::vector<double> state(n, 0.0), next(n), scratch(n), scores(kAlphabetSize);
    OneHot input{key.dummy_byte};
    for (std::uint32_t t = 0; t < ct.plain_len; ++t) {
        update_state_into(state, input, key, next, scratch);
        std::swap(state, next);
        readout_scores_into(ct.readout, state, active, scores);
        const std::uint8_t b = decode_scores(scores);
        out.push_back(b);
        input = OneHot{b};
    }
    return out;
}

Ciphertext encrypt(const EsnKey& key, std::span<const std::uint8_t> plaintext, unsigned jobs) {
    if (plaintext.empty()) throw std::invalid_argument("encrypt: empty plaintext");
    const std::size_t m = key.params.chunk_size;
    const std::size_t count = (plaintext.size() + m - 1) / m;

    Ciphertext ct;
    ct.header.version = kVersion;
    ct.header.key_fingerprint = key_fingerprint(key);
    ct.header.chunk_size = key.params.chunk_size;
    ct.header.state_dim = static_cast<std::uint32_t>(key.reservoir_size());
    ct.header.total_len = plaintext.size();
    ct.header.chunk_count = static_cast<std::uint32_t>(count);
    ct.chunks.resize(count);

    for_each_index(count, jobs, [&](std::size_t i) {
        const std::size_t offset = i * m;
        const std::size_t len = std::min(m, plaintext.size() - offset);
        try {
            ct.chunks[i] = encrypt_chunk(key, plaintext.subspan(offset, len));
        } catch (const CryptoError& e) {
            throw CryptoError("chunk " + std::to_string(i) + ": " + e.what(), e.position());
        }
    });
    return ct;
}

std::vector<std::uint8_t> decrypt(const EsnKey& key, const Ciphertext& ct, unsigned jobs) {
    check_key_compatibility(key, ct.header);
    if (ct.chunks.size() != ct.header.chunk_count) {
        throw FormatError("ciphertext chunk list does not match header count");
    }

    const std::size_t m = ct.header.chunk_size;
    std::uint64_t remaining = ct.header.total_len;
    for (std::size_t i = 0; i < ct.chunks.size(); ++i) {
        const bool last = (i + 1 == ct.chunks.size());
        const std::uint64_t expected = last ? remaining : m;
        if (ct.chunks[i].plain_len != expected) {
            throw FormatError("chunk " + std::to_string(i) +
                              " length inconsistent with container header");
        }
        remaining -= ct.chunks[i].plain_len;
    }
    if (remaining != 0) {
        throw FormatError("chunk lengths do not cover the container total length");
    }

    std::vector<std::uint8_t> out(ct.header.total_len);
    for_each_index(ct.chunks.size(), jobs, [&](std::size_t i) {
        try {
            const std::vector<std::uint8_t> piece = decrypt_chunk(key, ct.chunks[i]);
            std::memcpy(out.data() + i * m, piece.data(), piece.size());
        } catch (const CryptoError& e) {
            throw CryptoError("chunk " + std::to_string(i) + ": " + e.what(), e.position());
        }
    });
    return out;
}

bool fingerprint_matches(const EsnKey& key, const Ciphertext& ct) {
    return key_fingerprint(key) == ct.header.key_fingerprint;
}

std::uint64_t serialized_ciphertext_size(const CiphertextHeader& header) {
    const std::uint64_t per_chunk = 4 + 8ull * kAlphabetSize * header.state_dim;
    return 42 + header.chunk_count * per_chunk;
}

std::vector<std::uint8_t> serialize_ciphertext(const Ciphertext& ct) {
    if (ct.chunks.size() != ct.header.chunk_count) {
        throw std::invalid_argument("serialize_ciphertext: chunk count mismatch");
    }
    ByteWriter w;
    w.bytes({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
    w.u16(ct.header.version);
    w.bytes(ct.header.key_fingerprint);
    w.u32(ct.header.chunk_size);
    w.u32(ct.header.state_dim);
    w.u64(ct.header.total_len);
    w.u32(ct.header.chunk_count);
    for (const ChunkCiphertext& c : ct.chunks) {
        if (c.readout.state_dim != ct.header.state_dim) {
            throw std::invalid_argument("serialize_ciphertext: chunk dimension mismatch");
        }
        w.u32(c.plain_len);
        for (double v : c.readout.weights) w.f64(v);
    }
    return w.take();
}

Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    std::uint8_t magic[4];
    r.bytes(magic);
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a ciphertext file", 0);

    Ciphertext ct;
    ct.header.version = r.u16();
    if (ct.header.version != kVersion) {
        throw FormatError("unsupported ciphertext version " + std::to_string(ct.header.version), 4);
    }
    r.bytes(ct.header.key_fingerprint);
    ct.header.chunk_size = r.u32();
    ct.header.state_dim = r.u32();
    ct.header.total_len = r.u64();
    ct.header.chunk_count = r.u32();

    const std::uint64_t m = ct.header.chunk_size;
    const std::uint64_t n_r = ct.header.state_dim;
    if (m < 2 || n_r < 1 || ct.header.total_len < 1) {
        throw FormatError("ciphertext header has out-of-range dimensions", 6);
    }
    const std::uint64_t expected_chunks = (ct.header.total_len + m - 1) / m;
    if (ct.header.chunk_count != expected_chunks) {
        throw FormatError("chunk count inconsistent with total length", 38);
    }
    const unsigned __int128 expected_body =
        static_cast<unsigned __int128>(ct.header.chunk_count) *
        (4 + 8ull * kAlphabetSize * n_r);
    if (static_cast<unsigned __int128>(r.remaining()) != expected_body) {
        throw FormatError("ciphertext size mismatch: found " +
                              std::to_string(r.remaining()) + " bytes of chunk data",
                          r.offset());
    }

    ct.chunks.resize(ct.header.chunk_count);
    std::uint64_t remaining_len = ct.header.total_len;
    for (std::uint32_t i = 0; i < ct.header.chunk_count; ++i) {
        ChunkCiphertext& c = ct.chunks[i];
        const std::size_t len_offset = r.offset();
        c.plain_len = r.u32();
        const bool last = (i + 1 == ct.header.chunk_count);
        const std::uint32_t expected_len =
            last ? static_cast<std::uint32_t>(remaining_len) : static_cast<std::uint32_t>(m);
        if (c.plain_len != expected_len) {
            throw FormatError("chunk " + std::to_string(i) + " length " +
                                  std::to_string(c.plain_len) + " inconsistent with header",
                              len_offset);
        }
        remaining_len -= c.plain_len;

        c.readout.state_dim = n_r;
        c.readout.weights.resize(kAlphabetSize * n_r);
        for (std::size_t k = 0; k < c.readout.weights.size(); ++k) {
            const std::size_t value_offset = r.offset();
            const double v = r.f64();
            if (!std::isfinite(v)) {
                throw FormatError("non-finite readout value in chunk " + std::to_string(i),
                                  value_offset);
            }
            c.readout.weights[k] = v;
        }
    }
    r.expect_end("ciphertext");
    return ct;
}

}  // namespace esncrypt

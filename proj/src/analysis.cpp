#include "esncrypt/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "esncrypt/errors.hpp"
#include "esncrypt/rng.hpp"

namespace esncrypt {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    return (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Fraction of ciphertext matrix elements whose absolute difference
/// exceeds epsilon. Both containers must have identical shapes.
double element_difference_fraction(const Ciphertext& a, const Ciphertext& b, double epsilon) {
    if (a.chunks.size() != b.chunks.size()) {
        throw std::invalid_argument("ciphertext shapes differ");
    }
    std::uint64_t changed = 0, total = 0;
    for (std::size_t i = 0; i < a.chunks.size(); ++i) {
        const auto& wa = a.chunks[i].readout.weights;
        const auto& wb = b.chunks[i].readout.weights;
        if (wa.size() != wb.size()) throw std::invalid_argument("ciphertext shapes differ");
        for (std::size_t k = 0; k < wa.size(); ++k) {
            if (std::abs(wa[k] - wb[k]) > epsilon) ++changed;
        }
        total += wa.size();
    }
    return total == 0 ? 0.0 : static_cast<double>(changed) / static_cast<double>(total);
}

void add_key_parameters(AnalysisReport& report, const KeyParams& p) {
    report.add_parameter("chunk_size", std::to_string(p.chunk_size));
    report.add_parameter("reservoir_size", std::to_string(p.reservoir_size()));
    report.add_parameter("leaking_rate", format_double(p.leaking_rate));
    report.add_parameter("spectral_radius", format_double(p.spectral_radius));
    report.add_parameter("input_scale", format_double(p.input_scale));
    report.add_parameter("beta", format_double(p.beta));
}

}  // namespace

void AnalysisReport::add_parameter(std::string name, std::string value) {
    parameters.emplace_back(std::move(name), std::move(value));
}

void AnalysisReport::add_metric(std::string name, double value) {
    metrics.emplace_back(std::move(name), value);
}

double AnalysisReport::metric(std::string_view name) const {
    for (const auto& [k, v] : metrics) {
        if (k == name) return v;
    }
    throw std::out_of_range("no metric named " + std::string(name));
}

bool AnalysisReport::has_metric(std::string_view name) const {
    for (const auto& [k, v] : metrics) {
        if (k == name) return true;
    }
    return false;
}

std::string format_report(const AnalysisReport& report) {
    std::string out;
    out += "experiment: " + report.experiment + "\n";
    out += "environment: " + report.environment + "\n";
    for (const auto& [k, v] : report.parameters) {
        out += "parameter " + k + " = " + v + "\n";
    }
    for (const auto& [k, v] : report.metrics) {
        out += "metric " + k + " = " + format_double(v) + "\n";
    }
    return out;
}

std::string format_series_csv(const AnalysisReport& report) {
    std::string out;
    for (std::size_t i = 0; i < report.series_columns.size(); ++i) {
        if (i) out += ",";
        out += report.series_columns[i];
    }
    out += "\n";
    for (const auto& row : report.series_rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += format_double(row[i]);
        }
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------
// Corpora

std::vector<std::uint8_t> make_corpus(CorpusKind kind, std::size_t size, std::uint64_t seed) {
    std::vector<std::uint8_t> data(size);
    Xoshiro256 rng(seed ^ 0xC0125ull);
    switch (kind) {
        case CorpusKind::RandomBytes:
            for (auto& b : data) b = static_cast<std::uint8_t>(rng.below(256));
            break;
        case CorpusKind::TextLike: {
            static const char* words[] = {
                "the",  "of",    "and",   "to",      "in",    "is",     "that",  "it",
                "was",  "for",   "state", "network", "echo",  "signal", "weight", "memory",
                "data", "chunk", "byte",  "value",   "noise", "train",  "recall", "secret"};
            constexpr std::size_t word_count = sizeof(words) / sizeof(words[0]);
            std::size_t pos = 0;
            while (pos < size) {
                // Squared draw skews toward early (frequent) words.
                const double u = rng.uniform01();
                const std::size_t w = static_cast<std::size_t>(u * u * word_count);
                for (const char* c = words[std::min(w, word_count - 1)]; *c && pos < size; ++c) {
                    data[pos++] = static_cast<std::uint8_t>(*c);
                }
                if (pos < size) data[pos++] = (rng.below(12) == 0) ? '\n' : ' ';
            }
            break;
        }
        case CorpusKind::ImageLike: {
            // Smooth 2D gradients plus sinusoidal texture and mild noise.
            const std::size_t width = 256;
            const double p1 = rng.uniform01() * 6.28318530717958648;
            const double p2 = rng.uniform01() * 6.28318530717958648;
            for (std::size_t i = 0; i < size; ++i) {
                const double x = static_cast<double>(i % width);
                const double y = static_cast<double>(i / width);
                double v = 110.0 + 55.0 * std::sin(x * (6.28318530717958648 / 53.0) + p1) +
                           45.0 * std::cos(y * (6.28318530717958648 / 37.0) + p2) +
                           0.15 * x + static_cast<double>(rng.below(25)) - 12.0;
                v = std::clamp(v, 0.0, 255.0);
                data[i] = static_cast<std::uint8_t>(v);
            }
            break;
        }
        case CorpusKind::ConstantByte: {
            const std::uint8_t b = static_cast<std::uint8_t>(seed % 256);
            std::fill(data.begin(), data.end(), b);
            break;
        }
    }
    return data;
}

CorpusKind corpus_kind_from_name(std::string_view name) {
    if (name == "random") return CorpusKind::RandomBytes;
    if (name == "text") return CorpusKind::TextLike;
    if (name == "image") return CorpusKind::ImageLike;
    if (name == "constant") return CorpusKind::ConstantByte;
    throw std::invalid_argument("unknown corpus kind: " + std::string(name) +
                                " (expected random|text|image|constant)");
}

std::string_view corpus_kind_name(CorpusKind kind) {
    switch (kind) {
        case CorpusKind::RandomBytes: return "random";
        case CorpusKind::TextLike: return "text";
        case CorpusKind::ImageLike: return "image";
        case CorpusKind::ConstantByte: return "constant";
    }
    return "unknown";
}

// ---------------------------------------------------------------------
// Perturbations

KeyParams perturb_params(const KeyParams& params, const KeyPerturbation& p) {
    KeyParams out = params;
    switch (p.field) {
        case ParamField::Identity: break;
        case ParamField::Alpha: out.leaking_rate += p.delta; break;
        case ParamField::Rho: out.spectral_radius += p.delta; break;
        case ParamField::InputScale: out.input_scale += p.delta; break;
        case ParamField::Beta: out.beta += p.delta; break;
        case ParamField::ReservoirRatio: out.reservoir_ratio += p.delta; break;
        case ParamField::InputConnectivity: out.input_connectivity += p.delta; break;
        case ParamField::ReservoirConnectivity: out.reservoir_connectivity += p.delta; break;
        case ParamField::Seed:
            out.seed += static_cast<std::uint64_t>(static_cast<std::int64_t>(p.delta));
            break;
    }
    return out;
}

std::vector<KeyPerturbation> default_perturbations() {
    return {
        {"identity", ParamField::Identity, 0.0},
        {"alpha+1e-3", ParamField::Alpha, 1e-3},
        {"alpha-1e-3", ParamField::Alpha, -1e-3},
        {"alpha+1e-6", ParamField::Alpha, 1e-6},
        {"rho+1e-3", ParamField::Rho, 1e-3},
        {"rho-1e-3", ParamField::Rho, -1e-3},
        {"input-scale+1e-3", ParamField::InputScale, 1e-3},
        {"seed+1", ParamField::Seed, 1.0},
    };
}

// ---------------------------------------------------------------------
// Experiments

AnalysisReport key_sensitivity(const EsnKey& key, std::span<const std::uint8_t> plaintext,
                               std::span<const KeyPerturbation> perturbations) {
    AnalysisReport report;
    report.experiment = "key_sensitivity";
    report.environment = environment_description();
    add_key_parameters(report, key.params);
    report.add_parameter("plaintext_bytes", std::to_string(plaintext.size()));
    report.series_columns = {"perturbation_index", "match_rate"};

    const Ciphertext ct = encrypt(key, plaintext);
    for (std::size_t i = 0; i < perturbations.size(); ++i) {
        const KeyPerturbation& p = perturbations[i];
        EsnKey perturbed = generate_key(perturb_params(key.params, p));
        perturbed.dummy_byte = key.dummy_byte;
        const std::vector<std::uint8_t> decrypted = decrypt(perturbed, ct);

        std::size_t matches = 0;
        for (std::size_t k = 0; k < plaintext.size(); ++k) {
            if (decrypted[k] == plaintext[k]) ++matches;
        }
        const double rate = static_cast<double>(matches) / static_cast<double>(plaintext.size());
        report.add_parameter("perturbation_" + std::to_string(i), p.name);
        report.add_metric("match_rate[" + p.name + "]", rate);
        report.series_rows.push_back({static_cast<double>(i), rate});
    }
    return report;
}

AnalysisReport plaintext_avalanche(const EsnKey& key, std::span<const std::uint8_t> plaintext,
                                   double flip_fraction, unsigned trials, double epsilon,
                                   std::uint64_t seed) {
    if (!(flip_fraction > 0.0) || !(flip_fraction < 1.0)) {
        throw std::invalid_argument("flip fraction must be in (0, 1)");
    }
    if (trials == 0) throw std::invalid_argument("need at least one trial");
    const std::size_t flips =
        static_cast<std::size_t>(flip_fraction * static_cast<double>(plaintext.size()));
    if (flips == 0) {
        throw std::invalid_argument(
            "flip fraction selects zero bytes on this plaintext; at least one byte must change");
    }

    AnalysisReport report;
    report.experiment = "plaintext_avalanche";
    report.environment = environment_description();
    add_key_parameters(report, key.params);
    report.add_parameter("plaintext_bytes", std::to_string(plaintext.size()));
    report.add_parameter("flip_fraction", format_double(flip_fraction));
    report.add_parameter("flipped_bytes", std::to_string(flips));
    report.add_parameter("epsilon", format_double(epsilon));
    report.add_parameter("trials", std::to_string(trials));
    report.add_parameter("experiment_seed", std::to_string(seed));
    report.series_columns = {"trial", "difference_fraction"};

    const Ciphertext base = encrypt(key, plaintext);
    report.add_metric("difference_fraction_control", element_difference_fraction(base, base, epsilon));

    std::vector<std::uint8_t> mutated(plaintext.begin(), plaintext.end());
    std::vector<std::uint32_t> positions(plaintext.size());
    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (unsigned trial = 0; trial < trials; ++trial) {
        std::copy(plaintext.begin(), plaintext.end(), mutated.begin());
        Xoshiro256 rng(seed + 0x9E3779B97F4A7C15ull * (trial + 1));
        std::iota(positions.begin(), positions.end(), 0u);
        // Partial Fisher-Yates: the first `flips` entries are distinct.
        for (std::size_t i = 0; i < flips; ++i) {
            const std::size_t j = i + rng.below(positions.size() - i);
            std::swap(positions[i], positions[j]);
            const std::uint32_t pos = positions[i];
            // Uniform over the 255 values different from the original.
            mutated[pos] = static_cast<std::uint8_t>(
                (mutated[pos] + 1 + rng.below(255)) % 256);
        }
        const Ciphertext changed = encrypt(key, mutated);
        const double diff = element_difference_fraction(base, changed, epsilon);
        sum += diff;
        lo = std::min(lo, diff);
        hi = std::max(hi, diff);
        report.series_rows.push_back({static_cast<double>(trial), diff});
    }
    report.add_metric("difference_fraction_mean", sum / trials);
    report.add_metric("difference_fraction_min", lo);
    report.add_metric("difference_fraction_max", hi);
    return report;
}

AnalysisReport ciphertext_histogram(const Ciphertext& ct, unsigned bins) {
    if (bins < 2) throw std::invalid_argument("need at least 2 bins");

    AnalysisReport report;
    report.experiment = "ciphertext_histogram";
    report.environment = environment_description();
    report.add_parameter("chunk_size", std::to_string(ct.header.chunk_size));
    report.add_parameter("reservoir_size", std::to_string(ct.header.state_dim));
    report.add_parameter("chunk_count", std::to_string(ct.header.chunk_count));
    report.add_parameter("bins", std::to_string(bins));
    report.series_columns = {"bin_low", "bin_high", "count"};

    std::uint64_t zero_count = 0, total = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& chunk : ct.chunks) {
        for (double v : chunk.readout.weights) {
            ++total;
            if (v == 0.0) {
                ++zero_count;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    const std::uint64_t nonzero = total - zero_count;
    report.add_metric("total_elements", static_cast<double>(total));
    report.add_metric("zero_count", static_cast<double>(zero_count));
    report.add_metric("zero_fraction",
                      total == 0 ? 0.0 : static_cast<double>(zero_count) / static_cast<double>(total));
    report.add_metric("nonzero_count", static_cast<double>(nonzero));

    if (nonzero == 0) {
        report.add_metric("chi_square", 0.0);
        report.add_metric("chi_square_dof", static_cast<double>(bins - 1));
        return report;
    }

    const double width = (hi > lo) ? (hi - lo) : 1.0;
    std::vector<std::uint64_t> counts(bins, 0);
    for (const auto& chunk : ct.chunks) {
        for (double v : chunk.readout.weights) {
            if (v == 0.0) continue;
            auto bin = static_cast<std::size_t>((v - lo) / width * bins);
            if (bin >= bins) bin = bins - 1;
            ++counts[bin];
        }
    }
    const double expected = static_cast<double>(nonzero) / bins;
    double chi2 = 0.0;
    for (unsigned b = 0; b < bins; ++b) {
        const double d = static_cast<double>(counts[b]) - expected;
        chi2 += d * d / expected;
        const double bin_lo = lo + width * b / bins;
        const double bin_hi = lo + width * (b + 1) / bins;
        report.series_rows.push_back({bin_lo, bin_hi, static_cast<double>(counts[b])});
    }
    report.add_metric("nonzero_min", lo);
    report.add_metric("nonzero_max", hi);
    report.add_metric("chi_square", chi2);
    report.add_metric("chi_square_dof", static_cast<double>(bins - 1));
    return report;
}

AnalysisReport recall_capacity(std::span<const KeyParams> sweep, unsigned trials,
                               std::uint64_t seed) {
    if (sweep.empty()) throw std::invalid_argument("empty parameter sweep");
    if (trials == 0) throw std::invalid_argument("need at least one trial");

    AnalysisReport report;
    report.experiment = "recall_capacity";
    report.environment = environment_description();
    report.add_parameter("trials", std::to_string(trials));
    report.add_parameter("experiment_seed", std::to_string(seed));
    report.series_columns = {"chunk_size", "reservoir_size", "pass_fraction"};

    for (std::size_t point = 0; point < sweep.size(); ++point) {
        const KeyParams& base = sweep[point];
        unsigned passed = 0;
        for (unsigned trial = 0; trial < trials; ++trial) {
            KeyParams params = base;
            params.seed = base.seed + trial;
            Xoshiro256 rng(seed + point * 1000003ull + trial);
            std::vector<std::uint8_t> chunk(base.chunk_size);
            for (auto& b : chunk) b = static_cast<std::uint8_t>(rng.below(256));
            try {
                const EsnKey key = generate_key(params);
                encrypt_chunk(key, chunk);
                ++passed;
            } catch (const Error&) {
                // Key generation or recall failure: the operating point
                // fails this trial.
            }
        }
        const double fraction = static_cast<double>(passed) / trials;
        const std::size_t n_r = base.reservoir_size();
        report.add_metric("pass_fraction[m=" + std::to_string(base.chunk_size) +
                              ",n_r=" + std::to_string(n_r) + "]",
                          fraction);
        report.series_rows.push_back({static_cast<double>(base.chunk_size),
                                      static_cast<double>(n_r), fraction});
    }
    return report;
}

AnalysisReport benchmark(const EsnKey& key, std::span<const std::size_t> sizes,
                         unsigned repeats) {
    std::vector<std::size_t> distinct(sizes.begin(), sizes.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) {
        throw std::invalid_argument("benchmark needs at least two distinct sizes");
    }
    if (repeats == 0) throw std::invalid_argument("need at least one repeat");

    AnalysisReport report;
    report.experiment = "benchmark";
    report.environment = environment_description();
    add_key_parameters(report, key.params);
    report.add_parameter("repeats", std::to_string(repeats));
    report.series_columns = {"size_bytes", "encrypt_ms_median", "decrypt_ms_median"};

    using Clock = std::chrono::steady_clock;
    std::vector<double> xs, encrypt_ms, decrypt_ms;
    for (std::size_t size : distinct) {
        const std::vector<std::uint8_t> corpus =
            make_corpus(CorpusKind::RandomBytes, size, 0xBE5C ^ size);
        std::vector<double> enc_times, dec_times;
        Ciphertext ct;
        for (unsigned rep = 0; rep < repeats; ++rep) {
            const auto t0 = Clock::now();
            ct = encrypt(key, corpus);
            const auto t1 = Clock::now();
            enc_times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        for (unsigned rep = 0; rep < repeats; ++rep) {
            const auto t0 = Clock::now();
            const auto plain = decrypt(key, ct);
            const auto t1 = Clock::now();
            dec_times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
            if (plain.size() != size) throw CryptoError("benchmark round-trip length mismatch");
        }
        const double enc = median_of(enc_times);
        const double dec = median_of(dec_times);
        xs.push_back(static_cast<double>(size));
        encrypt_ms.push_back(enc);
        decrypt_ms.push_back(dec);
        report.series_rows.push_back({static_cast<double>(size), enc, dec});
    }

    const LinearFit enc_fit = fit_linear(xs, encrypt_ms);
    const LinearFit dec_fit = fit_linear(xs, decrypt_ms);
    report.add_metric("encrypt_fit_slope_ms_per_byte", enc_fit.slope);
    report.add_metric("encrypt_fit_intercept_ms", enc_fit.intercept);
    report.add_metric("encrypt_fit_r_squared", enc_fit.r_squared);
    report.add_metric("decrypt_fit_slope_ms_per_byte", dec_fit.slope);
    report.add_metric("decrypt_fit_intercept_ms", dec_fit.intercept);
    report.add_metric("decrypt_fit_r_squared", dec_fit.r_squared);
    return report;
}

// ---------------------------------------------------------------------
// Statistics helpers

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("fit_linear needs two aligned samples at least");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_linear: degenerate x values");
    LinearFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;

    const double mean_y = sy / n;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pred = fit.slope * x[i] + fit.intercept;
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    fit.r_squared = (ss_tot == 0.0) ? 1.0 : 1.0 - ss_res / ss_tot;
    return fit;
}

double jensen_shannon_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size() || p.empty()) {
        throw std::invalid_argument("distributions must be aligned and nonempty");
    }
    double ps = 0, qs = 0;
    for (double v : p) ps += v;
    for (double v : q) qs += v;
    if (!(ps > 0.0) || !(qs > 0.0)) {
        throw std::invalid_argument("distributions must have positive mass");
    }
    double jsd = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p[i] / ps;
        const double qi = q[i] / qs;
        const double mi = 0.5 * (pi + qi);
        if (pi > 0.0) jsd += 0.5 * pi * std::log(pi / mi);
        if (qi > 0.0) jsd += 0.5 * qi * std::log(qi / mi);
    }
    return jsd;
}

std::string environment_description() {
    std::string arch =
#if defined(__x86_64__)
        "x86_64";
#elif defined(__aarch64__)
        "aarch64";
#else
        "unknown-arch";
#endif
    return "compiler " __VERSION__ ", " + arch + ", " +
           std::to_string(std::thread::hardware_concurrency()) + " hardware threads";
}

}  // namespace esncrypt

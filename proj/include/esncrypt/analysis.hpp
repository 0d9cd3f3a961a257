#pragma once

// Security-analysis experiments (key sensitivity, plaintext avalanche,
// ciphertext distribution, recall capacity) and the runtime scaling
// benchmark. Results are structured reports: named metrics plus
// plot-ready CSV series. No plotting here; external tools draw.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "esncrypt/cipher.hpp"
#include "esncrypt/keygen.hpp"

namespace esncrypt {

struct AnalysisReport {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> series_columns;
    std::vector<std::vector<double>> series_rows;
    std::string environment;

    void add_parameter(std::string name, std::string value);
    void add_metric(std::string name, double value);

    /// Throws std::out_of_range if the metric is absent.
    double metric(std::string_view name) const;
    bool has_metric(std::string_view name) const;
};

/// Line-oriented human-readable form.
std::string format_report(const AnalysisReport& report);

/// Header row plus one comma-separated line per series row; decimal
/// points, no locale variation.
std::string format_series_csv(const AnalysisReport& report);

// ---------------------------------------------------------------------
// Test corpora. Deterministic generators standing in for real payloads:
// uniform random bytes, repeated-structure text, smooth gradients with
// noise (image-like), and a constant byte.

enum class CorpusKind { RandomBytes, TextLike, ImageLike, ConstantByte };

std::vector<std::uint8_t> make_corpus(CorpusKind kind, std::size_t size, std::uint64_t seed);
CorpusKind corpus_kind_from_name(std::string_view name);
std::string_view corpus_kind_name(CorpusKind kind);

// ---------------------------------------------------------------------
// Key perturbations for the sensitivity experiment.

enum class ParamField {
    Identity,
    Alpha,
    Rho,
    InputScale,
    Beta,
    ReservoirRatio,
    InputConnectivity,
    ReservoirConnectivity,
    Seed,
};

struct KeyPerturbation {
    std::string name;
    ParamField field = ParamField::Identity;
    double delta = 0.0;  // added; for Seed, truncated to a signed integer
};

KeyParams perturb_params(const KeyParams& params, const KeyPerturbation& p);

/// Identity control first, then small deltas on alpha, rho, input scale,
/// and seed.
std::vector<KeyPerturbation> default_perturbations();

// ---------------------------------------------------------------------
// Experiments.

/// Encrypts once with the true key, then decrypts with each perturbed key
/// and reports the byte-match rate against the original plaintext. The
/// identity perturbation is always included as a control (rate 1.0).
AnalysisReport key_sensitivity(const EsnKey& key, std::span<const std::uint8_t> plaintext,
                               std::span<const KeyPerturbation> perturbations);

/// Alters floor(flip_fraction * N) distinct plaintext bytes per trial
/// (uniform replacement over the 255 other values, seeded), re-encrypts,
/// and reports the fraction of ciphertext elements with |delta| > epsilon,
/// averaged over trials. A control comparing the base ciphertext against
/// itself is always included. Throws std::invalid_argument if the flip
/// count rounds to zero bytes.
AnalysisReport plaintext_avalanche(const EsnKey& key, std::span<const std::uint8_t> plaintext,
                                   double flip_fraction, unsigned trials,
                                   double epsilon = 1e-12, std::uint64_t seed = 1);

/// Exact zero-element fraction, histogram of nonzero values, and a
/// chi-square statistic against a uniform distribution over the nonzero
/// support range.
AnalysisReport ciphertext_histogram(const Ciphertext& ct, unsigned bins);

/// For each parameter set, the fraction of random chunks that pass
/// encrypt-time recall verification (trial seeds derived from `seed`).
/// Key-generation failures count as recall failures.
AnalysisReport recall_capacity(std::span<const KeyParams> sweep, unsigned trials,
                               std::uint64_t seed = 1);

/// Median encrypt/decrypt wall-clock times per message size plus a linear
/// fit of encrypt time against size with its R^2.
AnalysisReport benchmark(const EsnKey& key, std::span<const std::size_t> sizes,
                         unsigned repeats);

// ---------------------------------------------------------------------
// Small statistics helpers shared by the experiments and their tests.

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

/// Jensen-Shannon divergence (natural log) between two aligned
/// discrete distributions; inputs are normalized internally.
double jensen_shannon_divergence(std::span<const double> p, std::span<const double> q);

std::string environment_description();

}  // namespace esncrypt

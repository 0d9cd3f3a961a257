#include "esncrypt/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "esncrypt/analysis.hpp"
#include "esncrypt/cipher.hpp"
#include "esncrypt/errors.hpp"
#include "esncrypt/io.hpp"
#include "esncrypt/keygen.hpp"

namespace esncrypt {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t entropy_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

/// Key parameter overrides; flag names mirror the parameter names.
CLI::Option* add_param_flags(CLI::App* cmd, KeyParams& p) {
    cmd->add_option("--chunk-size", p.chunk_size, "Chunk size m in bytes")
        ->check(CLI::Range(2u, 1000000u));
    cmd->add_option("--reservoir-ratio", p.reservoir_ratio, "Reservoir size as a fraction of m");
    cmd->add_option("--alpha", p.leaking_rate, "Leaking rate, in [0, 1]")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--rho", p.spectral_radius, "Target spectral radius of the reservoir matrix");
    cmd->add_option("--input-scale", p.input_scale, "Input weight scale");
    cmd->add_option("--input-conn", p.input_connectivity, "Input connectivity fraction");
    cmd->add_option("--reservoir-conn", p.reservoir_connectivity, "Reservoir connectivity fraction");
    cmd->add_option("--beta", p.beta, "Ridge regularization constant");
    return cmd->add_option("--seed", p.seed, "Key seed (defaults to OS entropy; keep secret)");
}

void validate_overrides(const KeyParams& p) {
    try {
        p.validate();
    } catch (const FormatError& e) {
        // Out-of-range values coming from flags are usage errors, not
        // corrupt files.
        throw std::invalid_argument(e.what());
    }
}

EsnKey load_key(const std::string& path) { return deserialize_key(read_file(path)); }

std::vector<std::uint8_t> load_or_generate_input(const std::string& input_path,
                                                 const std::string& corpus,
                                                 std::size_t corpus_size,
                                                 std::uint64_t corpus_seed) {
    if (!input_path.empty()) return read_file(input_path);
    return make_corpus(corpus_kind_from_name(corpus), corpus_size, corpus_seed);
}

void emit_report(const AnalysisReport& report, const std::string& prefix) {
    const std::string report_path = prefix + ".report.txt";
    const std::string csv_path = prefix + ".csv";
    write_text_atomic(report_path, format_report(report));
    write_text_atomic(csv_path, format_series_csv(report));
    std::cout << "experiment: " << report.experiment << "\n";
    for (const auto& [name, value] : report.metrics) {
        std::cout << "  " << name << " = " << format_double(value) << "\n";
    }
    std::cout << "report: " << report_path << "\nseries: " << csv_path << "\n";
}

KeyPerturbation parse_perturbation(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
        throw std::invalid_argument("perturbation must look like field=delta, got: " + text);
    }
    const std::string field = text.substr(0, eq);
    const double delta = std::stod(text.substr(eq + 1));
    KeyPerturbation p{text, ParamField::Identity, delta};
    if (field == "alpha") p.field = ParamField::Alpha;
    else if (field == "rho") p.field = ParamField::Rho;
    else if (field == "input-scale") p.field = ParamField::InputScale;
    else if (field == "beta") p.field = ParamField::Beta;
    else if (field == "reservoir-ratio") p.field = ParamField::ReservoirRatio;
    else if (field == "input-conn") p.field = ParamField::InputConnectivity;
    else if (field == "reservoir-conn") p.field = ParamField::ReservoirConnectivity;
    else if (field == "seed") p.field = ParamField::Seed;
    else {
        throw std::invalid_argument("unknown perturbation field: " + field);
    }
    return p;
}

std::pair<double, double> nonzero_range(const Ciphertext& ct) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : ct.chunks) {
        for (double v : c.readout.weights) {
            if (v != 0.0) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    return {lo, hi};
}

std::vector<double> nonzero_counts(const Ciphertext& ct, unsigned bins, double lo, double hi) {
    std::vector<double> counts(bins, 0.0);
    const double width = (hi > lo) ? (hi - lo) : 1.0;
    for (const auto& c : ct.chunks) {
        for (double v : c.readout.weights) {
            if (v == 0.0) continue;
            auto bin = static_cast<std::size_t>((v - lo) / width * bins);
            if (bin >= bins) bin = bins - 1;
            counts[bin] += 1.0;
        }
    }
    return counts;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"esncrypt: symmetric encryption with an echo state network as the key"};
    app.require_subcommand(1);

    // keygen ------------------------------------------------------------
    auto* keygen_cmd = app.add_subcommand("keygen", "Generate and write a key file");
    KeyParams keygen_params;
    std::string keygen_out;
    bool keygen_force = false;
    CLI::Option* keygen_seed_opt = add_param_flags(keygen_cmd, keygen_params);
    keygen_cmd->add_option("-o,--output", keygen_out, "Key file to write")->required();
    keygen_cmd->add_flag("--force", keygen_force, "Overwrite an existing file");
    keygen_cmd->callback([&] {
        if (!keygen_seed_opt->count()) keygen_params.seed = entropy_seed();
        validate_overrides(keygen_params);
        if (std::filesystem::exists(keygen_out) && !keygen_force) {
            throw IoError("refusing to overwrite " + keygen_out + " (pass --force)");
        }
        const EsnKey key = generate_key(keygen_params);
        write_file_atomic(keygen_out, serialize_key(key));
        std::cout << "wrote key " << keygen_out << " (m=" << key.params.chunk_size
                  << ", n_r=" << key.reservoir_size() << ")\n";
    });

    // encrypt -----------------------------------------------------------
    auto* encrypt_cmd = app.add_subcommand("encrypt", "Encrypt a file");
    std::string enc_key_path, enc_out, enc_in;
    unsigned enc_jobs = 1;
    encrypt_cmd->add_option("-k,--key", enc_key_path, "Key file")->required();
    encrypt_cmd->add_option("-o,--output", enc_out, "Ciphertext file to write")->required();
    encrypt_cmd->add_option("input", enc_in, "Plaintext file")->required();
    encrypt_cmd->add_option("--jobs", enc_jobs, "Parallel chunk workers");
    encrypt_cmd->callback([&] {
        const EsnKey key = load_key(enc_key_path);
        const std::vector<std::uint8_t> plain = read_file(enc_in);
        if (plain.empty()) throw std::invalid_argument(enc_in + " is empty; nothing to encrypt");
        const Ciphertext ct = encrypt(key, plain, enc_jobs);
        write_file_atomic(enc_out, serialize_ciphertext(ct));
        std::cout << "encrypted " << plain.size() << " bytes into " << ct.header.chunk_count
                  << " chunk(s): " << enc_out << "\n";
    });

    // decrypt -----------------------------------------------------------
    auto* decrypt_cmd = app.add_subcommand("decrypt", "Decrypt a ciphertext file");
    std::string dec_key_path, dec_out, dec_in;
    unsigned dec_jobs = 1;
    bool force_wrong_key = false;
    decrypt_cmd->add_option("-k,--key", dec_key_path, "Key file")->required();
    decrypt_cmd->add_option("-o,--output", dec_out, "Plaintext file to write")->required();
    decrypt_cmd->add_option("input", dec_in, "Ciphertext file")->required();
    decrypt_cmd->add_flag("--force-wrong-key", force_wrong_key,
                          "Decrypt even if the key fingerprint does not match");
    decrypt_cmd->add_option("--jobs", dec_jobs, "Parallel chunk workers");
    decrypt_cmd->callback([&] {
        const EsnKey key = load_key(dec_key_path);
        const Ciphertext ct = deserialize_ciphertext(read_file(dec_in));
        if (!fingerprint_matches(key, ct)) {
            if (!force_wrong_key) {
                throw CryptoError(
                    "key fingerprint does not match the ciphertext header (wrong key?); "
                    "pass --force-wrong-key to decrypt anyway");
            }
            std::cerr << "warning: key fingerprint mismatch, decrypting anyway\n";
        }
        const std::vector<std::uint8_t> plain = decrypt(key, ct, dec_jobs);
        write_file_atomic(dec_out, plain);
        std::cout << "decrypted " << plain.size() << " bytes: " << dec_out << "\n";
    });

    // analyze -----------------------------------------------------------
    auto* analyze_cmd = app.add_subcommand("analyze", "Security-analysis experiments");
    analyze_cmd->require_subcommand(1);

    // analyze keysens
    auto* keysens_cmd = analyze_cmd->add_subcommand("keysens", "Key sensitivity");
    std::string ks_key_path, ks_in, ks_corpus = "random", ks_out = "keysens";
    std::size_t ks_size = 10240;
    std::uint64_t ks_corpus_seed = 7;
    std::vector<std::string> ks_perturb;
    keysens_cmd->add_option("-k,--key", ks_key_path, "Key file")->required();
    keysens_cmd->add_option("-i,--input", ks_in, "Plaintext file (default: generated corpus)");
    keysens_cmd->add_option("--corpus", ks_corpus, "Corpus kind: random|text|image|constant");
    keysens_cmd->add_option("--size", ks_size, "Generated corpus size in bytes");
    keysens_cmd->add_option("--corpus-seed", ks_corpus_seed, "Generated corpus seed");
    keysens_cmd->add_option("--perturb", ks_perturb,
                            "Perturbation field=delta (repeatable); identity control is always added");
    keysens_cmd->add_option("-o,--out", ks_out, "Output prefix");
    keysens_cmd->callback([&] {
        const EsnKey key = load_key(ks_key_path);
        const auto plain = load_or_generate_input(ks_in, ks_corpus, ks_size, ks_corpus_seed);
        std::vector<KeyPerturbation> ps;
        if (ks_perturb.empty()) {
            ps = default_perturbations();
        } else {
            ps.push_back({"identity", ParamField::Identity, 0.0});
            for (const auto& s : ks_perturb) ps.push_back(parse_perturbation(s));
        }
        emit_report(key_sensitivity(key, plain, ps), ks_out);
    });

    // analyze avalanche
    auto* avalanche_cmd = analyze_cmd->add_subcommand("avalanche", "Plaintext sensitivity");
    std::string av_key_path, av_in, av_corpus = "image", av_out = "avalanche";
    std::size_t av_size = 32768;
    std::uint64_t av_corpus_seed = 7, av_seed = 1;
    double av_flip = 0.01, av_epsilon = 1e-12;
    unsigned av_trials = 5;
    avalanche_cmd->add_option("-k,--key", av_key_path, "Key file")->required();
    avalanche_cmd->add_option("-i,--input", av_in, "Plaintext file (default: generated corpus)");
    avalanche_cmd->add_option("--corpus", av_corpus, "Corpus kind: random|text|image|constant");
    avalanche_cmd->add_option("--size", av_size, "Generated corpus size in bytes");
    avalanche_cmd->add_option("--corpus-seed", av_corpus_seed, "Generated corpus seed");
    avalanche_cmd->add_option("--flip", av_flip, "Fraction of plaintext bytes to alter");
    avalanche_cmd->add_option("--trials", av_trials, "Number of trials");
    avalanche_cmd->add_option("--epsilon", av_epsilon, "Element difference threshold");
    avalanche_cmd->add_option("--experiment-seed", av_seed, "Trial RNG seed");
    avalanche_cmd->add_option("-o,--out", av_out, "Output prefix");
    avalanche_cmd->callback([&] {
        const EsnKey key = load_key(av_key_path);
        const auto plain = load_or_generate_input(av_in, av_corpus, av_size, av_corpus_seed);
        emit_report(plaintext_avalanche(key, plain, av_flip, av_trials, av_epsilon, av_seed),
                    av_out);
    });

    // analyze histogram
    auto* histogram_cmd = analyze_cmd->add_subcommand("histogram", "Ciphertext distribution");
    std::string hg_in, hg_compare, hg_out = "histogram";
    unsigned hg_bins = 64;
    histogram_cmd->add_option("input", hg_in, "Ciphertext file")->required();
    histogram_cmd->add_option("--bins", hg_bins, "Histogram bins")->check(CLI::Range(2u, 100000u));
    histogram_cmd->add_option("--compare", hg_compare,
                              "Second ciphertext; adds the Jensen-Shannon divergence between the "
                              "two nonzero-value histograms");
    histogram_cmd->add_option("-o,--out", hg_out, "Output prefix");
    histogram_cmd->callback([&] {
        const Ciphertext ct = deserialize_ciphertext(read_file(hg_in));
        AnalysisReport report = ciphertext_histogram(ct, hg_bins);
        if (!hg_compare.empty()) {
            const Ciphertext other = deserialize_ciphertext(read_file(hg_compare));
            const auto [lo1, hi1] = nonzero_range(ct);
            const auto [lo2, hi2] = nonzero_range(other);
            const double lo = std::min(lo1, lo2), hi = std::max(hi1, hi2);
            const auto h1 = nonzero_counts(ct, hg_bins, lo, hi);
            const auto h2 = nonzero_counts(other, hg_bins, lo, hi);
            report.add_metric("jensen_shannon_divergence", jensen_shannon_divergence(h1, h2));
        }
        emit_report(report, hg_out);
    });

    // analyze capacity
    auto* capacity_cmd = analyze_cmd->add_subcommand("capacity", "Recall capacity sweep");
    KeyParams cap_base;
    std::vector<std::uint32_t> cap_sizes = {50, 100, 200};
    std::vector<double> cap_ratios = {0.5, 0.75, 0.95, 1.0};
    unsigned cap_trials = 20;
    std::uint64_t cap_seed = 1;
    std::string cap_out = "capacity";
    add_param_flags(capacity_cmd, cap_base);
    capacity_cmd->add_option("--chunk-sizes", cap_sizes, "Chunk sizes to sweep")->delimiter(',');
    capacity_cmd->add_option("--ratios", cap_ratios, "Reservoir ratios to sweep")->delimiter(',');
    capacity_cmd->add_option("--trials", cap_trials, "Trials per operating point");
    capacity_cmd->add_option("--experiment-seed", cap_seed, "Trial RNG seed");
    capacity_cmd->add_option("-o,--out", cap_out, "Output prefix");
    capacity_cmd->callback([&] {
        std::vector<KeyParams> sweep;
        for (std::uint32_t m : cap_sizes) {
            for (double ratio : cap_ratios) {
                KeyParams p = cap_base;
                p.chunk_size = m;
                p.reservoir_ratio = ratio;
                sweep.push_back(p);
            }
        }
        emit_report(recall_capacity(sweep, cap_trials, cap_seed), cap_out);
    });

    // bench ---------------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("bench", "Runtime scaling benchmark");
    KeyParams bench_params;
    std::string bench_key_path, bench_out = "bench";
    std::vector<std::size_t> bench_sizes;
    unsigned bench_repeats = 3;
    CLI::Option* bench_seed_opt = add_param_flags(bench_cmd, bench_params);
    bench_cmd->add_option("-k,--key", bench_key_path, "Key file (default: generated key)");
    bench_cmd->add_option("--sizes", bench_sizes, "Message sizes in bytes")
        ->delimiter(',')
        ->required();
    bench_cmd->add_option("--repeats", bench_repeats, "Repeats per size (median reported)");
    bench_cmd->add_option("-o,--out", bench_out, "Output prefix");
    bench_cmd->callback([&] {
        EsnKey key;
        if (!bench_key_path.empty()) {
            key = load_key(bench_key_path);
        } else {
            if (!bench_seed_opt->count()) bench_params.seed = entropy_seed();
            validate_overrides(bench_params);
            key = generate_key(bench_params);
        }
        emit_report(benchmark(key, bench_sizes, bench_repeats), bench_out);
    });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "format error at byte " << e.offset() << ": " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const CryptoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace esncrypt

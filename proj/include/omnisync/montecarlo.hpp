// SPDX-License-Identifier: Apache-2.0
//
// omnisync: omnidirectional precoding and combining for mmWave MIMO synchronization
// Copyright (C) 2026 The omnisync authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Drop x frame x SNR Monte Carlo estimation of missed detection at a
// calibrated false-alarm threshold, by the full detector or by the reduced
// chi-square form, with deterministic parallel execution over drops.

#include "analysis.hpp"
#include "channel.hpp"
#include "codebook.hpp"
#include "common.hpp"
#include "detector.hpp"
#include "linalg.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace omnisync {

enum class Estimator { reduced, full };

inline std::string_view to_string(Estimator e) { return e == Estimator::full ? "full" : "reduced"; }

struct ExperimentConfig {
    Design approach = Design::omni_golay;
    int k = 1;
    int mt = 64;
    int mr = 16;
    int nt = 2;
    int nr = 2;
    int l = 64;
    ChannelConfig channel;
    std::vector<double> snr_db;
    double p_fa_target = 1e-2;
    int drops = 100;
    int frames_per_drop = 1000;
    Estimator estimator = Estimator::reduced;
    std::uint64_t master_seed = 1;
    int zc_root = 1;

    /// Channel settings with the array sizes and slot count of the experiment.
    ChannelConfig channel_config() const {
        ChannelConfig c = channel;
        c.mt = mt;
        c.mr = mr;
        c.k = k;
        return c;
    }

    void validate() const {
        require(drops >= 1, "experiment: drops must be >= 1");
        require(frames_per_drop >= 1, "experiment: frames_per_drop must be >= 1");
        require(p_fa_target > 0.0 && p_fa_target < 1.0, "experiment: p_fa_target must be in (0, 1)");
        require(k >= 1 && l >= 1, "experiment: K and L must be >= 1");
        channel_config().validate();
    }
};

struct RunOptions {
    int workers = 1;
    bool verbose = false; // one stderr line per drop
};

struct ResultRow {
    std::string approach;
    int k = 0;
    double snr_db = 0.0;
    double gamma = 0.0;
    double p_fa_target = 0.0;
    double p_md_hat = 0.0;
    double p_md_stderr = 0.0;
    std::optional<double> p_md_asym;
    long long trials = 0;
    std::uint64_t seed = 0;
    double p_md_drop_mean = 0.0;
    int skipped_drops = 0;
};

inline double binomial_stderr(double p, long long n) {
    return n > 0 ? std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n)) : 0.0;
}

inline double snr_to_noise_var(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

inline std::uint64_t drop_seed(std::uint64_t master, int drop) {
    return mix(master, static_cast<std::uint64_t>(drop));
}

/// Codebook used by an approach in one drop. Only the random-phase design
/// depends on the drop (fresh phases every drop).
inline Codebook approach_codebook(const ExperimentConfig &cfg, std::uint64_t dseed) {
    switch (cfg.approach) {
    case Design::omni_golay: return build_omni_codebook(cfg.mt, cfg.nt, cfg.mr, cfg.nr, cfg.k);
    case Design::quasi_omni_zc: return zc_codebook(cfg.mt, cfg.mr, cfg.nr, cfg.k, cfg.zc_root);
    case Design::dft_sweep: return dft_sweep_codebook(cfg.mt, cfg.k, cfg.mr, cfg.nr);
    case Design::random_phase:
        return random_phase_codebook(cfg.mt, 1, cfg.mr, 1, cfg.k, mix(dseed, stream::codebook));
    case Design::explicit_: break;
    }
    throw DomainError("experiment: approach must be one of omni-golay, quasi-omni-zc, dft-sweep, random-phase");
}

inline DetectionDims approach_dims(const ExperimentConfig &cfg) {
    const Codebook cb = approach_codebook(cfg, 0);
    return {cfg.k, cfg.l, cb.nr, cb.nt};
}

inline double approach_threshold(const ExperimentConfig &cfg) {
    return threshold_from_fa(cfg.p_fa_target, approach_dims(cfg));
}

/// Replaces each F_k by F_k (F_k^H F_k)^{-1/2}. The GLRT depends on F_k only
/// through its column space, and the whitened noise is white.
inline Codebook whiten_combiners(Codebook cb) {
    for (auto &f : cb.f) {
        const CMatrix ff = f.adjoint() * f;
        Eigen::SelfAdjointEigenSolver<CMatrix> es(ff);
        require(es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0,
                "combiner must have full column rank");
        const RVector inv = es.eigenvalues().cwiseSqrt().cwiseInverse();
        f = f * (es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint());
    }
    return cb;
}

/// Effective covariance of the drop: i.i.d. model or sampled paths.
inline EffectiveCovariance drop_covariance(const ExperimentConfig &cfg, const Codebook &cb,
                                           const TemporalCorrelation &corr, std::uint64_t dseed,
                                           PathSet *paths_out = nullptr) {
    const ChannelConfig ch = cfg.channel_config();
    if (ch.model == ChannelModel::iid)
        return build_R_iid(cb, corr.psi);
    PathSet paths = sample_paths(ch, mix(dseed, stream::paths));
    auto cov = build_R_general(cb, paths, ch.beta, corr.psi);
    if (paths_out)
        *paths_out = std::move(paths);
    return cov;
}

struct DropResult {
    std::vector<long long> misses; // per SNR
    long long trials = 0;
    std::optional<double> asym_log_product; // sum_m log lambda_m, rank
    int rank = 0;
    bool skipped = false;
    std::string error;
};

/// Runs `drop_fn(drop_index)` for every drop on a pool of worker threads.
/// Results are stored by drop index, so the reduction order never depends on
/// scheduling.
template <class DropFn>
std::vector<DropResult> run_drops(int drops, const RunOptions &opt, DropFn drop_fn) {
    std::vector<DropResult> results(static_cast<std::size_t>(drops));
    std::atomic<int> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (int d = next.fetch_add(1); d < drops; d = next.fetch_add(1)) {
            auto &res = results[static_cast<std::size_t>(d)];
            try {
                res = drop_fn(d);
            } catch (const std::exception &e) {
                res = DropResult{};
                res.skipped = true;
                res.error = e.what();
            }
            if (opt.verbose) {
                std::lock_guard<std::mutex> lock(log_mutex);
                std::cerr << "drop " << d + 1 << "/" << drops << (res.skipped ? " skipped: " + res.error : "")
                          << '\n';
            }
        }
    };
    const int n = std::max(1, std::min(opt.workers, drops));
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();
    return results;
}

/// Pools per-drop counts into one row per SNR.
inline std::vector<ResultRow> reduce_drops(const ExperimentConfig &cfg, const std::vector<DropResult> &drops,
                                           double gamma, const DetectionDims &dims) {
    std::vector<ResultRow> rows;
    int skipped = 0;
    for (const auto &d : drops)
        skipped += d.skipped ? 1 : 0;
    for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
        ResultRow row;
        row.approach = std::string(to_string(cfg.approach));
        row.k = cfg.k;
        row.snr_db = cfg.snr_db[s];
        row.gamma = gamma;
        row.p_fa_target = cfg.p_fa_target;
        row.seed = cfg.master_seed;
        row.skipped_drops = skipped;
        long long miss = 0, trials = 0;
        double drop_mean = 0.0;
        int used = 0;
        bool asym_ok = true;
        double asym_sum = 0.0;
        const double nu = snr_to_noise_var(cfg.snr_db[s]);
        for (const auto &d : drops) {
            if (d.skipped)
                continue;
            miss += d.misses[s];
            trials += d.trials;
            drop_mean += static_cast<double>(d.misses[s]) / static_cast<double>(d.trials);
            ++used;
            if (d.rank == 0 || !d.asym_log_product) {
                asym_ok = false;
            } else {
                // high-SNR asymptote with the drop eigenvalues
                const double lv = d.rank * std::log(dims.nt * nu * gamma / (dims.l * (1.0 - gamma))) +
                                  log_binomial(static_cast<double>(dims.observations() - 1), d.rank) -
                                  *d.asym_log_product;
                asym_sum += std::exp(lv);
            }
        }
        row.trials = trials;
        row.p_md_hat = trials > 0 ? static_cast<double>(miss) / static_cast<double>(trials) : 0.0;
        row.p_md_stderr = binomial_stderr(row.p_md_hat, trials);
        row.p_md_drop_mean = used > 0 ? drop_mean / used : 0.0;
        if (asym_ok && used > 0)
            row.p_md_asym = asym_sum / used;
        if (std::fabs(row.p_md_drop_mean - row.p_md_hat) > row.p_md_stderr && row.p_md_stderr > 0.0)
            std::cerr << "warning: " << row.approach << " at " << row.snr_db
                      << " dB: drop-mean MD " << row.p_md_drop_mean << " differs from pooled " << row.p_md_hat
                      << " by more than one stderr\n";
        rows.push_back(std::move(row));
    }
    if (skipped > 0)
        std::cerr << "warning: " << skipped << " drop(s) skipped\n";
    return rows;
}

inline void record_spectrum(DropResult &res, const EffectiveCovariance &cov) {
    res.rank = cov.rank;
    if (cov.rank > 0) {
        double s = 0.0;
        for (double v : cov.nonzero_eigs())
            s += std::log(v);
        res.asym_log_product = s;
    }
}

/// Frames of the reduced form for one covariance factor S: returns the miss
/// count per noise variance. MD iff ||gain S xi + sqrt(nu) e||^2 < t nu G,
/// xi, e ~ CN(0, I), G ~ Gamma(z1_shape, 1).
inline std::vector<long long> reduced_frame_misses(const CMatrix &s, double gain, double t, double z1_shape,
                                                   const std::vector<double> &nus, int frames, Rng &rng) {
    std::vector<long long> misses(nus.size(), 0);
    ComplexNormal cn;
    std::gamma_distribution<double> chi(z1_shape, 1.0);
    const Eigen::Index dim = s.rows();
    CVector xi(dim), e2(dim);
    for (int f = 0; f < frames; ++f) {
        for (Eigen::Index i = 0; i < dim; ++i)
            xi(i) = cn(rng);
        for (Eigen::Index i = 0; i < dim; ++i)
            e2(i) = cn(rng);
        const double g1 = chi(rng);
        const CVector sig = gain * (s * xi);
        for (std::size_t j = 0; j < nus.size(); ++j) {
            const double num = (sig + std::sqrt(nus[j]) * e2).squaredNorm();
            if (num < t * nus[j] * g1)
                ++misses[j];
        }
    }
    return misses;
}

/// Reduced estimator: per frame g = R^{1/2} xi, MD iff
/// ||sqrt(L/N_t) g + z_2||^2 < t ||z_1||^2 with t = gamma / (1 - gamma).
/// ||z_1||^2 / nu is drawn directly as Gamma(K N_r (L - N_t), 1). All SNR
/// points reuse each frame's draws.
inline std::vector<ResultRow> run_md_reduced(const ExperimentConfig &cfg, const RunOptions &opt = {}) {
    cfg.validate();
    const DetectionDims dims = approach_dims(cfg);
    const double gamma = threshold_from_fa(cfg.p_fa_target, dims);
    const double t = gamma / (1.0 - gamma);
    const auto corr = correlation_matrix(cfg.channel_config());
    const double gain = std::sqrt(static_cast<double>(dims.l) / dims.nt);
    const double z1_shape = static_cast<double>(dims.k) * dims.nr * (dims.l - dims.nt);
    std::vector<double> nus;
    for (double s : cfg.snr_db)
        nus.push_back(snr_to_noise_var(s));

    auto drop_fn = [&](int d) {
        const std::uint64_t ds = drop_seed(cfg.master_seed, d);
        const Codebook cb = whiten_combiners(approach_codebook(cfg, ds));
        const auto cov = drop_covariance(cfg, cb, corr, ds);
        const CMatrix s = psd_sqrt(cov.r);
        DropResult res;
        record_spectrum(res, cov);
        res.trials = cfg.frames_per_drop;
        Rng rng(mix(ds, stream::frames));
        res.misses = reduced_frame_misses(s, gain, t, z1_shape, nus, cfg.frames_per_drop, rng);
        return res;
    };
    return reduce_drops(cfg, run_drops(cfg.drops, opt, drop_fn), gamma, dims);
}

/// Full estimator: channel realization, frame synthesis and the GLRT
/// statistic per frame; MD iff not detected.
inline std::vector<ResultRow> run_md_full(const ExperimentConfig &cfg, const RunOptions &opt = {}) {
    cfg.validate();
    const DetectionDims dims = approach_dims(cfg);
    const double gamma = threshold_from_fa(cfg.p_fa_target, dims);
    const ChannelConfig ch = cfg.channel_config();
    const auto corr = correlation_matrix(ch);
    const SyncSignal sig = make_sync_signal(dims.nt, cfg.l, cfg.k);
    std::vector<double> nus;
    for (double s : cfg.snr_db)
        nus.push_back(snr_to_noise_var(s));

    auto drop_fn = [&](int d) {
        const std::uint64_t ds = drop_seed(cfg.master_seed, d);
        const Codebook cb = approach_codebook(cfg, ds);
        PathSet paths;
        const auto cov = drop_covariance(cfg, whiten_combiners(cb), corr, ds, &paths);
        DropResult res;
        record_spectrum(res, cov);
        res.misses.assign(nus.size(), 0);
        res.trials = cfg.frames_per_drop;
        const std::uint64_t frames = mix(ds, stream::frames);
        for (int f = 0; f < cfg.frames_per_drop; ++f) {
            const std::uint64_t fs = mix(frames, static_cast<std::uint64_t>(f));
            const ChannelRealization h = ch.model == ChannelModel::iid
                                             ? iid_channel(ch, corr, mix(fs, stream::fading))
                                             : realize_channel(ch, paths, corr, mix(fs, stream::fading));
            const SyncFrame signal = synthesize(cb, sig, h, 0.0, Hypothesis::h1, mix(fs, stream::noise));
            const SyncFrame noise = synthesize(cb, sig, h, 1.0, Hypothesis::h0, mix(fs, stream::noise));
            for (std::size_t j = 0; j < nus.size(); ++j) {
                SyncFrame y = signal;
                y.noise_var = nus[j];
                for (std::size_t k = 0; k < y.y.size(); ++k)
                    y.y[k] += std::sqrt(nus[j]) * noise.y[k];
                if (!decide(glrt_statistic(y, cb, sig), gamma).detected)
                    ++res.misses[j];
            }
        }
        return res;
    };
    return reduce_drops(cfg, run_drops(cfg.drops, opt, drop_fn), gamma, dims);
}

struct FaEstimate {
    double gamma = 0.0;
    double p_fa_hat = 0.0;
    double p_fa_stderr = 0.0;
    long long trials = 0;
};

/// Empirical false alarm of noise-only frames at threshold gamma, over
/// drops x frames_per_drop trials.
inline FaEstimate estimate_fa(const ExperimentConfig &cfg, double gamma, const RunOptions &opt = {}) {
    cfg.validate();
    const DetectionDims dims = approach_dims(cfg);
    const SyncSignal sig = make_sync_signal(dims.nt, cfg.l, cfg.k);
    const ChannelRealization none{};
    auto drop_fn = [&](int d) {
        const std::uint64_t ds = drop_seed(cfg.master_seed, d);
        const Codebook cb = approach_codebook(cfg, ds);
        DropResult res;
        res.misses.assign(1, 0); // counts alarms here
        res.trials = cfg.frames_per_drop;
        const std::uint64_t frames = mix(ds, stream::frames);
        for (int f = 0; f < cfg.frames_per_drop; ++f) {
            const std::uint64_t fs = mix(frames, static_cast<std::uint64_t>(f));
            const SyncFrame y = synthesize(cb, sig, none, 1.0, Hypothesis::h0, mix(fs, stream::noise));
            if (decide(glrt_statistic(y, cb, sig), gamma).detected)
                ++res.misses[0];
        }
        return res;
    };
    const auto drops = run_drops(cfg.drops, opt, drop_fn);
    FaEstimate out;
    out.gamma = gamma;
    long long hits = 0;
    for (const auto &d : drops) {
        if (d.skipped)
            continue;
        hits += d.misses[0];
        out.trials += d.trials;
    }
    out.p_fa_hat = out.trials > 0 ? static_cast<double>(hits) / static_cast<double>(out.trials) : 0.0;
    out.p_fa_stderr = binomial_stderr(out.p_fa_hat, out.trials);
    return out;
}

/// One row per SNR point for the configured approach and estimator.
inline std::vector<ResultRow> sweep(const ExperimentConfig &cfg, const RunOptions &opt = {}) {
    if (cfg.snr_db.empty())
        return {};
    return cfg.estimator == Estimator::full ? run_md_full(cfg, opt) : run_md_reduced(cfg, opt);
}

// ---- diversity slope ---------------------------------------------------

/// (log10 p1 - log10 p2) / ((s2 - s1) / 10); empty when either MD is outside
/// (0, 0.1).
inline std::optional<double> estimate_slope(const ResultRow &a, const ResultRow &b) {
    const ResultRow &lo = a.snr_db <= b.snr_db ? a : b;
    const ResultRow &hi = a.snr_db <= b.snr_db ? b : a;
    auto in_regime = [](double p) { return p > 0.0 && p < 0.1; };
    if (!in_regime(lo.p_md_hat) || !in_regime(hi.p_md_hat) || hi.snr_db == lo.snr_db)
        return std::nullopt;
    return (std::log10(lo.p_md_hat) - std::log10(hi.p_md_hat)) / ((hi.snr_db - lo.snr_db) / 10.0);
}

struct SlopeFit {
    double slope = 0.0; // magnitude of d log10 P / d (SNR_dB / 10)
    int points = 0;
};

/// Least-squares slope of log10 MD against SNR/10 dB over rows whose MD lies
/// in [lo, hi].
inline std::optional<SlopeFit> fit_slope(const std::vector<ResultRow> &rows, double lo = 1e-3, double hi = 1e-1) {
    std::vector<double> xs, ys;
    for (const auto &r : rows)
        if (r.p_md_hat >= lo && r.p_md_hat <= hi) {
            xs.push_back(r.snr_db / 10.0);
            ys.push_back(std::log10(r.p_md_hat));
        }
    if (xs.size() < 2)
        return std::nullopt;
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0)
        return std::nullopt;
    return SlopeFit{-sxy / sxx, static_cast<int>(xs.size())};
}

/// Number of adjacent SNR pairs where MD rises by more than 3 combined stderr.
inline int monotonicity_violations(const std::vector<ResultRow> &rows) {
    int v = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double se = std::hypot(rows[i].p_md_stderr, rows[i - 1].p_md_stderr);
        if (rows[i].snr_db > rows[i - 1].snr_db && rows[i].p_md_hat - rows[i - 1].p_md_hat > 3.0 * se)
            ++v;
    }
    return v;
}

// ---- CSV ---------------------------------------------------------------

inline constexpr const char *csv_header =
    "approach,k,snr_db,gamma,p_fa_target,p_md_hat,p_md_stderr,p_md_asym,trials,seed";

inline std::string format_row(const ResultRow &r) {
    char buf[512];
    char asym[64] = "";
    if (r.p_md_asym)
        std::snprintf(asym, sizeof asym, "%.10g", *r.p_md_asym);
    std::snprintf(buf, sizeof buf, "%s,%d,%.6g,%.15g,%.6g,%.10g,%.10g,%s,%lld,%llu", r.approach.c_str(), r.k,
                  r.snr_db, r.gamma, r.p_fa_target, r.p_md_hat, r.p_md_stderr, asym, r.trials,
                  static_cast<unsigned long long>(r.seed));
    return buf;
}

inline void write_csv(std::ostream &os, const std::vector<ResultRow> &rows, bool header = true) {
    if (header)
        os << csv_header << '\n';
    for (const auto &r : rows)
        os << format_row(r) << '\n';
}

} // namespace omnisync

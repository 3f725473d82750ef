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

// Geometric multipath channel with angles fixed per drop and Jakes-correlated
// path gains across the K synchronization slots, plus the i.i.d. limit.

#include "codebook.hpp"
#include "common.hpp"
#include "linalg.hpp"
#include "special.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <vector>

namespace omnisync {

enum class ChannelModel { geometric, iid };

inline std::string_view to_string(ChannelModel m) { return m == ChannelModel::iid ? "iid" : "geometric"; }

// 30 km/h at 30 GHz.
inline constexpr double default_doppler_hz = (30.0 / 3.6) * 30e9 / 3e8;
inline constexpr double default_slot_interval_s = 0.5e-3;

struct ChannelConfig {
    int mt = 64;
    int mr = 16;
    int paths = 1;
    std::vector<double> beta{1.0};
    double doppler_hz = default_doppler_hz;
    double slot_interval_s = default_slot_interval_s;
    int k = 1;
    ChannelModel model = ChannelModel::geometric;

    /// Equal path powers 1/P.
    static std::vector<double> uniform_beta(int p) {
        require(p >= 1, "channel: path count must be >= 1");
        return std::vector<double>(static_cast<std::size_t>(p), 1.0 / p);
    }

    void validate() const {
        require(mt >= 1 && mr >= 1, "channel: antenna counts must be >= 1");
        require(k >= 1, "channel: K must be >= 1");
        require(doppler_hz >= 0.0, "channel: Doppler frequency must be >= 0");
        require(slot_interval_s > 0.0, "channel: slot interval must be > 0");
        if (model == ChannelModel::geometric) {
            require(paths >= 1, "channel: path count must be >= 1");
            require(static_cast<int>(beta.size()) == paths, "channel: need one power per path");
            for (double b : beta)
                require(b >= 0.0, "channel: path powers must be nonnegative");
            const double s = std::accumulate(beta.begin(), beta.end(), 0.0);
            require(std::fabs(s - 1.0) <= 1e-12, "channel: path powers must sum to 1");
        }
    }
};

struct PathSet {
    std::vector<double> theta_r;
    std::vector<double> theta_t;

    std::size_t size() const { return theta_r.size(); }
};

struct TemporalCorrelation {
    RMatrix psi;
    RMatrix sqrt_factor; // S with S S^T = clamped psi
    bool full_rank = true;
};

struct ChannelRealization {
    CMatrix alpha;          // P x K (empty for the i.i.d. model)
    std::vector<CMatrix> h; // K matrices M_r x M_t
};

/// psi_{kl} = J0(2 pi f_d T_s |k - l|) and its clamped eigen square root.
inline TemporalCorrelation correlation_matrix(const ChannelConfig &cfg) {
    require(cfg.k >= 1, "correlation_matrix: K must be >= 1");
    const int k = cfg.k;
    const double x = 2.0 * pi * cfg.doppler_hz * cfg.slot_interval_s;
    TemporalCorrelation c;
    c.psi.resize(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            c.psi(a, b) = (a == b) ? 1.0 : bessel_j0(x * std::abs(a - b));
    if (x == 0.0) {
        // all-ones psi has the exact factor 11^T / sqrt(K); this keeps
        // block-fading gains bit-identical across slots
        c.sqrt_factor = RMatrix::Constant(k, k, 1.0 / std::sqrt(static_cast<double>(k)));
    } else {
        c.sqrt_factor = psd_sqrt(c.psi);
    }
    c.full_rank = hermitian_eigenvalues(c.psi.cast<cdouble>()).rank == k;
    return c;
}

/// P arrival and departure virtual angles, i.i.d. uniform on [0, 1).
inline PathSet sample_paths(const ChannelConfig &cfg, std::uint64_t seed) {
    require(cfg.model == ChannelModel::geometric, "sample_paths: model must be geometric");
    require(cfg.paths >= 1, "sample_paths: path count must be >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PathSet ps;
    for (int p = 0; p < cfg.paths; ++p) {
        ps.theta_r.push_back(u(rng));
        ps.theta_t.push_back(u(rng));
    }
    return ps;
}

/// K-vector S xi with xi i.i.d. CN(0, 1).
inline CVector correlated_gains(const RMatrix &s, Rng &rng) {
    ComplexNormal cn;
    CVector xi(s.cols());
    for (Eigen::Index i = 0; i < xi.size(); ++i)
        xi(i) = cn(rng);
    return s.cast<cdouble>() * xi;
}

/// H_k = sum_p alpha_{p,k} u(theta_r,p) v^H(theta_t,p).
inline std::vector<CMatrix> assemble_channel(const ChannelConfig &cfg, const PathSet &paths, const CMatrix &alpha) {
    std::vector<CMatrix> h(static_cast<std::size_t>(cfg.k), CMatrix::Zero(cfg.mr, cfg.mt));
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const CMatrix outer = steering(paths.theta_r[p], cfg.mr) * steering(paths.theta_t[p], cfg.mt).adjoint();
        for (int k = 0; k < cfg.k; ++k)
            h[static_cast<std::size_t>(k)] += alpha(static_cast<Eigen::Index>(p), k) * outer;
    }
    return h;
}

inline ChannelRealization realize_channel(const ChannelConfig &cfg, const PathSet &paths,
                                          const TemporalCorrelation &corr, std::uint64_t seed) {
    require(static_cast<int>(paths.size()) == cfg.paths && paths.theta_t.size() == paths.theta_r.size(),
            "realize_channel: path set does not match the configured path count");
    require(static_cast<int>(cfg.beta.size()) == cfg.paths, "realize_channel: need one power per path");
    require(corr.sqrt_factor.rows() == cfg.k && corr.sqrt_factor.cols() == cfg.k,
            "realize_channel: correlation factor must be K x K");
    Rng rng(seed);
    ChannelRealization r;
    r.alpha.resize(cfg.paths, cfg.k);
    for (int p = 0; p < cfg.paths; ++p)
        r.alpha.row(p) = std::sqrt(cfg.beta[static_cast<std::size_t>(p)]) *
                         correlated_gains(corr.sqrt_factor, rng).transpose();
    r.h = assemble_channel(cfg, paths, r.alpha);
    return r;
}

/// Every entry of H carries an independent S-correlated K-vector, so
/// E{vec(H_k) vec(H_l)^H} = psi_{kl} I.
inline ChannelRealization iid_channel(const ChannelConfig &cfg, const TemporalCorrelation &corr,
                                      std::uint64_t seed) {
    require(cfg.model == ChannelModel::iid, "iid_channel: model must be iid");
    require(corr.sqrt_factor.rows() == cfg.k, "iid_channel: correlation factor must be K x K");
    Rng rng(seed);
    ChannelRealization r;
    r.h.assign(static_cast<std::size_t>(cfg.k), CMatrix(cfg.mr, cfg.mt));
    for (int j = 0; j < cfg.mt; ++j)
        for (int i = 0; i < cfg.mr; ++i) {
            const CVector g = correlated_gains(corr.sqrt_factor, rng);
            for (int k = 0; k < cfg.k; ++k)
                r.h[static_cast<std::size_t>(k)](i, j) = g(k);
        }
    return r;
}

inline ChannelRealization iid_channel(const ChannelConfig &cfg, std::uint64_t seed) {
    return iid_channel(cfg, correlation_matrix(cfg), seed);
}

} // namespace omnisync

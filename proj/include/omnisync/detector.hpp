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

// Synchronization frames under both hypotheses and the GLRT statistic.

#include "analysis.hpp"
#include "channel.hpp"
#include "codebook.hpp"
#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace omnisync {

enum class Hypothesis { h0, h1 };

struct SyncSignal {
    int l = 0;
    std::vector<CMatrix> x; // K matrices N_t x L
};

struct SyncFrame {
    std::vector<CMatrix> y; // K matrices N_r x L
    Hypothesis hypothesis = Hypothesis::h1;
    double noise_var = 1.0;
};

struct DetectorOutput {
    double t = 0.0;
    double t_raw = 0.0;
    double gamma = 0.0;
    bool detected = false;
};

/// X = (1/sqrt(N_t)) times the first N_t rows of the L-point DFT matrix
/// (entries e^{-j 2 pi n l / L}), so X X^H = (L / N_t) I.
inline CMatrix harmonic_rows(int nt, int l) {
    require(nt >= 1 && l >= 1, "make_sync_signal: sizes must be >= 1");
    require(nt <= l, "make_sync_signal: N_t must not exceed L");
    CMatrix x(nt, l);
    const double scale = 1.0 / std::sqrt(static_cast<double>(nt));
    for (int n = 0; n < nt; ++n)
        for (int c = 0; c < l; ++c) {
            const long long e = (static_cast<long long>(n) * c) % l;
            x(n, c) = scale * std::exp(-I * (2.0 * pi * static_cast<double>(e) / l));
        }
    return x;
}

inline SyncSignal make_sync_signal(int nt, int l, int k) {
    require(k >= 1, "make_sync_signal: K must be >= 1");
    SyncSignal s;
    s.l = l;
    s.x.assign(static_cast<std::size_t>(k), harmonic_rows(nt, l));
    return s;
}

inline void check_frame_dims(const Codebook &cb, const SyncSignal &sig) {
    cb.validate_shape();
    require(static_cast<int>(sig.x.size()) == cb.k, "detector: signal must have K slots");
    for (const auto &x : sig.x)
        require(x.rows() == cb.nt && x.cols() == sig.l, "detector: signal slot must be N_t x L");
}

/// Y_k = F_k^H H_k W_k X_k + F_k^H Z_k under H1, F_k^H Z_k under H0, with
/// Z_k entries CN(0, nu).
inline SyncFrame synthesize(const Codebook &cb, const SyncSignal &sig, const ChannelRealization &ch,
                            double noise_var, Hypothesis hyp, std::uint64_t seed) {
    check_frame_dims(cb, sig);
    require(noise_var >= 0.0, "synthesize: noise variance must be >= 0");
    if (hyp == Hypothesis::h1) {
        require(static_cast<int>(ch.h.size()) == cb.k, "synthesize: channel must have K slots");
        for (const auto &h : ch.h)
            require(h.rows() == cb.mr && h.cols() == cb.mt, "synthesize: channel slot must be M_r x M_t");
    }
    Rng rng(seed);
    const double sd = std::sqrt(noise_var);
    SyncFrame fr;
    fr.hypothesis = hyp;
    fr.noise_var = noise_var;
    for (int k = 0; k < cb.k; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const CMatrix z = sd * complex_normal_matrix(rng, cb.mr, sig.l);
        CMatrix y = cb.f[ks].adjoint() * z;
        if (hyp == Hypothesis::h1)
            y += cb.f[ks].adjoint() * ch.h[ks] * cb.w[ks] * sig.x[ks];
        fr.y.push_back(std::move(y));
    }
    return fr;
}

/// T = sum_k tr(Y X^H (X X^H)^{-1} X Y^H C) / sum_k tr(Y Y^H C), C = (F^H F)^{-1}.
///
/// T_raw is the maximized log-likelihood difference: noise variance and
/// effective channel are replaced by their ML estimates under each
/// hypothesis.
inline DetectorOutput glrt_statistic(const SyncFrame &fr, const Codebook &cb, const SyncSignal &sig) {
    check_frame_dims(cb, sig);
    require(static_cast<int>(fr.y.size()) == cb.k, "glrt_statistic: frame must have K slots");
    double num = 0.0, den = 0.0, resid = 0.0, logdet = 0.0;
    for (int k = 0; k < cb.k; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const CMatrix &y = fr.y[ks];
        const CMatrix &x = sig.x[ks];
        require(y.rows() == cb.nr && y.cols() == sig.l, "glrt_statistic: observation must be N_r x L");
        const CMatrix ff = cb.f[ks].adjoint() * cb.f[ks];
        Eigen::LLT<CMatrix> llt_f(ff);
        require(llt_f.info() == Eigen::Success, "glrt_statistic: F_k must have full column rank");
        const CMatrix xx = x * x.adjoint();
        Eigen::LLT<CMatrix> llt_x(xx);
        require(llt_x.info() == Eigen::Success, "glrt_statistic: X_k X_k^H must be invertible");

        // G = Y X^H (X X^H)^{-1}, the ML effective channel under H1
        const CMatrix g = llt_x.solve((y * x.adjoint()).adjoint()).adjoint();
        const CMatrix e = y - g * x;
        num += (llt_f.solve(g * x * y.adjoint())).trace().real();
        den += (llt_f.solve(y * y.adjoint())).trace().real();
        resid += (llt_f.solve(e * e.adjoint())).trace().real();
        logdet += 2.0 * llt_f.matrixLLT().diagonal().real().array().log().sum();
    }
    if (!(den > 0.0))
        throw UndefinedStatistic("glrt_statistic: observation is identically zero");

    DetectorOutput out;
    out.t = std::clamp(num / den, 0.0, 1.0);

    const double n = static_cast<double>(cb.k) * sig.l * cb.nr;
    auto loglik = [&](double ss) {
        const double nu_hat = ss / n;
        if (nu_hat <= 0.0)
            return std::numeric_limits<double>::infinity();
        return -n * std::log(pi * nu_hat) - sig.l * logdet - n;
    };
    const double l1 = loglik(resid);
    const double l0 = loglik(den);
    out.t_raw = std::isinf(l1) ? l1 : std::max(l1 - l0, 0.0);
    return out;
}

/// Detected iff T > gamma (strict).
inline DetectorOutput decide(DetectorOutput out, double gamma) {
    out.gamma = gamma;
    out.detected = out.t > gamma;
    return out;
}

/// gamma with fa_closed_form(gamma) = target, by bisection on the log scale
/// of the (strictly decreasing) false-alarm probability.
inline double threshold_from_fa(double p_fa_target, const DetectionDims &dims) {
    require(p_fa_target > 0.0 && p_fa_target < 1.0, "threshold_from_fa: target must be in (0, 1)");
    dims.validate();
    const double target = std::log(p_fa_target);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (fa_closed_form(mid, dims).log_value > target)
            lo = mid;
        else
            hi = mid;
    }
    const double flo = std::fabs(fa_closed_form(lo, dims).log_value - target);
    const double fhi = std::fabs(fa_closed_form(hi, dims).log_value - target);
    return flo <= fhi ? lo : hi;
}

} // namespace omnisync

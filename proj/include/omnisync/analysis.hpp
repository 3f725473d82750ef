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

// Effective-channel covariance R and the analytic predictions built on it:
// the high-SNR missed-detection asymptote, the generalized F-ratio lower-tail
// approximation, chi-square mixture moments and the closed-form false alarm.

#include "channel.hpp"
#include "codebook.hpp"
#include "common.hpp"
#include "linalg.hpp"
#include "special.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace omnisync {

enum class ModelTag { single_path, iid, general };

struct EffectiveCovariance {
    CMatrix r;                   // K N_r N_t square, Hermitian PSD
    std::vector<double> eigs;    // nonincreasing
    int rank = 0;
    ModelTag tag = ModelTag::general;
    std::optional<RMatrix> reduced; // Psi diag(a_k^H a_k), single-path only
    bool psi_full_rank = true;

    /// The r nonzero eigenvalues.
    std::span<const double> nonzero_eigs() const {
        return {eigs.data(), static_cast<std::size_t>(rank)};
    }
};

inline EffectiveCovariance finalize_covariance(CMatrix r, ModelTag tag) {
    EffectiveCovariance c;
    c.r = std::move(r);
    c.tag = tag;
    const Spectrum s = hermitian_eigenvalues(c.r);
    c.eigs = s.eigenvalues;
    c.rank = s.rank;
    return c;
}

/// a = (W^T v*(theta_t)) kron (F^H u(theta_r)), i.e. vec(F^H u v^H W) in
/// column-major order (index n_t N_r + n_r).
inline CVector effective_vector(const CMatrix &w, const CMatrix &f, double theta_r, double theta_t) {
    const CVector tx = w.transpose() * steering(theta_t, static_cast<int>(w.rows())).conjugate();
    const CVector rx = f.adjoint() * steering(theta_r, static_cast<int>(f.rows()));
    CVector a(tx.size() * rx.size());
    for (Eigen::Index j = 0; j < tx.size(); ++j)
        a.segment(j * rx.size(), rx.size()) = tx(j) * rx;
    return a;
}

inline void check_psi(const RMatrix &psi, int k, const char *who) {
    require(psi.rows() == k && psi.cols() == k, std::string(who) + ": psi must be K x K");
}

/// R_{kl} = psi_{kl} sum_p beta_p a_{k,p} a_{l,p}^H.
inline EffectiveCovariance build_R_general(const Codebook &cb, const PathSet &paths, const std::vector<double> &beta,
                                           const RMatrix &psi) {
    cb.validate_shape();
    check_psi(psi, cb.k, "build_R_general");
    require(paths.theta_r.size() == paths.theta_t.size() && paths.size() == beta.size() && !beta.empty(),
            "build_R_general: need one power per path");
    const Eigen::Index d = static_cast<Eigen::Index>(cb.nr) * cb.nt;
    std::vector<std::vector<CVector>> a(paths.size());
    for (std::size_t p = 0; p < paths.size(); ++p)
        for (int k = 0; k < cb.k; ++k)
            a[p].push_back(effective_vector(cb.w[static_cast<std::size_t>(k)], cb.f[static_cast<std::size_t>(k)],
                                            paths.theta_r[p], paths.theta_t[p]));
    CMatrix r = CMatrix::Zero(cb.k * d, cb.k * d);
    for (int k = 0; k < cb.k; ++k)
        for (int l = 0; l < cb.k; ++l) {
            CMatrix block = CMatrix::Zero(d, d);
            for (std::size_t p = 0; p < paths.size(); ++p)
                block += beta[p] * a[p][static_cast<std::size_t>(k)] * a[p][static_cast<std::size_t>(l)].adjoint();
            r.block(k * d, l * d, d, d) = psi(k, l) * block;
        }
    auto c = finalize_covariance(std::move(r), paths.size() == 1 ? ModelTag::single_path : ModelTag::general);
    c.psi_full_rank = hermitian_eigenvalues(psi.cast<cdouble>()).rank == cb.k;
    return c;
}

/// R = A Psi A^H with A = blockdiag(a_1..a_K), together with the K x K
/// matrix Psi diag(a_k^H a_k) that shares its nonzero eigenvalues.
inline EffectiveCovariance build_R_single_path(const Codebook &cb, double theta_r, double theta_t,
                                               const RMatrix &psi) {
    cb.validate_shape();
    check_psi(psi, cb.k, "build_R_single_path");
    const Eigen::Index d = static_cast<Eigen::Index>(cb.nr) * cb.nt;
    std::vector<CVector> a;
    RVector norms(cb.k);
    for (int k = 0; k < cb.k; ++k) {
        a.push_back(effective_vector(cb.w[static_cast<std::size_t>(k)], cb.f[static_cast<std::size_t>(k)], theta_r,
                                     theta_t));
        norms(k) = a.back().squaredNorm();
    }
    CMatrix r(cb.k * d, cb.k * d);
    for (int k = 0; k < cb.k; ++k)
        for (int l = 0; l < cb.k; ++l)
            r.block(k * d, l * d, d, d) = psi(k, l) * a[static_cast<std::size_t>(k)] *
                                          a[static_cast<std::size_t>(l)].adjoint();
    auto c = finalize_covariance(std::move(r), ModelTag::single_path);
    c.reduced = psi * norms.asDiagonal();
    c.psi_full_rank = hermitian_eigenvalues(psi.cast<cdouble>()).rank == cb.k;
    return c;
}

/// Eigenvalues of Psi diag(n) through the similar symmetric matrix
/// diag(sqrt n) Psi diag(sqrt n); nonincreasing.
inline std::vector<double> reduced_eigenvalues(const RMatrix &psi, const RVector &norms) {
    const RVector s = norms.cwiseMax(0.0).cwiseSqrt();
    const RMatrix sym = s.asDiagonal() * psi * s.asDiagonal();
    return hermitian_eigenvalues(sym.cast<cdouble>()).eigenvalues;
}

/// Blocks psi_{kl} (W_k^T W_l^*) kron (F_k^H F_l).
inline EffectiveCovariance build_R_iid(const Codebook &cb, const RMatrix &psi) {
    cb.validate_shape();
    check_psi(psi, cb.k, "build_R_iid");
    const Eigen::Index d = static_cast<Eigen::Index>(cb.nr) * cb.nt;
    CMatrix r(cb.k * d, cb.k * d);
    for (int k = 0; k < cb.k; ++k)
        for (int l = 0; l < cb.k; ++l) {
            const CMatrix tx = cb.w[static_cast<std::size_t>(k)].transpose() * cb.w[static_cast<std::size_t>(l)].conjugate();
            const CMatrix rx = cb.f[static_cast<std::size_t>(k)].adjoint() * cb.f[static_cast<std::size_t>(l)];
            CMatrix block(d, d);
            for (Eigen::Index i = 0; i < tx.rows(); ++i)
                for (Eigen::Index j = 0; j < tx.cols(); ++j)
                    block.block(i * rx.rows(), j * rx.cols(), rx.rows(), rx.cols()) = tx(i, j) * rx;
            r.block(k * d, l * d, d, d) = psi(k, l) * block;
        }
    auto c = finalize_covariance(std::move(r), ModelTag::iid);
    c.psi_full_rank = hermitian_eigenvalues(psi.cast<cdouble>()).rank == cb.k;
    return c;
}

struct DetectionDims {
    int k = 1;
    int l = 64;
    int nr = 2;
    int nt = 2;

    long long observations() const { return static_cast<long long>(k) * l * nr; }     // K L N_r
    long long signal_dims() const { return static_cast<long long>(k) * nr * nt; }     // K N_r N_t
    void validate() const {
        require(k >= 1 && l >= 1 && nr >= 1 && nt >= 1, "dimensions must be >= 1");
        require(signal_dims() < observations(), "need K N_r N_t < K L N_r (N_t < L)");
    }
};

/// (N_t nu gamma / (L (1 - gamma)))^r C(K L N_r - 1, r) prod lambda_m^{-1}
/// over the r nonzero eigenvalues.
inline Probability asymptotic_md(std::span<const double> nonzero_eigs, double gamma, double noise_var,
                                 const DetectionDims &dims) {
    dims.validate();
    const int r = static_cast<int>(nonzero_eigs.size());
    if (r == 0)
        throw DomainError("asymptotic_md: covariance has rank 0 (no signal)");
    require(gamma > 0.0 && gamma < 1.0, "asymptotic_md: gamma must be in (0, 1)");
    require(noise_var > 0.0, "asymptotic_md: noise variance must be > 0");
    double lv = r * std::log(dims.nt * noise_var * gamma / (dims.l * (1.0 - gamma)));
    lv += log_binomial(static_cast<double>(dims.observations() - 1), r);
    for (double lam : nonzero_eigs) {
        require(lam > 0.0, "asymptotic_md: eigenvalues must be positive");
        lv -= std::log(lam);
    }
    return Probability::from_log(lv);
}

inline Probability asymptotic_md(const EffectiveCovariance &cov, double gamma, double noise_var,
                                 const DetectionDims &dims) {
    return asymptotic_md(cov.nonzero_eigs(), gamma, noise_var, dims);
}

/// Ratio of independent weighted chi-square sums
/// sum_m lambda_m |x_m|^2 / sum_n sigma_n |y_n|^2.
struct GeneralizedFRatio {
    std::vector<double> lambda;
    std::vector<double> sigma;

    void validate() const {
        require(!lambda.empty() && !sigma.empty(), "generalized F ratio: need M, N >= 1");
        for (double v : lambda)
            require(v > 0.0, "generalized F ratio: variances must be positive");
        for (double v : sigma)
            require(v > 0.0, "generalized F ratio: variances must be positive");
    }
};

/// Small-t lower tail t^M prod lambda_m^{-1} h_M(sigma), where h_M is the
/// complete homogeneous polynomial (the composition sum).
inline Probability lemma1_cdf(const GeneralizedFRatio &ratio, double t) {
    ratio.validate();
    require(t > 0.0, "lemma1_cdf: t must be > 0");
    const int m = static_cast<int>(ratio.lambda.size());
    double lv = m * std::log(t) + log_complete_homogeneous(ratio.sigma, m);
    for (double lam : ratio.lambda)
        lv -= std::log(lam);
    return Probability::from_log(lv);
}

/// E{Y^n} = n! h_n(sigma) for Y = sum_m sigma_m |y_m|^2, y_m ~ CN(0, 1).
inline double chi_moment(std::span<const double> sigma, int n) {
    require(n >= 0, "chi_moment: order must be >= 0");
    require(!sigma.empty(), "chi_moment: need at least one component");
    return std::exp(std::lgamma(n + 1.0) + log_complete_homogeneous(sigma, n));
}

/// (1-gamma)^{n-1} sum_{m<d} C(n-1, m) (gamma/(1-gamma))^m with n = K L N_r,
/// d = K N_r N_t; the binomial terms are accumulated in the log domain.
inline Probability fa_closed_form(double gamma, const DetectionDims &dims) {
    dims.validate();
    require(gamma >= 0.0 && gamma <= 1.0, "fa_closed_form: gamma must be in [0, 1]");
    if (gamma == 0.0)
        return {1.0, 0.0};
    if (gamma == 1.0)
        return {};
    const long long n1 = dims.observations() - 1;
    const long long d = dims.signal_dims();
    const double log_odds = std::log(gamma) - std::log1p(-gamma);
    double term = static_cast<double>(n1) * std::log1p(-gamma); // m = 0
    double lv = term;
    for (long long m = 0; m + 1 < d; ++m) {
        term += std::log(static_cast<double>(n1 - m) / static_cast<double>(m + 1)) + log_odds;
        lv = log_add(lv, term);
    }
    lv = std::min(lv, 0.0);
    return Probability::from_log(lv);
}

} // namespace omnisync

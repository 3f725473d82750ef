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

#include "common.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace omnisync {

inline constexpr double hermitian_tolerance = 1e-10;
inline constexpr double rank_tolerance = 1e-10;

struct Spectrum {
    std::vector<double> eigenvalues; // nonincreasing
    int rank = 0;
};

/// Largest absolute entry of A - A^H relative to max(1, ||A||_max).
inline double hermitian_defect(const CMatrix &a) {
    if (a.size() == 0)
        return 0.0;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

/// Eigenvalues of a Hermitian matrix in nonincreasing order together with the
/// numerical rank (eigenvalues above dim * max_eig * 1e-10).
inline Spectrum hermitian_eigenvalues(const CMatrix &a) {
    require(a.rows() == a.cols(), "hermitian_eigenvalues: matrix must be square");
    require(hermitian_defect(a) <= hermitian_tolerance, "hermitian_eigenvalues: matrix is not Hermitian");
    Spectrum s;
    if (a.rows() == 0)
        return s;
    const CMatrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    require(es.info() == Eigen::Success, "hermitian_eigenvalues: eigensolver failed");
    const RVector &ev = es.eigenvalues();
    s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), std::greater<>());
    const double eps = static_cast<double>(a.rows()) * std::max(s.eigenvalues.front(), 0.0) * rank_tolerance;
    s.rank = static_cast<int>(
        std::count_if(s.eigenvalues.begin(), s.eigenvalues.end(), [eps](double v) { return v > eps; }));
    return s;
}

/// Hermitian square-root factor S of a PSD matrix with S S^H = A after
/// clamping eigenvalues below rel_clamp * max_eig to zero.
inline CMatrix psd_sqrt(const CMatrix &a, double rel_clamp = 1e-10) {
    require(a.rows() == a.cols(), "psd_sqrt: matrix must be square");
    if (a.rows() == 0)
        return a;
    const CMatrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    require(es.info() == Eigen::Success, "psd_sqrt: eigensolver failed");
    const RVector &ev = es.eigenvalues();
    const double floor = rel_clamp * std::max(ev.maxCoeff(), 0.0);
    RVector root(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        root(i) = ev(i) > floor ? std::sqrt(ev(i)) : 0.0;
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

/// Real-symmetric variant used for the temporal correlation matrix.
inline RMatrix psd_sqrt(const RMatrix &a, double rel_clamp = 1e-10) {
    require(a.rows() == a.cols(), "psd_sqrt: matrix must be square");
    if (a.rows() == 0)
        return a;
    const RMatrix h = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
    require(es.info() == Eigen::Success, "psd_sqrt: eigensolver failed");
    const RVector &ev = es.eigenvalues();
    const double floor = rel_clamp * std::max(ev.maxCoeff(), 0.0);
    RVector root(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        root(i) = ev(i) > floor ? std::sqrt(ev(i)) : 0.0;
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

/// Clamped version of a symmetric matrix: the matrix reproduced by psd_sqrt.
inline RMatrix psd_clamp(const RMatrix &a, double rel_clamp = 1e-10) {
    const RMatrix s = psd_sqrt(a, rel_clamp);
    return s * s.transpose();
}

} // namespace omnisync

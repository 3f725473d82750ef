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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace omnisync {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cdouble I{0.0, 1.0};

/// Raised when an operation's preconditions on its arguments are violated.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// The GLRT ratio has a zero denominator (all-zero observation).
class UndefinedStatistic : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A requested analytic evaluation is outside what is implemented.
class Unsupported : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string &msg) {
    if (!cond)
        throw DomainError(msg);
}

constexpr bool is_power_of_two(long long n) { return n > 0 && (n & (n - 1)) == 0; }

// ---- seeding ----------------------------------------------------------

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a stream index. Used for
/// drop seeds (`mix(master, drop)`) and per-purpose substreams, so that the
/// random numbers consumed by a work unit never depend on scheduling.
constexpr std::uint64_t mix(std::uint64_t parent, std::uint64_t index) {
    return splitmix64(parent ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

// Substream tags.
namespace stream {
inline constexpr std::uint64_t paths = 1;
inline constexpr std::uint64_t fading = 2;
inline constexpr std::uint64_t noise = 3;
inline constexpr std::uint64_t codebook = 4;
inline constexpr std::uint64_t frames = 5;
} // namespace stream

using Rng = std::mt19937_64;

/// Circularly-symmetric complex Gaussian sampler, CN(0, 1).
class ComplexNormal {
  public:
    cdouble operator()(Rng &rng) {
        const double re = dist_(rng);
        const double im = dist_(rng);
        return {re, im};
    }

  private:
    std::normal_distribution<double> dist_{0.0, std::numbers::sqrt2 / 2.0};
};

inline CMatrix complex_normal_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols) {
    ComplexNormal cn;
    CMatrix m(rows, cols);
    // column-major fill order is part of the determinism contract
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = cn(rng);
    return m;
}

} // namespace omnisync

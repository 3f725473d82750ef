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

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace omnisync {

/// A probability carried together with its natural logarithm, so that deep
/// tails (1e-300 and below) stay representable.
struct Probability {
    double value = 0.0;
    double log_value = -std::numeric_limits<double>::infinity();

    static Probability from_log(double lv) { return {std::exp(lv), lv}; }
};

/// Bessel function of the first kind, order zero.
///
/// Power series for |x| <= 12 (evaluated in extended precision to absorb the
/// alternating-sum cancellation), Hankel asymptotic expansion above, summed
/// until the terms stop decreasing.
inline double bessel_j0(double x) {
    using ld = long double;
    const ld ax = std::fabs(static_cast<ld>(x));
    if (ax <= 12.0L) {
        const ld q = -ax * ax / 4.0L;
        ld term = 1.0L;
        ld sum = 1.0L;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<ld>(k) * static_cast<ld>(k));
            sum += term;
            if (std::fabs(term) < 1e-21L * std::fabs(sum) && k > 4)
                break;
        }
        return static_cast<double>(sum);
    }

    // P ~ sum_k (-1)^k c_{2k} / x^{2k}, Q ~ sum_k (-1)^k c_{2k+1} / x^{2k+1}
    // with c_n = prod_{i=1..n} (2i-1)^2 / (n! 8^n).
    ld p = 0.0L;
    ld q = 0.0L;
    ld c = 1.0L; // c_n / x^n
    ld prev = std::numeric_limits<ld>::infinity();
    for (int n = 0; n < 100; ++n) {
        if (n > 0) {
            const ld odd = 2.0L * n - 1.0L;
            c *= odd * odd / (static_cast<ld>(n) * 8.0L * ax);
        }
        if (c >= prev)
            break;
        prev = c;
        const int sign = ((n / 2) % 2 == 0) ? 1 : -1;
        if (n % 2 == 0)
            p += sign * c;
        else
            q += sign * c;
        if (c < 1e-22L)
            break;
    }
    // Q carries an overall minus sign: Q = -1/(8x) + ...
    q = -q;
    const ld chi = ax - std::numbers::pi_v<ld> / 4.0L;
    const ld amp = std::sqrt(2.0L / (std::numbers::pi_v<ld> * ax));
    return static_cast<double>(amp * (p * std::cos(chi) - q * std::sin(chi)));
}

/// log C(n, k) through log-gamma; exact small cases through the product.
inline double log_binomial(double n, double k) {
    if (k < 0 || k > n)
        return -std::numeric_limits<double>::infinity();
    if (k == 0 || k == n)
        return 0.0;
    if (n <= 60) {
        double r = 1.0;
        const double kk = std::min(k, n - k);
        for (int i = 1; i <= static_cast<int>(kk); ++i)
            r = r * (n - kk + i) / i;
        return std::log(r);
    }
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity())
        return b;
    if (b == -std::numeric_limits<double>::infinity())
        return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::fabs(a - b)));
}

/// log of the complete homogeneous symmetric polynomial h_n(s_1..s_N),
/// i.e. log sum_{l_1+...+l_N=n} prod s_i^{l_i}, for positive s_i.
///
/// Computed by the recurrence h_j(s_1..s_i) = h_j(s_1..s_{i-1}) + s_i h_{j-1}(s_1..s_i)
/// in the log domain; O(n N) work.
inline double log_complete_homogeneous(std::span<const double> s, int n) {
    if (n < 0)
        throw DomainError("complete homogeneous polynomial: negative degree");
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    std::vector<double> h(static_cast<std::size_t>(n) + 1, ninf);
    h[0] = 0.0;
    for (double si : s) {
        if (!(si > 0.0))
            throw DomainError("complete homogeneous polynomial: variances must be positive");
        const double ls = std::log(si);
        for (int j = 1; j <= n; ++j)
            h[static_cast<std::size_t>(j)] =
                log_add(h[static_cast<std::size_t>(j)], ls + h[static_cast<std::size_t>(j - 1)]);
    }
    return h[static_cast<std::size_t>(n)];
}

} // namespace omnisync

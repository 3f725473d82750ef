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

// Golay complementary pairs, Golay-Hadamard matrices and the per-slot
// precoding/combining codebooks built from them, plus the baseline
// beamformers (Zadoff-Chu, DFT sweep, random phase) and the checks that a
// codebook meets the constant-modulus, flatness, unitarity and cross-slot
// orthogonality conditions.

#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace omnisync {

/// Tolerances used by the codebook checks.
struct CodebookTolerances {
    double modulus = 1e-12;
    double unitarity = 1e-12;
    double flatness = 1e-9;
    double average_coverage = 1e-9;
};

inline constexpr int verification_grid = 8192;
inline constexpr int export_grid = 512;

// ---- binary sequences and Golay pairs ---------------------------------

/// A finite sequence over {+1, -1}.
class BinarySequence {
  public:
    explicit BinarySequence(std::vector<int> entries) : entries_(std::move(entries)) {
        require(!entries_.empty(), "binary sequence must have length >= 1");
        for (int e : entries_)
            require(e == 1 || e == -1, "binary sequence entries must be +1 or -1");
    }

    std::size_t length() const { return entries_.size(); }
    int operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<int> &entries() const { return entries_; }

    friend bool operator==(const BinarySequence &, const BinarySequence &) = default;

  private:
    std::vector<int> entries_;
};

/// Aperiodic autocorrelation r_l = sum_m s_m s_{m+l}, l = 0..M-1, in exact
/// integer arithmetic.
inline std::vector<long long> aperiodic_autocorrelation(const BinarySequence &s) {
    const std::size_t m = s.length();
    std::vector<long long> r(m, 0);
    for (std::size_t lag = 0; lag < m; ++lag)
        for (std::size_t i = 0; i + lag < m; ++i)
            r[lag] += static_cast<long long>(s[i]) * s[i + lag];
    return r;
}

struct GolayPair {
    BinarySequence first;
    BinarySequence second;

    std::size_t length() const { return first.length(); }

    /// Lag-wise sum of the two autocorrelations.
    std::vector<long long> autocorrelation_sum() const {
        auto a = aperiodic_autocorrelation(first);
        const auto b = aperiodic_autocorrelation(second);
        for (std::size_t i = 0; i < a.size(); ++i)
            a[i] += b[i];
        return a;
    }

    /// True iff the autocorrelations sum to 2M at lag 0 and vanish elsewhere.
    bool is_complementary() const {
        if (first.length() != second.length())
            return false;
        const auto sum = autocorrelation_sum();
        if (sum[0] != 2 * static_cast<long long>(length()))
            return false;
        return std::all_of(sum.begin() + 1, sum.end(), [](long long v) { return v == 0; });
    }
};

/// Golay-Rudin-Shapiro recursion: p_M,1 = [p_{M/2},1 ; p_{M/2},2],
/// p_M,2 = [p_{M/2},1 ; -p_{M/2},2], starting from [1], [1].
inline GolayPair golay_pair(long long m) {
    require(is_power_of_two(m), "golay_pair: length must be a power of two");
    std::vector<int> a{1};
    std::vector<int> b{1};
    while (static_cast<long long>(a.size()) < m) {
        std::vector<int> na(a);
        std::vector<int> nb(a);
        na.insert(na.end(), b.begin(), b.end());
        for (int v : b)
            nb.push_back(-v);
        a = std::move(na);
        b = std::move(nb);
    }
    return {BinarySequence(std::move(a)), BinarySequence(std::move(b))};
}

// ---- Golay-Hadamard matrices -------------------------------------------

struct GolayHadamardMatrix {
    int order = 1;
    Eigen::MatrixXi entries;   // P_M
    Eigen::MatrixXi companion; // tilde P_M

    /// Column `n` (1-based) as a binary sequence.
    BinarySequence column(int n) const {
        require(n >= 1 && n <= order, "golay_hadamard: column index out of range");
        std::vector<int> c(static_cast<std::size_t>(order));
        for (int i = 0; i < order; ++i)
            c[static_cast<std::size_t>(i)] = entries(i, n - 1);
        return BinarySequence(std::move(c));
    }
};

/// P_M = [P, P; P~, -P~], P~_M = [P, P; -P~, P~] from P_1 = P~_1 = [1].
inline GolayHadamardMatrix golay_hadamard(long long m) {
    require(is_power_of_two(m), "golay_hadamard: order must be a power of two");
    Eigen::MatrixXi p = Eigen::MatrixXi::Ones(1, 1);
    Eigen::MatrixXi pt = Eigen::MatrixXi::Ones(1, 1);
    while (p.rows() < m) {
        const Eigen::Index h = p.rows();
        Eigen::MatrixXi np(2 * h, 2 * h);
        Eigen::MatrixXi npt(2 * h, 2 * h);
        np << p, p, pt, -pt;
        npt << p, p, -pt, pt;
        p = std::move(np);
        pt = std::move(npt);
    }
    return {static_cast<int>(m), std::move(p), std::move(pt)};
}

// ---- schedules ---------------------------------------------------------

/// Per-slot base column indices (1-based, in 1..M/2). Slot k uses the column
/// pairs (n, n + M/2) for each listed n.
struct SlotSchedule {
    std::vector<std::vector<int>> base_indices;

    std::size_t slots() const { return base_indices.size(); }

    friend bool operator==(const SlotSchedule &, const SlotSchedule &) = default;
};

/// Default schedule: slot k (1-based), stream pair j (1-based) uses
/// n = ((k - 1) * N/2 + j - 1) mod (M/2) + 1. For N = 2 this is the cyclic
/// index ((k))_{M/2} mapped into 1..M/2.
inline SlotSchedule default_schedule(int m, int n, int k) {
    require(n % 2 == 0 && n >= 2, "default_schedule: stream count must be even and >= 2");
    require(is_power_of_two(m) && m >= 2, "default_schedule: antenna count must be a power of two >= 2");
    const int half = m / 2;
    SlotSchedule s;
    for (int slot = 1; slot <= k; ++slot) {
        std::vector<int> idx;
        for (int j = 1; j <= n / 2; ++j)
            idx.push_back(((slot - 1) * (n / 2) + j - 1) % half + 1);
        s.base_indices.push_back(std::move(idx));
    }
    return s;
}

struct ScheduleReport {
    struct PairResult {
        int k = 0; // 1-based
        int l = 0;
        bool tx_disjoint = false;
        bool rx_disjoint = false;
        bool ok() const { return tx_disjoint || rx_disjoint; }
    };
    std::vector<PairResult> pairs;
    bool pass = true;
};

/// For every slot pair k != l: the transmit index sets or the receive index
/// sets must be disjoint. That is what makes W_k^H W_l = 0 or F_k^H F_l = 0.
inline ScheduleReport verify_schedule(const SlotSchedule &tx, const SlotSchedule &rx, int k) {
    require(static_cast<int>(tx.slots()) == k && static_cast<int>(rx.slots()) == k,
            "verify_schedule: schedules must have K slots");
    auto disjoint = [](const std::vector<int> &a, const std::vector<int> &b) {
        const std::set<int> sa(a.begin(), a.end());
        return std::none_of(b.begin(), b.end(), [&](int v) { return sa.count(v) > 0; });
    };
    ScheduleReport rep;
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) {
            ScheduleReport::PairResult pr{a + 1, b + 1,
                                          disjoint(tx.base_indices[static_cast<std::size_t>(a)],
                                                   tx.base_indices[static_cast<std::size_t>(b)]),
                                          disjoint(rx.base_indices[static_cast<std::size_t>(a)],
                                                   rx.base_indices[static_cast<std::size_t>(b)])};
            rep.pass = rep.pass && pr.ok();
            rep.pairs.push_back(pr);
        }
    return rep;
}

// ---- codebooks ---------------------------------------------------------

enum class Design { omni_golay, quasi_omni_zc, dft_sweep, random_phase, explicit_ };

inline std::string_view to_string(Design d) {
    switch (d) {
    case Design::omni_golay: return "omni-golay";
    case Design::quasi_omni_zc: return "quasi-omni-zc";
    case Design::dft_sweep: return "dft-sweep";
    case Design::random_phase: return "random-phase";
    case Design::explicit_: return "explicit";
    }
    return "explicit";
}

inline std::optional<Design> design_from_string(std::string_view s) {
    for (Design d : {Design::omni_golay, Design::quasi_omni_zc, Design::dft_sweep, Design::random_phase,
                     Design::explicit_})
        if (to_string(d) == s)
            return d;
    return std::nullopt;
}

/// Per-slot precoders W_k (M_t x N_t) and combiners F_k (M_r x N_r).
struct Codebook {
    int k = 0;
    int mt = 0, nt = 0, mr = 0, nr = 0;
    std::vector<CMatrix> w;
    std::vector<CMatrix> f;
    Design design = Design::explicit_;
    std::optional<SlotSchedule> schedule_tx;
    std::optional<SlotSchedule> schedule_rx;

    /// Checks dimensions agree with the declared sizes.
    void validate_shape() const {
        require(k >= 1, "codebook: K must be >= 1");
        require(static_cast<int>(w.size()) == k && static_cast<int>(f.size()) == k,
                "codebook: need one precoder and one combiner per slot");
        for (const auto &m : w)
            require(m.rows() == mt && m.cols() == nt, "codebook: precoder has wrong shape");
        for (const auto &m : f)
            require(m.rows() == mr && m.cols() == nr, "codebook: combiner has wrong shape");
    }
};

/// W = (1/sqrt(M)) [P_M(:, n_1), P_M(:, n_1 + M/2), ..., P_M(:, n_{N/2} + M/2)].
inline CMatrix golay_beamformer(const GolayHadamardMatrix &p, const std::vector<int> &base) {
    const int m = p.order;
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    CMatrix w(m, 2 * static_cast<Eigen::Index>(base.size()));
    Eigen::Index col = 0;
    for (int n : base) {
        for (int c : {n, n + m / 2}) {
            for (int i = 0; i < m; ++i)
                w(i, col) = scale * static_cast<double>(p.entries(i, c - 1));
            ++col;
        }
    }
    return w;
}

inline void check_schedule_shape(const SlotSchedule &s, int m, int n, int k, const char *side) {
    const std::string where = std::string("build_omni_codebook (") + side + "): ";
    require(static_cast<int>(s.slots()) == k, where + "schedule must have K slots");
    for (const auto &slot : s.base_indices) {
        require(static_cast<int>(slot.size()) == n / 2, where + "each slot needs N/2 base indices");
        std::set<int> seen;
        for (int v : slot) {
            require(v >= 1 && v <= m / 2, where + "base index out of 1..M/2");
            require(seen.insert(v).second, where + "base indices within a slot must be distinct");
        }
    }
}

inline Codebook build_omni_codebook(int mt, int nt, int mr, int nr, int k, const SlotSchedule &tx,
                                    const SlotSchedule &rx) {
    require(k >= 1, "build_omni_codebook: K must be >= 1");
    for (auto [m, n, side] : {std::tuple{mt, nt, "tx"}, std::tuple{mr, nr, "rx"}}) {
        require(is_power_of_two(m) && m >= 2, std::string("build_omni_codebook: M_") + side +
                                                  " must be a power of two >= 2");
        require(n % 2 == 0, std::string("build_omni_codebook: N_") + side + " must be even");
        require(n >= 2 && n <= m, std::string("build_omni_codebook: need 2 <= N_") + side + " <= M_" + side);
    }
    check_schedule_shape(tx, mt, nt, k, "tx");
    check_schedule_shape(rx, mr, nr, k, "rx");

    const auto pt = golay_hadamard(mt);
    const auto pr = golay_hadamard(mr);
    Codebook cb;
    cb.k = k;
    cb.mt = mt;
    cb.nt = nt;
    cb.mr = mr;
    cb.nr = nr;
    cb.design = Design::omni_golay;
    for (int s = 0; s < k; ++s) {
        cb.w.push_back(golay_beamformer(pt, tx.base_indices[static_cast<std::size_t>(s)]));
        cb.f.push_back(golay_beamformer(pr, rx.base_indices[static_cast<std::size_t>(s)]));
    }
    cb.schedule_tx = tx;
    cb.schedule_rx = rx;
    return cb;
}

inline Codebook build_omni_codebook(int mt, int nt, int mr, int nr, int k) {
    return build_omni_codebook(mt, nt, mr, nr, k, default_schedule(mt, nt, k), default_schedule(mr, nr, k));
}

/// Zadoff-Chu column: (1/sqrt(L)) exp(-j pi u n^2 / L) for even L,
/// (1/sqrt(L)) exp(-j pi u n (n+1) / L) for odd L.
inline CVector zc_precoder(int length, int root = 1) {
    require(length >= 1, "zc_precoder: length must be >= 1");
    require(std::gcd(root, length) == 1, "zc_precoder: root must be coprime with the length");
    CVector v(length);
    const double scale = 1.0 / std::sqrt(static_cast<double>(length));
    for (int n = 0; n < length; ++n) {
        // reduce the phase numerator modulo 2L before converting to radians
        const long long nn = static_cast<long long>(n);
        const long long num = (length % 2 == 0) ? nn * nn : nn * (nn + 1);
        const long long r = (static_cast<long long>(root) % (2LL * length) + 2LL * length) % (2LL * length);
        const long long phase_num = (r * (num % (2LL * length))) % (2LL * length);
        v(n) = scale * std::exp(-I * pi * static_cast<double>(phase_num) / static_cast<double>(length));
    }
    return v;
}

/// Column k of the M-point DFT: (1/sqrt(M)) [1, e^{j2pi k/M}, ..., e^{j2pi k(M-1)/M}]^T.
inline CVector dft_column(int m, int k) {
    CVector v(m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (int i = 0; i < m; ++i) {
        const long long e = (static_cast<long long>(k) * i) % m;
        v(i) = scale * std::exp(I * (2.0 * pi * static_cast<double>(e) / m));
    }
    return v;
}

/// Omni-golay combiners for every slot, used by the baselines that pair a
/// single-stream precoder with omnidirectional combining.
inline std::vector<CMatrix> omni_combiners(int mr, int nr, int k, SlotSchedule *schedule_out = nullptr) {
    const auto sched = default_schedule(mr, nr, k);
    check_schedule_shape(sched, mr, nr, k, "rx");
    const auto pr = golay_hadamard(mr);
    std::vector<CMatrix> f;
    for (int s = 0; s < k; ++s)
        f.push_back(golay_beamformer(pr, sched.base_indices[static_cast<std::size_t>(s)]));
    if (schedule_out)
        *schedule_out = sched;
    return f;
}

/// Quasi-omnidirectional baseline: ZC precoder (N_t = 1) in every slot,
/// omni-golay combining.
inline Codebook zc_codebook(int mt, int mr, int nr, int k, int root = 1) {
    require(k >= 1, "zc_codebook: K must be >= 1");
    Codebook cb;
    cb.k = k;
    cb.mt = mt;
    cb.nt = 1;
    cb.mr = mr;
    cb.nr = nr;
    cb.design = Design::quasi_omni_zc;
    const CMatrix w = zc_precoder(mt, root);
    SlotSchedule rx;
    cb.f = omni_combiners(mr, nr, k, &rx);
    cb.schedule_rx = rx;
    cb.w.assign(static_cast<std::size_t>(k), w);
    return cb;
}

/// Beam sweep: slot k (1-based) transmits DFT column k. Without combiners
/// (mr = nr = 1) the receive side is a single antenna; otherwise omni-golay
/// combining.
inline Codebook dft_sweep_codebook(int mt, int k, int mr = 1, int nr = 1) {
    require(k >= 1, "dft_sweep_codebook: K must be >= 1");
    require(k <= mt, "dft_sweep_codebook: K must not exceed M_t");
    Codebook cb;
    cb.k = k;
    cb.mt = mt;
    cb.nt = 1;
    cb.mr = mr;
    cb.nr = nr;
    cb.design = Design::dft_sweep;
    for (int s = 1; s <= k; ++s)
        cb.w.push_back(dft_column(mt, s));
    if (mr == 1 && nr == 1) {
        cb.f.assign(static_cast<std::size_t>(k), CMatrix::Ones(1, 1));
    } else {
        SlotSchedule rx;
        cb.f = omni_combiners(mr, nr, k, &rx);
        cb.schedule_rx = rx;
    }
    return cb;
}

/// Entries (1/sqrt(M)) e^{j phi}, phi ~ U[0, 2pi) i.i.d.
inline CMatrix random_phase_matrix(int m, int n, Rng &rng) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    CMatrix w(m, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i)
            w(i, j) = scale * std::exp(I * phase(rng));
    return w;
}

/// Random-phase precoders (M_t x N_t) and combiners (M_r x N_r) for K slots.
inline Codebook random_phase_codebook(int mt, int nt, int mr, int nr, int k, std::uint64_t seed) {
    require(k >= 1 && mt >= 1 && nt >= 1 && mr >= 1 && nr >= 1, "random_phase_codebook: sizes must be >= 1");
    Rng rng(seed);
    Codebook cb;
    cb.k = k;
    cb.mt = mt;
    cb.nt = nt;
    cb.mr = mr;
    cb.nr = nr;
    cb.design = Design::random_phase;
    for (int s = 0; s < k; ++s) {
        cb.w.push_back(random_phase_matrix(mt, nt, rng));
        cb.f.push_back(random_phase_matrix(mr, nr, rng));
    }
    return cb;
}

/// Single-antenna receive side, standard-basis precoders W_k = e_k (K = M_t).
inline Codebook unit_basis_sweep(int mt) {
    Codebook cb;
    cb.k = mt;
    cb.mt = mt;
    cb.nt = 1;
    cb.mr = 1;
    cb.nr = 1;
    for (int s = 0; s < mt; ++s) {
        CMatrix w = CMatrix::Zero(mt, 1);
        w(s, 0) = 1.0;
        cb.w.push_back(w);
        cb.f.push_back(CMatrix::Ones(1, 1));
    }
    return cb;
}

/// Single-antenna receive side, steering precoders
/// W_k = (1/sqrt(M)) [1, e^{j pi k/2}, ...] generalised to e^{j 2 pi k m / M}.
inline Codebook steering_sweep(int mt) {
    Codebook cb;
    cb.k = mt;
    cb.mt = mt;
    cb.nt = 1;
    cb.mr = 1;
    cb.nr = 1;
    for (int s = 1; s <= mt; ++s) {
        cb.w.push_back(dft_column(mt, s));
        cb.f.push_back(CMatrix::Ones(1, 1));
    }
    return cb;
}

// ---- beam patterns -----------------------------------------------------

/// G equally spaced virtual angles g/G, g = 0..G-1.
class AngleGrid {
  public:
    explicit AngleGrid(int g) : g_(g) { require(g >= 1, "AngleGrid: need at least one point"); }

    /// Grid dense enough to determine a beam pattern for arrays of up to
    /// `max_antennas` elements.
    static AngleGrid for_arrays(int max_antennas, int g) {
        require(g >= 2 * max_antennas, "AngleGrid: density must be at least 2 max(M_t, M_r)");
        return AngleGrid(g);
    }

    int size() const { return g_; }
    double operator[](int i) const { return static_cast<double>(i) / g_; }

  private:
    int g_;
};

/// ULA response [1, e^{j2pi theta}, ..., e^{j2pi (M-1) theta}]^T.
inline CVector steering(double theta, int m) {
    CVector v(m);
    for (int i = 0; i < m; ++i) {
        // wrap the phase to [0,1) turns before scaling to keep large-m accuracy
        const double turns = std::fmod(theta * i, 1.0);
        v(i) = std::exp(I * (2.0 * pi * turns));
    }
    return v;
}

/// v^H(theta) W W^H v(theta) = || W^H v(theta) ||^2 at each grid point.
inline std::vector<double> beam_pattern(const CMatrix &w, const AngleGrid &grid) {
    std::vector<double> out(static_cast<std::size_t>(grid.size()));
    const int m = static_cast<int>(w.rows());
    for (int g = 0; g < grid.size(); ++g) {
        const CVector v = steering(grid[g], m);
        out[static_cast<std::size_t>(g)] = (w.adjoint() * v).squaredNorm();
    }
    return out;
}

inline double beam_pattern_at(const CMatrix &w, double theta) {
    return (w.adjoint() * steering(theta, static_cast<int>(w.rows()))).squaredNorm();
}

// ---- verification ------------------------------------------------------

struct ConditionResult {
    std::string name;
    bool pass = false;
    double worst = 0.0; // worst-case deviation measured
    bool applicable = true;
};

struct CodebookReport {
    std::vector<ConditionResult> conditions;
    bool pass() const {
        return std::all_of(conditions.begin(), conditions.end(),
                           [](const ConditionResult &c) { return !c.applicable || c.pass; });
    }
    const ConditionResult *find(std::string_view name) const {
        for (const auto &c : conditions)
            if (c.name == name)
                return &c;
        return nullptr;
    }
};

inline double max_modulus_deviation(const std::vector<CMatrix> &ms, int m) {
    const double target = 1.0 / std::sqrt(static_cast<double>(m));
    double worst = 0.0;
    for (const auto &x : ms)
        worst = std::max(worst, (x.array().abs() - target).abs().maxCoeff());
    return worst;
}

inline double max_unitarity_deviation(const std::vector<CMatrix> &ms) {
    double worst = 0.0;
    for (const auto &x : ms) {
        const CMatrix g = x.adjoint() * x - CMatrix::Identity(x.cols(), x.cols());
        worst = std::max(worst, g.cwiseAbs().maxCoeff());
    }
    return worst;
}

inline double max_flatness_deviation(const std::vector<CMatrix> &ms, const AngleGrid &grid) {
    double worst = 0.0;
    for (const auto &x : ms) {
        const double n = static_cast<double>(x.cols());
        for (double p : beam_pattern(x, grid))
            worst = std::max(worst, std::fabs(p - n));
    }
    return worst;
}

/// Worst deviation of (1/(K N_r N_t)) sum_k txpattern_k(theta_t) rxpattern_k(theta_r)
/// from 1 over a grid product, and the deviation of its grid mean.
inline std::pair<double, double> average_coverage_deviation(const Codebook &cb, const AngleGrid &tx_grid,
                                                            const AngleGrid &rx_grid) {
    std::vector<std::vector<double>> tp, rp;
    for (int s = 0; s < cb.k; ++s) {
        tp.push_back(beam_pattern(cb.w[static_cast<std::size_t>(s)], tx_grid));
        rp.push_back(beam_pattern(cb.f[static_cast<std::size_t>(s)], rx_grid));
    }
    const double norm = static_cast<double>(cb.k) * cb.nr * cb.nt;
    double worst = 0.0;
    double mean = 0.0;
    for (int a = 0; a < tx_grid.size(); ++a)
        for (int b = 0; b < rx_grid.size(); ++b) {
            double s = 0.0;
            for (int kk = 0; kk < cb.k; ++kk)
                s += tp[static_cast<std::size_t>(kk)][static_cast<std::size_t>(a)] *
                     rp[static_cast<std::size_t>(kk)][static_cast<std::size_t>(b)];
            s /= norm;
            worst = std::max(worst, std::fabs(s - 1.0));
            mean += s;
        }
    mean /= static_cast<double>(tx_grid.size()) * rx_grid.size();
    return {worst, std::fabs(mean - 1.0)};
}

/// Worst |W_k^H W_l| entry over pairs where the transmit side is meant to be
/// orthogonal, and likewise for F; a pair passes if either side is orthogonal.
inline double max_cross_slot_leakage(const Codebook &cb) {
    double worst = 0.0;
    for (int a = 0; a < cb.k; ++a)
        for (int b = a + 1; b < cb.k; ++b) {
            const double wt = (cb.w[static_cast<std::size_t>(a)].adjoint() * cb.w[static_cast<std::size_t>(b)])
                                  .cwiseAbs()
                                  .maxCoeff();
            const double fr = (cb.f[static_cast<std::size_t>(a)].adjoint() * cb.f[static_cast<std::size_t>(b)])
                                  .cwiseAbs()
                                  .maxCoeff();
            worst = std::max(worst, std::min(wt, fr));
        }
    return worst;
}

/// Runs every codebook condition: constant modulus, per-slot flatness,
/// unitarity, cross-slot orthogonality and average coverage.
inline CodebookReport verify_codebook(const Codebook &cb, int grid_points = verification_grid,
                                      const CodebookTolerances &tol = {}) {
    cb.validate_shape();
    CodebookReport rep;
    const double dm = std::max(max_modulus_deviation(cb.w, cb.mt), max_modulus_deviation(cb.f, cb.mr));
    rep.conditions.push_back({"constant-modulus", dm <= tol.modulus, dm});

    const AngleGrid grid(grid_points);
    const double df = std::max(max_flatness_deviation(cb.w, grid), max_flatness_deviation(cb.f, grid));
    rep.conditions.push_back({"per-slot-flatness", df <= tol.flatness, df});

    const double du = std::max(max_unitarity_deviation(cb.w), max_unitarity_deviation(cb.f));
    rep.conditions.push_back({"unitarity", du <= tol.unitarity, du});

    const double dx = max_cross_slot_leakage(cb);
    rep.conditions.push_back({"cross-slot-orthogonality", dx <= tol.unitarity, dx, cb.k > 1});

    // the pointwise average-coverage check uses a coarser product grid
    const int g = std::max(2 * std::max(cb.mt, cb.mr), 64);
    const auto [pointwise, mean] = average_coverage_deviation(cb, AngleGrid(g), AngleGrid(g));
    rep.conditions.push_back({"average-coverage", pointwise <= tol.average_coverage, pointwise});
    rep.conditions.push_back({"average-coverage-mean", mean <= 1e-6, mean});
    return rep;
}

} // namespace omnisync

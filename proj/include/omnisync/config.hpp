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

// Experiment configuration: versioned JSON schema, named presets and
// validation that reports every problem with its JSON path.

#include "montecarlo.hpp"

#include <json.hpp>

#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace omnisync {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string> &problems() const { return problems_; }

  private:
    static std::string join(const std::vector<std::string> &ps) {
        std::string s = "invalid experiment config:";
        for (const auto &p : ps)
            s += "\n  " + p;
        return s;
    }
    std::vector<std::string> problems_;
};

/// A config file expands into one ExperimentConfig per approach; all of them
/// share drops and seeds.
struct Experiment {
    ExperimentConfig base;
    std::vector<Design> approaches;
    std::string preset;

    std::vector<ExperimentConfig> runs() const {
        std::vector<ExperimentConfig> out;
        for (Design d : approaches) {
            ExperimentConfig c = base;
            c.approach = d;
            out.push_back(c);
        }
        return out;
    }
};

inline std::vector<double> snr_range(double from, double to, double step) {
    std::vector<double> v;
    const int n = static_cast<int>(std::floor((to - from) / step + 1e-9));
    for (int i = 0; i <= n; ++i)
        v.push_back(from + i * step);
    return v;
}

inline std::map<std::string, Experiment> presets() {
    std::map<std::string, Experiment> m;

    Experiment sec6;
    sec6.preset = "paper-sec6";
    sec6.base.k = 1;
    sec6.base.mt = 64;
    sec6.base.mr = 16;
    sec6.base.nt = 2;
    sec6.base.nr = 2;
    sec6.base.l = 64;
    sec6.base.channel.paths = 1;
    sec6.base.channel.beta = ChannelConfig::uniform_beta(1);
    sec6.base.snr_db = snr_range(-10.0, 10.0, 2.5);
    sec6.base.p_fa_target = 1e-4;
    sec6.base.drops = 500;
    sec6.base.frames_per_drop = 10000;
    sec6.base.master_seed = 20170101;
    sec6.approaches = {Design::omni_golay, Design::quasi_omni_zc, Design::random_phase};
    m["paper-sec6"] = sec6;

    Experiment k64 = sec6;
    k64.preset = "paper-sec6-k64";
    k64.base.k = 64;
    k64.base.snr_db = snr_range(-30.0, -10.0, 2.5);
    k64.approaches = {Design::omni_golay, Design::dft_sweep, Design::random_phase};
    m["paper-sec6-k64"] = k64;

    Experiment desk = sec6;
    desk.preset = "desk";
    desk.base.drops = 100;
    desk.base.frames_per_drop = 1000;
    desk.base.p_fa_target = 1e-2;
    desk.base.snr_db = snr_range(-5.0, 5.0, 2.5);
    m["desk"] = desk;
    return m;
}

namespace detail {

class Checker {
  public:
    void fail(const std::string &path, const std::string &msg) { problems.push_back(path + ": " + msg); }

    std::optional<long long> integer(const nlohmann::json &j, const std::string &path, long long min) {
        if (!j.is_number_integer()) {
            fail(path, "must be an integer");
            return std::nullopt;
        }
        const long long v = j.get<long long>();
        if (v < min) {
            fail(path, "must be >= " + std::to_string(min));
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> number(const nlohmann::json &j, const std::string &path) {
        if (!j.is_number()) {
            fail(path, "must be a number");
            return std::nullopt;
        }
        return j.get<double>();
    }

    std::vector<std::string> problems;
};

} // namespace detail

/// Seed override from the OMNISYNC_SEED environment variable, if set.
inline std::optional<std::uint64_t> seed_from_env() {
    const char *s = std::getenv("OMNISYNC_SEED");
    if (!s || !*s)
        return std::nullopt;
    char *end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0')
        throw ConfigError({"OMNISYNC_SEED: must be a nonnegative decimal integer"});
    return static_cast<std::uint64_t>(v);
}

/// Parses and validates a schema-1 experiment document. A "preset" key seeds
/// the defaults; every other key overrides them.
inline Experiment parse_experiment(const nlohmann::json &doc, std::optional<std::uint64_t> seed_override = {}) {
    detail::Checker c;
    if (!doc.is_object())
        throw ConfigError({"$: must be a JSON object"});

    static const std::set<std::string> known{"schema", "preset", "approach", "approaches", "k",  "mt",
                                             "mr",     "nt",     "nr",       "l",          "channel",
                                             "snr_db", "p_fa_target", "drops", "frames_per_drop",
                                             "estimator", "master_seed", "zc_root"};
    for (const auto &[key, _] : doc.items())
        if (!known.count(key))
            c.fail("$." + key, "unknown key");

    if (!doc.contains("schema"))
        c.fail("$.schema", "missing (expected 1)");
    else if (!doc["schema"].is_number_integer() || doc["schema"].get<long long>() != 1)
        c.fail("$.schema", "unsupported schema version (expected 1)");

    Experiment ex = presets().at("desk");
    ex.preset.clear();
    if (doc.contains("preset")) {
        const auto all = presets();
        if (!doc["preset"].is_string() || !all.count(doc["preset"].get<std::string>()))
            c.fail("$.preset", "unknown preset");
        else
            ex = all.at(doc["preset"].get<std::string>());
    }
    ExperimentConfig &b = ex.base;

    auto design = [&](const nlohmann::json &j, const std::string &path) -> std::optional<Design> {
        if (j.is_string())
            if (auto d = design_from_string(j.get<std::string>()); d && *d != Design::explicit_)
                return d;
        c.fail(path, "must be one of omni-golay, quasi-omni-zc, dft-sweep, random-phase");
        return std::nullopt;
    };
    if (doc.contains("approach") && doc.contains("approaches"))
        c.fail("$.approach", "give either approach or approaches, not both");
    if (doc.contains("approach")) {
        if (auto d = design(doc["approach"], "$.approach"))
            ex.approaches = {*d};
    }
    if (doc.contains("approaches")) {
        const auto &a = doc["approaches"];
        if (!a.is_array() || a.empty()) {
            c.fail("$.approaches", "must be a nonempty array");
        } else {
            ex.approaches.clear();
            for (std::size_t i = 0; i < a.size(); ++i)
                if (auto d = design(a[i], "$.approaches[" + std::to_string(i) + "]"))
                    ex.approaches.push_back(*d);
        }
    }

    auto int_field = [&](const char *key, int &dst, long long min) {
        if (doc.contains(key))
            if (auto v = c.integer(doc[key], std::string("$.") + key, min))
                dst = static_cast<int>(*v);
    };
    int_field("k", b.k, 1);
    int_field("mt", b.mt, 1);
    int_field("mr", b.mr, 1);
    int_field("nt", b.nt, 1);
    int_field("nr", b.nr, 1);
    int_field("l", b.l, 1);
    int_field("drops", b.drops, 1);
    int_field("frames_per_drop", b.frames_per_drop, 1);
    int_field("zc_root", b.zc_root, 1);

    if (doc.contains("master_seed")) {
        if (auto v = c.integer(doc["master_seed"], "$.master_seed", 0))
            b.master_seed = static_cast<std::uint64_t>(*v);
    }
    if (doc.contains("p_fa_target")) {
        if (auto v = c.number(doc["p_fa_target"], "$.p_fa_target")) {
            if (*v > 0.0 && *v < 1.0)
                b.p_fa_target = *v;
            else
                c.fail("$.p_fa_target", "must be in (0, 1)");
        }
    }
    if (doc.contains("estimator")) {
        const auto &e = doc["estimator"];
        if (e == "reduced")
            b.estimator = Estimator::reduced;
        else if (e == "full")
            b.estimator = Estimator::full;
        else
            c.fail("$.estimator", "must be reduced or full");
    }
    if (doc.contains("snr_db")) {
        const auto &s = doc["snr_db"];
        if (!s.is_array()) {
            c.fail("$.snr_db", "must be an array of numbers");
        } else {
            b.snr_db.clear();
            for (std::size_t i = 0; i < s.size(); ++i)
                if (auto v = c.number(s[i], "$.snr_db[" + std::to_string(i) + "]"))
                    b.snr_db.push_back(*v);
        }
    }

    if (doc.contains("channel")) {
        const auto &ch = doc["channel"];
        if (!ch.is_object()) {
            c.fail("$.channel", "must be an object");
        } else {
            static const std::set<std::string> ck{"model", "paths", "beta", "doppler_hz", "slot_interval_s"};
            for (const auto &[key, _] : ch.items())
                if (!ck.count(key))
                    c.fail("$.channel." + key, "unknown key");
            if (ch.contains("model")) {
                if (ch["model"] == "geometric")
                    b.channel.model = ChannelModel::geometric;
                else if (ch["model"] == "iid")
                    b.channel.model = ChannelModel::iid;
                else
                    c.fail("$.channel.model", "must be geometric or iid");
            }
            bool paths_given = false;
            if (ch.contains("paths"))
                if (auto v = c.integer(ch["paths"], "$.channel.paths", 1)) {
                    b.channel.paths = static_cast<int>(*v);
                    paths_given = true;
                }
            if (ch.contains("beta")) {
                const auto &bj = ch["beta"];
                if (!bj.is_array()) {
                    c.fail("$.channel.beta", "must be an array of numbers");
                } else {
                    std::vector<double> beta;
                    for (std::size_t i = 0; i < bj.size(); ++i)
                        if (auto v = c.number(bj[i], "$.channel.beta[" + std::to_string(i) + "]"))
                            beta.push_back(*v);
                    b.channel.beta = beta;
                    if (static_cast<int>(beta.size()) != b.channel.paths)
                        c.fail("$.channel.beta", "needs one entry per path");
                    double sum = 0.0;
                    for (double v : beta) {
                        sum += v;
                        if (v < 0.0)
                            c.fail("$.channel.beta", "entries must be nonnegative");
                    }
                    if (std::fabs(sum - 1.0) > 1e-12)
                        c.fail("$.channel.beta", "entries must sum to 1");
                }
            } else if (paths_given) {
                b.channel.beta = ChannelConfig::uniform_beta(b.channel.paths);
            }
            if (ch.contains("doppler_hz"))
                if (auto v = c.number(ch["doppler_hz"], "$.channel.doppler_hz")) {
                    if (*v >= 0.0)
                        b.channel.doppler_hz = *v;
                    else
                        c.fail("$.channel.doppler_hz", "must be >= 0");
                }
            if (ch.contains("slot_interval_s"))
                if (auto v = c.number(ch["slot_interval_s"], "$.channel.slot_interval_s")) {
                    if (*v > 0.0)
                        b.channel.slot_interval_s = *v;
                    else
                        c.fail("$.channel.slot_interval_s", "must be > 0");
                }
        }
    }

    if (c.problems.empty()) {
        // cross-field checks once every field parsed
        for (Design d : ex.approaches) {
            ExperimentConfig run = b;
            run.approach = d;
            try {
                run.validate();
                (void)approach_dims(run);
            } catch (const std::exception &e) {
                c.fail("$", std::string(to_string(d)) + ": " + e.what());
            }
        }
    }
    if (!c.problems.empty())
        throw ConfigError(c.problems);
    if (seed_override)
        b.master_seed = *seed_override;
    return ex;
}

inline Experiment parse_experiment_text(const std::string &text, std::optional<std::uint64_t> seed_override = {}) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError({std::string("$: malformed JSON: ") + e.what()});
    }
    return parse_experiment(doc, seed_override);
}

/// Fully resolved configuration, as echoed in run manifests.
inline nlohmann::json experiment_to_json(const Experiment &ex) {
    const ExperimentConfig &b = ex.base;
    nlohmann::json j;
    j["schema"] = 1;
    if (!ex.preset.empty())
        j["preset"] = ex.preset;
    j["approaches"] = nlohmann::json::array();
    for (Design d : ex.approaches)
        j["approaches"].push_back(std::string(to_string(d)));
    j["k"] = b.k;
    j["mt"] = b.mt;
    j["mr"] = b.mr;
    j["nt"] = b.nt;
    j["nr"] = b.nr;
    j["l"] = b.l;
    j["channel"] = {{"model", std::string(to_string(b.channel.model))},
                    {"paths", b.channel.paths},
                    {"beta", b.channel.beta},
                    {"doppler_hz", b.channel.doppler_hz},
                    {"slot_interval_s", b.channel.slot_interval_s}};
    j["snr_db"] = b.snr_db;
    j["p_fa_target"] = b.p_fa_target;
    j["drops"] = b.drops;
    j["frames_per_drop"] = b.frames_per_drop;
    j["estimator"] = std::string(to_string(b.estimator));
    j["master_seed"] = b.master_seed;
    j["zc_root"] = b.zc_root;
    return j;
}

} // namespace omnisync

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

#include "catch_amalgamated.hpp"

#include <omnisync/codebook_io.hpp>
#include <omnisync/config.hpp>

#include <cstdlib>
#include <sstream>

using namespace omnisync;

namespace {

bool mentions(const ConfigError &e, const std::string &needle) {
    for (const auto &p : e.problems())
        if (p.find(needle) != std::string::npos)
            return true;
    return false;
}

ConfigError config_error(const std::string &text) {
    try {
        parse_experiment_text(text);
    } catch (const ConfigError &e) {
        return e;
    }
    FAIL("expected a ConfigError for " << text);
    throw;
}

} // namespace

TEST_CASE("codebook JSON round trip", "[config]") {
    for (const auto &cb : {build_omni_codebook(16, 2, 8, 2, 3), random_phase_codebook(4, 2, 4, 1, 2, 8),
                           dft_sweep_codebook(8, 8)}) {
        const auto text = codebook_to_json(cb).dump();
        const auto back = codebook_from_json(nlohmann::json::parse(text));
        CHECK(back.design == cb.design);
        CHECK(back.k == cb.k);
        CHECK(back.schedule_tx == cb.schedule_tx);
        for (int k = 0; k < cb.k; ++k) {
            CHECK(back.w[static_cast<std::size_t>(k)] == cb.w[static_cast<std::size_t>(k)]);
            CHECK(back.f[static_cast<std::size_t>(k)] == cb.f[static_cast<std::size_t>(k)]);
        }
    }
    // row-major layout: w[slot][row][col] = [re, im]
    const auto j = codebook_to_json(build_omni_codebook(4, 2, 4, 2, 1));
    CHECK(j["w"][0].size() == 4);
    CHECK(j["w"][0][0].size() == 2);
    CHECK(j["w"][0][3][0][0].get<double>() == -0.5);
    CHECK(j["w"][0][3][1][0].get<double>() == 0.5);

    auto broken = j;
    broken["w"][0][1] = "oops";
    CHECK_THROWS_AS(codebook_from_json(broken), DomainError);
    broken = j;
    broken["k"] = 2;
    CHECK_THROWS_AS(codebook_from_json(broken), DomainError);
}

TEST_CASE("pattern CSV", "[config]") {
    std::ostringstream os;
    write_pattern_csv(os, build_omni_codebook(8, 2, 4, 2, 2), AngleGrid(16));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "theta,slot,side,power");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(line.substr(line.rfind(',') + 1).substr(0, 1) == "2");
    }
    CHECK(rows == 16 * 2 * 2);
}

TEST_CASE("experiment presets", "[config]") {
    const auto p = presets();
    const auto &sec6 = p.at("paper-sec6");
    CHECK(sec6.base.drops == 500);
    CHECK(sec6.base.frames_per_drop == 10000);
    CHECK(sec6.base.p_fa_target == 1e-4);
    CHECK(sec6.base.mt == 64);
    CHECK(sec6.base.mr == 16);
    CHECK(sec6.base.l == 64);
    CHECK(std::fabs(sec6.base.channel.doppler_hz - 833.3333333333) < 1e-6);
    CHECK(p.at("paper-sec6-k64").base.k == 64);
    CHECK(p.at("desk").base.drops == 100);

    const auto ex = parse_experiment_text(R"({"schema": 1, "preset": "paper-sec6"})");
    CHECK(ex.approaches.size() == 3);
    CHECK(ex.runs()[1].approach == Design::quasi_omni_zc);
    // manifest echo parses back to the same configuration
    const auto again = parse_experiment(experiment_to_json(ex));
    CHECK(experiment_to_json(again) == experiment_to_json(ex));
}

TEST_CASE("experiment overrides", "[config]") {
    const auto ex = parse_experiment_text(R"({
        "schema": 1, "approach": "dft-sweep", "k": 8, "mt": 8,
        "channel": {"model": "geometric", "paths": 4, "doppler_hz": 0},
        "snr_db": [-3, 0.5], "estimator": "full", "master_seed": 42, "drops": 3
    })");
    CHECK(ex.approaches == std::vector<Design>{Design::dft_sweep});
    CHECK(ex.base.k == 8);
    CHECK(ex.base.channel.beta == std::vector<double>(4, 0.25));
    CHECK(ex.base.snr_db == std::vector<double>{-3.0, 0.5});
    CHECK(ex.base.estimator == Estimator::full);
    CHECK(ex.base.master_seed == 42);
    CHECK(parse_experiment_text(R"({"schema": 1, "master_seed": 42})", 7).base.master_seed == 7);
}

TEST_CASE("config errors carry JSON paths", "[config]") {
    CHECK(mentions(config_error(R"({"preset": "desk"})"), "$.schema"));
    CHECK(mentions(config_error(R"({"schema": 2})"), "$.schema"));
    CHECK(mentions(config_error(R"({"schema": 1, "bogus": 1})"), "$.bogus"));
    CHECK(mentions(config_error(R"({"schema": 1, "channel": {"paths": 0}})"), "$.channel.paths"));
    CHECK(mentions(config_error(R"({"schema": 1, "channel": {"paths": 2, "beta": [0.5, 0.6]}})"), "$.channel.beta"));
    CHECK(mentions(config_error(R"({"schema": 1, "snr_db": [1, "x"]})"), "$.snr_db[1]"));
    CHECK(mentions(config_error(R"({"schema": 1, "approaches": ["omni-golay", "nope"]})"), "$.approaches[1]"));
    CHECK(mentions(config_error(R"({"schema": 1, "p_fa_target": 1.5})"), "$.p_fa_target"));
    CHECK(mentions(config_error(R"({"schema": 1, "nt": 3})"), "omni-golay"));
    CHECK(mentions(config_error("{not json"), "malformed"));

    // every problem is reported, not just the first
    const auto many = config_error(R"({"schema": 1, "drops": 0, "frames_per_drop": -1})");
    CHECK(many.problems().size() == 2);
}

TEST_CASE("seed override from the environment", "[config]") {
    ::setenv("OMNISYNC_SEED", "123", 1);
    CHECK(seed_from_env() == std::optional<std::uint64_t>(123));
    ::setenv("OMNISYNC_SEED", "12x", 1);
    CHECK_THROWS_AS(seed_from_env(), ConfigError);
    ::unsetenv("OMNISYNC_SEED");
    CHECK_FALSE(seed_from_env().has_value());
}

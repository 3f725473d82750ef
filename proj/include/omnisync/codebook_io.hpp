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

// Codebook JSON documents and beam-pattern CSV export.

#include "codebook.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <string>

namespace omnisync {

namespace detail {

inline nlohmann::json matrix_to_json(const CMatrix &m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CMatrix matrix_from_json(const nlohmann::json &j, int rows, int cols, const std::string &path) {
    require(j.is_array() && static_cast<int>(j.size()) == rows, path + ": expected " + std::to_string(rows) + " rows");
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const auto &row = j[static_cast<std::size_t>(i)];
        require(row.is_array() && static_cast<int>(row.size()) == cols,
                path + "[" + std::to_string(i) + "]: expected " + std::to_string(cols) + " entries");
        for (int c = 0; c < cols; ++c) {
            const auto &e = row[static_cast<std::size_t>(c)];
            require(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number(),
                    path + "[" + std::to_string(i) + "][" + std::to_string(c) + "]: expected [re, im]");
            m(i, c) = {e[0].get<double>(), e[1].get<double>()};
        }
    }
    return m;
}

inline nlohmann::json schedule_to_json(const std::optional<SlotSchedule> &s) {
    if (!s)
        return nullptr;
    return s->base_indices;
}

inline std::optional<SlotSchedule> schedule_from_json(const nlohmann::json &j, const std::string &path) {
    if (j.is_null())
        return std::nullopt;
    try {
        return SlotSchedule{j.get<std::vector<std::vector<int>>>()};
    } catch (const nlohmann::json::exception &) {
        throw DomainError(path + ": expected a list of integer lists");
    }
}

} // namespace detail

inline nlohmann::json codebook_to_json(const Codebook &cb) {
    nlohmann::json j;
    j["mt"] = cb.mt;
    j["nt"] = cb.nt;
    j["mr"] = cb.mr;
    j["nr"] = cb.nr;
    j["k"] = cb.k;
    j["design"] = std::string(to_string(cb.design));
    j["schedules"] = {{"tx", detail::schedule_to_json(cb.schedule_tx)},
                      {"rx", detail::schedule_to_json(cb.schedule_rx)}};
    j["w"] = nlohmann::json::array();
    j["f"] = nlohmann::json::array();
    for (const auto &w : cb.w)
        j["w"].push_back(detail::matrix_to_json(w));
    for (const auto &f : cb.f)
        j["f"].push_back(detail::matrix_to_json(f));
    return j;
}

inline Codebook codebook_from_json(const nlohmann::json &j) {
    require(j.is_object(), "codebook: document must be an object");
    auto dim = [&](const char *key) {
        require(j.contains(key) && j[key].is_number_integer() && j[key].get<int>() >= 1,
                std::string("codebook.") + key + ": expected a positive integer");
        return j[key].get<int>();
    };
    Codebook cb;
    cb.mt = dim("mt");
    cb.nt = dim("nt");
    cb.mr = dim("mr");
    cb.nr = dim("nr");
    cb.k = dim("k");
    require(j.contains("design") && j["design"].is_string(), "codebook.design: expected a string");
    const auto d = design_from_string(j["design"].get<std::string>());
    require(d.has_value(), "codebook.design: unknown design");
    cb.design = *d;
    if (j.contains("schedules") && j["schedules"].is_object()) {
        const auto &s = j["schedules"];
        if (s.contains("tx"))
            cb.schedule_tx = detail::schedule_from_json(s["tx"], "codebook.schedules.tx");
        if (s.contains("rx"))
            cb.schedule_rx = detail::schedule_from_json(s["rx"], "codebook.schedules.rx");
    }
    require(j.contains("w") && j["w"].is_array() && static_cast<int>(j["w"].size()) == cb.k,
            "codebook.w: expected K matrices");
    require(j.contains("f") && j["f"].is_array() && static_cast<int>(j["f"].size()) == cb.k,
            "codebook.f: expected K matrices");
    for (int s = 0; s < cb.k; ++s) {
        const std::string idx = "[" + std::to_string(s) + "]";
        cb.w.push_back(detail::matrix_from_json(j["w"][static_cast<std::size_t>(s)], cb.mt, cb.nt, "codebook.w" + idx));
        cb.f.push_back(detail::matrix_from_json(j["f"][static_cast<std::size_t>(s)], cb.mr, cb.nr, "codebook.f" + idx));
    }
    cb.validate_shape();
    return cb;
}

inline constexpr const char *pattern_header = "theta,slot,side,power";

/// One row per grid point per slot per side; slots are 1-based.
inline void write_pattern_csv(std::ostream &os, const Codebook &cb, const AngleGrid &grid) {
    os << pattern_header << '\n';
    char buf[128];
    for (const char *side : {"tx", "rx"}) {
        const auto &ms = std::string_view(side) == "tx" ? cb.w : cb.f;
        for (int s = 0; s < cb.k; ++s) {
            const auto p = beam_pattern(ms[static_cast<std::size_t>(s)], grid);
            for (int g = 0; g < grid.size(); ++g) {
                std::snprintf(buf, sizeof buf, "%.10g,%d,%s,%.15g", grid[g], s + 1, side,
                              std::max(p[static_cast<std::size_t>(g)], 0.0));
                os << buf << '\n';
            }
        }
    }
}

} // namespace omnisync

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

// omnisync command-line front end.

#include <omnisync/omnisync.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <unistd.h>

using namespace omnisync;
namespace fs = std::filesystem;

namespace {

constexpr const char *version = "0.1.0";

/// Writes through a sibling temporary file and renames it into place, so a
/// failed command never leaves a partial output behind.
void write_atomically(const std::string &path, const std::function<void(std::ostream &)> &body) {
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    try {
        {
            std::ofstream os(tmp, std::ios::binary);
            if (!os)
                throw std::runtime_error("cannot open " + tmp.string() + " for writing");
            body(os);
            os.flush();
            if (!os)
                throw std::runtime_error("write to " + tmp.string() + " failed");
        }
        fs::rename(tmp, target);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

std::string read_file(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Codebook load_codebook(const std::string &path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error &e) {
        throw DomainError(path + ": malformed JSON: " + e.what());
    }
    return codebook_from_json(j);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// ---- codebook ------------------------------------------------------------

struct CodebookArgs {
    int mt = 64, nt = 2, mr = 16, nr = 2, k = 1, root = 1;
    std::uint64_t seed = 1;
    std::string design = "omni-golay";
    std::string out;
};

Codebook make_codebook(const CodebookArgs &a) {
    if (a.design == "basis-sweep")
        return unit_basis_sweep(a.mt);
    if (a.design == "steering-sweep")
        return steering_sweep(a.mt);
    const auto d = design_from_string(a.design);
    if (!d || *d == Design::explicit_)
        throw DomainError("unknown design " + a.design);
    switch (*d) {
    case Design::omni_golay: return build_omni_codebook(a.mt, a.nt, a.mr, a.nr, a.k);
    case Design::quasi_omni_zc: return zc_codebook(a.mt, a.mr, a.nr, a.k, a.root);
    case Design::dft_sweep: return dft_sweep_codebook(a.mt, a.k, a.mr, a.nr);
    case Design::random_phase: return random_phase_codebook(a.mt, a.nt, a.mr, a.nr, a.k, a.seed);
    default: break;
    }
    throw DomainError("unknown design " + a.design);
}

void print_report(const CodebookReport &rep, std::ostream &os) {
    for (const auto &c : rep.conditions) {
        os << c.name << ": " << (!c.applicable ? "n/a" : c.pass ? "PASS" : "FAIL") << " (worst deviation "
           << fmt(c.worst) << ")\n";
    }
}

int cmd_codebook(const CodebookArgs &a) {
    const Codebook cb = make_codebook(a);
    const auto rep = verify_codebook(cb);
    write_atomically(a.out, [&](std::ostream &os) { os << codebook_to_json(cb).dump(1) << '\n'; });
    std::cout << to_string(cb.design) << " K=" << cb.k << " Mt=" << cb.mt << " Nt=" << cb.nt << " Mr=" << cb.mr
              << " Nr=" << cb.nr << ": " << (rep.pass() ? "all conditions pass" : "some conditions fail")
              << " -> " << a.out << '\n';
    return 0;
}

int cmd_pattern(const std::string &in, int grid, const std::string &out) {
    const Codebook cb = load_codebook(in);
    const AngleGrid g(grid);
    write_atomically(out, [&](std::ostream &os) { write_pattern_csv(os, cb, g); });
    return 0;
}

int cmd_verify(const std::string &in, int grid) {
    const Codebook cb = load_codebook(in);
    const auto rep = verify_codebook(cb, grid);
    print_report(rep, std::cout);
    bool ok = rep.pass();
    if (cb.schedule_tx && cb.schedule_rx) {
        const auto s = verify_schedule(*cb.schedule_tx, *cb.schedule_rx, cb.k);
        std::cout << "schedule: " << (s.pass ? "PASS" : "FAIL") << '\n';
        ok = ok && s.pass;
    }
    std::cout << (ok ? "verify: PASS" : "verify: FAIL") << '\n';
    return ok ? 0 : 1;
}

int cmd_threshold(double pfa, int k, int l, int nr, int nt) {
    const DetectionDims d{k, l, nr, nt};
    const double g = threshold_from_fa(pfa, d);
    nlohmann::json j{{"gamma", g},
                     {"p_fa_target", pfa},
                     {"p_fa_closed_form", fa_closed_form(g, d).value},
                     {"k", k},
                     {"l", l},
                     {"nr", nr},
                     {"nt", nt}};
    std::cout << j.dump() << '\n';
    return 0;
}

// ---- analytic ------------------------------------------------------------

struct AnalyticRow {
    std::string quantity;
    DetectionDims dims;
    double gamma = 0.0;
    std::optional<double> noise_var;
    Probability p;
};

/// log mean of exp(values).
double log_mean_exp(const std::vector<double> &lv) {
    double acc = -std::numeric_limits<double>::infinity();
    for (double v : lv)
        acc = log_add(acc, v);
    return acc - std::log(static_cast<double>(lv.size()));
}

std::vector<AnalyticRow> analytic_rows(const Experiment &ex, const std::string &quantity) {
    std::vector<AnalyticRow> rows;
    for (const auto &run : ex.runs()) {
        const DetectionDims dims = approach_dims(run);
        const double gamma = threshold_from_fa(run.p_fa_target, dims);
        if (quantity == "fa") {
            rows.push_back({quantity, dims, gamma, std::nullopt, fa_closed_form(gamma, dims)});
            continue;
        }
        // eigenvalues of R for each drop (one matrix for the i.i.d. model)
        const auto corr = correlation_matrix(run.channel_config());
        const int drops = run.channel.model == ChannelModel::iid ? 1 : run.drops;
        std::vector<std::vector<double>> spectra;
        for (int d = 0; d < drops; ++d) {
            const auto ds = drop_seed(run.master_seed, d);
            const auto cb = whiten_combiners(approach_codebook(run, ds));
            const auto cov = drop_covariance(run, cb, corr, ds);
            spectra.emplace_back(cov.nonzero_eigs().begin(), cov.nonzero_eigs().end());
        }
        const double t = gamma / (1.0 - gamma);
        const double gain = static_cast<double>(dims.l) / dims.nt;
        for (double snr : run.snr_db) {
            const double nu = snr_to_noise_var(snr);
            std::vector<double> lv;
            for (const auto &eig : spectra) {
                if (eig.empty()) {
                    lv.push_back(0.0); // no signal energy reaches the receiver
                } else if (quantity == "md-asym") {
                    lv.push_back(asymptotic_md(eig, gamma, nu, dims).log_value);
                } else {
                    // r signal components (L/N_t) lambda + nu against K L N_r - r
                    // noise components, the split under which the tail reduces to
                    // the asymptotic MD at high SNR
                    GeneralizedFRatio r;
                    for (double lam : eig)
                        r.lambda.push_back(gain * lam + nu);
                    r.sigma.assign(static_cast<std::size_t>(dims.observations()) - eig.size(), nu);
                    lv.push_back(lemma1_cdf(r, t).log_value);
                }
            }
            rows.push_back({quantity, dims, gamma, nu, Probability::from_log(log_mean_exp(lv))});
        }
    }
    return rows;
}

int cmd_analytic(const std::string &config, const std::string &quantity, const std::string &out) {
    const Experiment ex = parse_experiment_text(read_file(config), seed_from_env());
    const auto rows = analytic_rows(ex, quantity);
    auto body = [&](std::ostream &os) {
        os << "quantity,k,l,nr,nt,gamma,noise_var,value,log_value\n";
        char buf[256];
        for (const auto &r : rows) {
            std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%d,%.15g,%s,%.10g,%.12g", r.quantity.c_str(), r.dims.k,
                          r.dims.l, r.dims.nr, r.dims.nt, r.gamma, r.noise_var ? fmt(*r.noise_var).c_str() : "",
                          r.p.value, r.p.log_value);
            os << buf << '\n';
        }
    };
    if (out.empty())
        body(std::cout);
    else
        write_atomically(out, body);
    return 0;
}

// ---- simulate ------------------------------------------------------------

int cmd_simulate(const std::string &config, const std::string &out, int workers, const std::string &manifest,
                 bool dry_run, bool verbose) {
    const Experiment ex = parse_experiment_text(read_file(config), seed_from_env());
    nlohmann::json man;
    man["omnisync_version"] = version;
    man["config"] = experiment_to_json(ex);
    man["output"] = out;
    man["workers"] = workers;
    for (const auto &run : ex.runs()) {
        const auto dims = approach_dims(run);
        man["thresholds"][std::string(to_string(run.approach))] = threshold_from_fa(run.p_fa_target, dims);
    }
    if (dry_run) {
        std::cout << man.dump(2) << '\n';
        return 0;
    }
    if (out.empty())
        throw DomainError("--out is required unless --dry-run is given");
    std::vector<ResultRow> rows;
    for (const auto &run : ex.runs()) {
        auto r = sweep(run, {workers, verbose});
        rows.insert(rows.end(), r.begin(), r.end());
    }
    write_atomically(out, [&](std::ostream &os) { write_csv(os, rows); });
    if (!manifest.empty())
        write_atomically(manifest, [&](std::ostream &os) { os << man.dump(2) << '\n'; });
    std::cout << "wrote " << rows.size() << " rows to " << out << '\n';
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"omnisync: omnidirectional precoding/combining codebooks and GLRT synchronization analysis"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1);

    CodebookArgs cba;
    auto *cb = app.add_subcommand("codebook", "generate a precoding/combining codebook as JSON");
    cb->add_option("--mt", cba.mt, "transmit antennas")->capture_default_str();
    cb->add_option("--nt", cba.nt, "transmit streams")->capture_default_str();
    cb->add_option("--mr", cba.mr, "receive antennas")->capture_default_str();
    cb->add_option("--nr", cba.nr, "receive streams")->capture_default_str();
    cb->add_option("--k", cba.k, "synchronization slots")->capture_default_str();
    cb->add_option("--design", cba.design,
                   "omni-golay | quasi-omni-zc | dft-sweep | random-phase | basis-sweep | steering-sweep")
        ->capture_default_str();
    cb->add_option("--seed", cba.seed, "seed for random-phase")->capture_default_str();
    cb->add_option("--root", cba.root, "Zadoff-Chu root")->capture_default_str();
    cb->add_option("--out", cba.out, "output JSON file")->required();

    std::string in, out, config, quantity, manifest;
    int grid = export_grid;
    auto *pat = app.add_subcommand("pattern", "export beam patterns of a codebook as CSV");
    pat->add_option("--in", in, "codebook JSON")->required()->check(CLI::ExistingFile);
    pat->add_option("--grid", grid, "angle grid density")->capture_default_str()->check(CLI::PositiveNumber);
    pat->add_option("--out", out, "output CSV")->required();

    int vgrid = verification_grid;
    auto *ver = app.add_subcommand("verify", "check codebook conditions; exit 0 iff all pass");
    ver->add_option("--in", in, "codebook JSON")->required()->check(CLI::ExistingFile);
    ver->add_option("--grid", vgrid, "angle grid density")->capture_default_str()->check(CLI::PositiveNumber);

    double pfa = 1e-2;
    int tk = 1, tl = 64, tnr = 2, tnt = 2;
    auto *thr = app.add_subcommand("threshold", "GLRT threshold for a false-alarm target");
    thr->add_option("--pfa", pfa, "false-alarm target")->required();
    thr->add_option("--k", tk)->capture_default_str();
    thr->add_option("--l", tl)->capture_default_str();
    thr->add_option("--nr", tnr)->capture_default_str();
    thr->add_option("--nt", tnt)->capture_default_str();

    auto *ana = app.add_subcommand("analytic", "evaluate analytic predictions for an experiment config");
    ana->add_option("--config", config, "experiment JSON")->required()->check(CLI::ExistingFile);
    ana->add_option("--quantity", quantity, "fa | md-asym | lemma1")
        ->required()
        ->check(CLI::IsMember({"fa", "md-asym", "lemma1"}));
    ana->add_option("--out", out, "output CSV (default stdout)");

    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool dry_run = false, verbose = false;
    auto *sim = app.add_subcommand("simulate", "run a Monte Carlo sweep");
    sim->add_option("--config", config, "experiment JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out, "results CSV");
    sim->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sim->add_option("--manifest", manifest, "write the resolved run manifest (JSON)");
    sim->add_flag("--dry-run", dry_run, "validate the config and print the manifest only");
    sim->add_flag("--verbose", verbose, "log one line per drop to stderr");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cb)
            return cmd_codebook(cba);
        if (*pat)
            return cmd_pattern(in, grid, out);
        if (*ver)
            return cmd_verify(in, vgrid);
        if (*thr)
            return cmd_threshold(pfa, tk, tl, tnr, tnt);
        if (*ana)
            return cmd_analytic(config, quantity, out);
        if (*sim)
            return cmd_simulate(config, out, workers, manifest, dry_run, verbose);
    } catch (const ConfigError &e) {
        std::cerr << e.what() << '\n';
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

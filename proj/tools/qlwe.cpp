// Copyright 2026 The qlwe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qlwe: key generation, protocol runs, suites, depth reports and replay.
// Exit codes: 0 pass, 1 check failure, 2 usage or configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "qlwe/harness.hpp"

namespace {

using namespace qlwe;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

constexpr std::uint64_t kDefaultSeed = 1;

std::uint64_t resolve_seed(const std::optional<std::uint64_t> &flag) {
    if (flag) {
        return *flag;
    }
    if (const char *env = std::getenv("QLWE_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) {
                return v;
            }
        } catch (const std::exception &) {
        }
        throw ParameterError(std::string("QLWE_SEED is not an unsigned integer: '") + env + "'");
    }
    return kDefaultSeed;
}

Preset resolve_preset(const std::string &params, const std::string &preset) {
    if (!params.empty()) {
        return load_config(params);
    }
    return builtin_preset(preset.empty() ? "tiny" : preset);
}

void write_json(const Json &j, const std::string &path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw ParameterError("cannot write '" + path + "'");
    }
    out << j.dump(2) << '\n';
}

struct Options {
    std::string params;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string report;
    std::string prover;
    std::optional<std::size_t> trials;
    std::optional<unsigned> threads;
    std::string suite;
    std::string out_dir;
    std::optional<std::size_t> fanout;
    std::string circuit;
    bool linear_map = false;
    std::string transcripts;
};

void add_preset_flags(CLI::App *cmd, Options &o) {
    cmd->add_option("--params", o.params, "INI preset file");
    cmd->add_option("--preset", o.preset, "built-in preset: tiny, large, strict-symbolic");
    cmd->add_option("--seed", o.seed, "master seed (default: $QLWE_SEED, else 1)");
}

int cmd_keygen(const Options &o) {
    const Preset p = resolve_preset(o.params, o.preset);
    detail::require_desk(p);
    const auto seed = resolve_seed(o.seed);
    Rng rng = make_stream(seed, "keygen", 0);
    const auto keys = generate_keys(p.params, rng);
    Json j{{"params", to_json(p.params)},
           {"seed", seed},
           {"A", to_json(keys.instance.A)},
           {"u", to_json(keys.instance.u)},
           {"config_hash", config_hash(p)},
           {"version", kVersion}};
    j.update(keys_reveal_json(keys));
    write_json(j, o.out);
    return kExitPass;
}

int cmd_run(const Options &o) {
    Preset p = resolve_preset(o.params, o.preset);
    detail::require_desk(p);
    const auto seed = resolve_seed(o.seed);
    const ProverKind kind = o.prover.empty() ? p.prover : prover_kind_from_name(o.prover);
    const std::size_t trials = o.trials.value_or(p.trials);
    if (o.threads) {
        p.threads = *o.threads;
    }
    std::ofstream sink;
    if (!o.out.empty()) {
        sink.open(o.out);
        if (!sink) {
            throw ParameterError("cannot write '" + o.out + "'");
        }
    }
    const auto start = std::chrono::steady_clock::now();
    const auto st = estimate_pass_rate(p.params, kind, trials, seed, p.worker_threads(), sink.is_open() ? &sink : nullptr);
    RunReport rep;
    rep.suite = "run";
    rep.preset = p.name;
    rep.prover = prover_kind_name(kind);
    rep.trials = trials;
    rep.seed = seed;
    rep.statistics = to_json(st);
    rep.config_hash = config_hash(p);
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(to_json(rep), o.report);
    return kExitPass;
}

int cmd_suite(const Options &o) {
    Preset p = resolve_preset(o.params, o.preset);
    if (o.threads) {
        p.threads = *o.threads;
    }
    const auto kind = suite_kind_from_name(o.suite);
    std::optional<ProverKind> prover;
    if (!o.prover.empty()) {
        prover = prover_kind_from_name(o.prover);
    }
    std::optional<std::filesystem::path> dir;
    if (!o.out_dir.empty()) {
        dir = o.out_dir;
    }
    const auto rep = run_suite(kind, p, resolve_seed(o.seed), dir, prover, o.trials);
    write_json(to_json(rep), o.report);
    return rep.passed() ? kExitPass : kExitFail;
}

int cmd_depthc_report(const Options &o) {
    LayeredCircuit c;
    const int sources = (o.fanout ? 1 : 0) + (o.circuit.empty() ? 0 : 1) + (o.linear_map ? 1 : 0);
    if (sources != 1) {
        throw ParameterError("depthc report needs exactly one of --fanout, --circuit, --linear-map");
    }
    if (o.fanout) {
        c = compile_fanout(*o.fanout);
    } else if (!o.circuit.empty()) {
        std::ifstream in(o.circuit);
        if (!in) {
            throw ParameterError("cannot open circuit file '" + o.circuit + "'");
        }
        Json j;
        try {
            j = Json::parse(in);
        } catch (const Json::parse_error &err) {
            throw ParameterError(o.circuit + ": " + err.what());
        }
        c = circuit_from_json(j);
    } else {
        const Preset p = resolve_preset(o.params, o.preset);
        c = compile_linear_map_modeled(
            ZqMatrix(p.params.q, static_cast<std::size_t>(p.params.m), static_cast<std::size_t>(p.params.n) + 1));
    }
    const auto problems = circuit_problems(c);
    Json j{{"report", problems.empty() ? to_json(depth_report(c)) : Json(nullptr)},
           {"problems", problems},
           {"valid", problems.empty()},
           {"version", kVersion}};
    if (!o.out.empty()) {
        std::ofstream(o.out) << to_json(c).dump(2) << '\n';
    }
    write_json(j, o.report);
    return problems.empty() ? kExitPass : kExitFail;
}

int cmd_replay(const Options &o) {
    std::ifstream in(o.transcripts);
    if (!in) {
        throw ParameterError("cannot open transcripts '" + o.transcripts + "'");
    }
    const auto rep = replay_transcripts(in);
    Json j = to_json(rep);
    j["version"] = kVersion;
    write_json(j, o.report);
    return rep.ok() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qlwe: constant-depth proof-of-quantumness protocol simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Options o;

    auto *keygen = app.add_subcommand("keygen", "generate verifier keys (A, u, s, e, trapdoor)");
    add_preset_flags(keygen, o);
    keygen->add_option("--out", o.out, "output JSON (default stdout)");

    auto *run = app.add_subcommand("run", "run protocol trials and write transcripts");
    add_preset_flags(run, o);
    run->add_option("--prover", o.prover, "quantum, pass_r0, random or oracle");
    run->add_option("--trials", o.trials, "number of trials");
    run->add_option("--threads", o.threads, "worker threads (results do not depend on it)");
    run->add_option("--out", o.out, "transcripts JSONL");
    run->add_option("--report", o.report, "report JSON (default stdout)");

    auto *suite = app.add_subcommand("suite", "run a check battery: invariants, protocol, depth, extract");
    suite->add_option("kind", o.suite, "suite kind")->required();
    add_preset_flags(suite, o);
    suite->add_option("--prover", o.prover, "prover for protocol/extract suites");
    suite->add_option("--trials", o.trials, "number of trials");
    suite->add_option("--threads", o.threads, "worker threads");
    suite->add_option("--out-dir", o.out_dir, "directory for report.json and transcripts");
    suite->add_option("--report", o.report, "report JSON (default stdout)");

    auto *depthc = app.add_subcommand("depthc", "layered-circuit depth compiler");
    depthc->require_subcommand(1);
    auto *report = depthc->add_subcommand("report", "validate a circuit and print its depth report");
    report->add_option("--fanout", o.fanout, "compile the m-qubit fanout");
    report->add_option("--circuit", o.circuit, "circuit JSON file");
    report->add_flag("--linear-map", o.linear_map, "modeled Z_q linear map for the preset's shape");
    report->add_option("--params", o.params, "INI preset file (with --linear-map)");
    report->add_option("--preset", o.preset, "built-in preset (with --linear-map)");
    report->add_option("--out", o.out, "also write the circuit JSON here");
    report->add_option("--report", o.report, "report JSON (default stdout)");

    auto *replay = app.add_subcommand("replay", "re-verify transcripts and compare verdicts");
    replay->add_option("transcripts", o.transcripts, "transcripts JSONL")->required();
    replay->add_option("--report", o.report, "report JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (keygen->parsed()) return cmd_keygen(o);
        if (run->parsed()) return cmd_run(o);
        if (suite->parsed()) return cmd_suite(o);
        if (report->parsed()) return cmd_depthc_report(o);
        if (replay->parsed()) return cmd_replay(o);
    } catch (const GuardViolation &e) {
        std::cerr << "qlwe: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParameterError &e) {
        std::cerr << "qlwe: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ShapeMismatch &e) {
        std::cerr << "qlwe: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "qlwe: error: " << e.what() << '\n';
        return kExitFail;
    }
    return kExitUsage;
}

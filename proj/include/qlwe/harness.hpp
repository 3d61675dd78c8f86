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

#pragma once

#include <openssl/sha.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qlwe/fanout.hpp"
#include "qlwe/protocol.hpp"

namespace qlwe {

inline constexpr const char *kVersion = "qlwe 0.1.0";

// ---- presets and configuration --------------------------------------------------

struct Preset {
    std::string name;
    ProtocolParams params;
    std::size_t trials = 1000;
    unsigned threads = 0;  // 0: hardware concurrency
    ProverKind prover = ProverKind::Quantum;
    std::optional<double> min_rate;  // protocol suite: required overall rate for the honest prover
    double min_in_h = 0.95;          // extract suite: required InH rate

    bool desk_runnable() const { return params.mode == Mode::Desk && params.violations().empty(); }
    unsigned worker_threads() const {
        return threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    }
};

/// Small enough for exhaustive decoding (uniform A, q^n = 4096).
inline Preset preset_tiny() {
    Preset p;
    p.name = "tiny";
    p.params.n = 2;
    p.params.m = 6;
    p.params.q = 64;
    p.params.B_V = 1;
    p.params.C = 1;
    p.params.epsilon = 0.5;
    p.trials = 1000;
    p.min_in_h = 0.0;
    return p;
}

/// Meets the state-generation precondition at epsilon = 0.04 with a gadget trapdoor.
inline Preset preset_large() {
    Preset p;
    p.name = "large";
    p.params.n = 10;
    p.params.m = 270;
    p.params.q = Int{1} << 26;
    p.params.B_V = 1;
    p.params.C = 3.5;
    p.params.epsilon = 0.04;
    p.trials = 10000;
    p.min_rate = 0.90;
    return p;
}

/// Asymptotic choices eps = 1/n, B_L = n, m = n^2, q ~ B_V n^(9/2) (prime);
/// recorded, never simulated.
inline Preset preset_strict_symbolic() {
    Preset p;
    p.name = "strict-symbolic";
    p.params.n = 16;
    p.params.m = 256;
    p.params.B_L = 16;
    p.params.B_V = 32;
    p.params.q = 8388617;
    p.params.C = 1;
    p.params.epsilon = 1.0 / 16;
    p.params.mode = Mode::StrictSymbolic;
    return p;
}

inline std::vector<Preset> builtin_presets() { return {preset_tiny(), preset_large(), preset_strict_symbolic()}; }

inline Preset builtin_preset(const std::string &name) {
    for (auto &p : builtin_presets()) {
        if (p.name == name) {
            return p;
        }
    }
    throw ParameterError("unknown preset '" + name + "' (expected tiny, large or strict-symbolic)");
}

namespace detail {

template <typename T>
T config_value(const boost::property_tree::ptree &pt, const std::string &key) {
    const auto raw = pt.get<std::string>(key);
    try {
        if constexpr (std::is_same_v<T, std::string>) {
            return raw;
        } else {
            std::istringstream in(raw);
            in.imbue(std::locale::classic());
            T v{};
            in >> v;
            if (in.fail() || !(in >> std::ws).eof()) {
                throw std::invalid_argument(raw);
            }
            return v;
        }
    } catch (const std::invalid_argument &) {
        throw ParameterError("config field '" + key + "': cannot parse '" + raw + "'");
    }
}

template <typename T>
void maybe_set(const boost::property_tree::ptree &pt, const std::string &key, T &out) {
    if (pt.get_optional<std::string>(key)) {
        out = config_value<T>(pt, key);
    }
}

}  // namespace detail

/// Parses an INI preset:
///
///   [preset]  name, mode (desk | strict-symbolic), base (optional built-in)
///   [params]  n, m, q, B_V, C, epsilon (required unless base is set); B_L, lambda, ell
///   [run]     trials, threads, prover, min_rate, min_in_h
inline Preset parse_config(std::istream &in, const std::string &origin = "config") {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error &err) {
        throw ParameterError(origin + ": " + err.message() + " (line " + std::to_string(err.line()) + ")");
    }
    static const std::map<std::string, std::vector<std::string>> known = {
        {"preset", {"name", "mode", "base"}},
        {"params", {"n", "m", "q", "B_V", "B_L", "C", "epsilon", "lambda", "ell"}},
        {"run", {"trials", "threads", "prover", "min_rate", "min_in_h"}}};
    for (const auto &[section, body] : pt) {
        const auto it = known.find(section);
        if (it == known.end()) {
            throw ParameterError(origin + ": unknown section [" + section + "]");
        }
        for (const auto &kv : body) {
            if (std::find(it->second.begin(), it->second.end(), kv.first) == it->second.end()) {
                throw ParameterError(origin + ": unknown field '" + section + "." + kv.first + "'");
            }
        }
    }
    Preset p;
    const auto base = pt.get_optional<std::string>("preset.base");
    if (base) {
        p = builtin_preset(*base);
    } else {
        for (const char *f : {"n", "m", "q", "B_V", "C", "epsilon"}) {
            if (!pt.get_optional<std::string>(std::string("params.") + f)) {
                throw ParameterError(origin + ": missing required field 'params." + f + "'");
            }
        }
        p.name = "custom";
    }
    using detail::maybe_set;
    maybe_set(pt, "preset.name", p.name);
    if (auto mode = pt.get_optional<std::string>("preset.mode")) {
        if (*mode == "desk") {
            p.params.mode = Mode::Desk;
        } else if (*mode == "strict-symbolic") {
            p.params.mode = Mode::StrictSymbolic;
        } else {
            throw ParameterError(origin + ": field 'preset.mode' must be desk or strict-symbolic");
        }
    }
    maybe_set(pt, "params.n", p.params.n);
    maybe_set(pt, "params.m", p.params.m);
    maybe_set(pt, "params.q", p.params.q);
    maybe_set(pt, "params.B_V", p.params.B_V);
    maybe_set(pt, "params.B_L", p.params.B_L);
    maybe_set(pt, "params.C", p.params.C);
    maybe_set(pt, "params.epsilon", p.params.epsilon);
    maybe_set(pt, "params.lambda", p.params.lambda);
    maybe_set(pt, "params.ell", p.params.ell);
    maybe_set(pt, "run.trials", p.trials);
    maybe_set(pt, "run.threads", p.threads);
    maybe_set(pt, "run.min_in_h", p.min_in_h);
    if (pt.get_optional<std::string>("run.min_rate")) {
        p.min_rate = detail::config_value<double>(pt, "run.min_rate");
    }
    if (auto prover = pt.get_optional<std::string>("run.prover")) {
        p.prover = prover_kind_from_name(*prover);
    }
    if (p.params.n < 1 || p.params.m < 1) {
        throw ParameterError(origin + ": fields 'params.n' and 'params.m' must be positive");
    }
    if (p.params.q < 2 || p.params.q > (Int{1} << 31)) {
        throw ParameterError(origin + ": field 'params.q' must lie in [2, 2^31]");
    }
    if (p.trials < 1) {
        throw ParameterError(origin + ": field 'run.trials' must be at least 1");
    }
    return p;
}

inline Preset load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParameterError("cannot open config file '" + path + "'");
    }
    return parse_config(in, path);
}

inline Json to_json(const Preset &p) {
    Json j{{"name", p.name},
           {"params", to_json(p.params)},
           {"trials", p.trials},
           {"prover", prover_kind_name(p.prover)},
           {"min_in_h", p.min_in_h},
           {"desk_runnable", p.desk_runnable()},
           {"violations", p.params.violations()}};
    j["min_rate"] = p.min_rate ? Json(*p.min_rate) : Json(nullptr);
    return j;
}

inline std::string sha256_hex(const std::string &data) {
    unsigned char md[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char *>(data.data()), data.size(), md);
    std::ostringstream out;
    for (unsigned char c : md) {
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
    }
    return out.str();
}

/// Hash of the resolved preset (thread count excluded: it never changes results).
inline std::string config_hash(const Preset &p) { return sha256_hex(to_json(p).dump()); }

// ---- reports ------------------------------------------------------------------------

struct Check {
    std::string name;
    bool passed = false;
    Json value;
    std::string detail;
};

inline Json to_json(const Check &c) {
    return Json{{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"detail", c.detail}};
}

struct RunReport {
    std::string suite;
    std::string preset;
    std::string prover;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    Json statistics = Json::object();
    std::vector<Check> checks;
    double wall_time_s = 0;
    std::string config_hash;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check &c) { return c.passed; });
    }
};

inline Json to_json(const RunReport &r) {
    Json checks = Json::array();
    for (const auto &c : r.checks) {
        checks.push_back(to_json(c));
    }
    return Json{{"suite", r.suite},
                {"preset", r.preset},
                {"prover", r.prover},
                {"trials", r.trials},
                {"seed", r.seed},
                {"statistics", r.statistics},
                {"checks", checks},
                {"passed", r.passed()},
                {"wall_time_s", r.wall_time_s},
                {"config_hash", r.config_hash},
                {"version", kVersion}};
}

enum class SuiteKind { Invariants, Protocol, Depth, Extract };

inline SuiteKind suite_kind_from_name(const std::string &s) {
    if (s == "invariants") return SuiteKind::Invariants;
    if (s == "protocol") return SuiteKind::Protocol;
    if (s == "depth") return SuiteKind::Depth;
    if (s == "extract") return SuiteKind::Extract;
    throw ParameterError("unknown suite '" + s + "' (expected invariants, protocol, depth or extract)");
}

inline const char *suite_kind_name(SuiteKind k) {
    switch (k) {
        case SuiteKind::Invariants:
            return "invariants";
        case SuiteKind::Protocol:
            return "protocol";
        case SuiteKind::Depth:
            return "depth";
        case SuiteKind::Extract:
            return "extract";
    }
    return "?";
}

// ---- suites ---------------------------------------------------------------------------

namespace detail {

inline void require_desk(const Preset &p) {
    if (p.params.mode != Mode::Desk) {
        throw GuardViolation("desk_runnable", "preset '" + p.name + "' is strict-symbolic and cannot be simulated");
    }
    const auto v = p.params.violations();
    if (!v.empty()) {
        throw GuardViolation("desk_runnable", "preset '" + p.name + "' violates: " + v.front());
    }
}

inline Check robust_overlap_check(const Preset &p, std::uint64_t seed) {
    const auto &pp = p.params;
    const RobustStateSpec spec(pp.m, pp.q, pp.interval_exponent());
    const Int bv = static_cast<Int>(std::floor(pp.B_V));
    Check c{"robust_overlap_bound", true, nullptr, ""};
    if (spec.side() + bv > pp.q) {
        c.detail = "skipped: 2^r + B_V exceeds q";
        return c;
    }
    const double floor = spec.overlap_floor(pp.B_V);
    double worst = 1;
    std::size_t count = 0;
    bool closed_form_ok = true;
    auto visit = [&](const ZqVector &e) {
        const double o = spec.exact_overlap(e);
        worst = std::min(worst, o);
        closed_form_ok = closed_form_ok && o == spec.closed_form_overlap(e);
        ++count;
    };
    const double combos = std::pow(static_cast<double>(2 * bv + 1), pp.m);
    if (combos <= 1e5) {
        std::vector<Int> e(static_cast<std::size_t>(pp.m), -bv);
        while (true) {
            visit(ZqVector(pp.q, e));
            std::size_t i = 0;
            while (i < e.size() && e[i] == bv) {
                e[i++] = -bv;
            }
            if (i == e.size()) {
                break;
            }
            ++e[i];
        }
    } else {
        Rng rng = make_stream(seed, "invariants_overlap", 0);
        for (int t = 0; t < 10000; ++t) {
            std::vector<Int> e(static_cast<std::size_t>(pp.m));
            for (auto &v : e) {
                v = static_cast<Int>(uniform_below(rng, static_cast<std::uint64_t>(2 * bv + 1))) - bv;
            }
            visit(ZqVector(pp.q, e));
        }
    }
    c.passed = worst >= floor && closed_form_ok;
    c.value = Json{{"min_overlap", worst}, {"floor", floor}, {"shifts", count}, {"closed_form_exact", closed_form_ok}};
    return c;
}

inline Check g_miss_check(const Preset &p, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(p.params.n);
    Check c{"g_set_miss_probability", true, nullptr, ""};
    if (n % 2 != 0) {
        c.detail = "skipped: n is odd";
        return c;
    }
    Rng rng = make_stream(seed, "invariants_gset", 0);
    const std::size_t samples = 20000;
    const std::size_t bits = p.params.encoding_bits();
    std::size_t miss[2] = {0, 0};
    for (std::size_t t = 0; t < samples; ++t) {
        const ZqVector x = ZqVector::uniform(p.params.q, n, rng);
        const Bits d = PassR0Prover::random_bits(bits, rng);
        for (int b = 0; b < 2; ++b) {
            miss[b] += !in_G_bx(d, b, x);
        }
    }
    Json value = Json::array();
    for (int b = 0; b < 2; ++b) {
        const double exact = g_miss_probability(n, b);
        const double rate = static_cast<double>(miss[b]) / static_cast<double>(samples);
        const double tol = 5 * std::sqrt(exact * (1 - exact) / static_cast<double>(samples)) + 1e-4;
        c.passed = c.passed && std::abs(rate - exact) <= tol;
        value.push_back(Json{{"b", b}, {"measured", rate}, {"exact", exact}, {"tolerance", tol}});
    }
    c.value = value;
    return c;
}

inline Check partition_check(const Preset &p, std::uint64_t seed) {
    Rng rng = make_stream(seed, "invariants_partition", 0);
    const auto n = static_cast<std::size_t>(p.params.n);
    Check c{"classify_partition", true, nullptr, ""};
    if (n % 2 != 0) {
        c.detail = "skipped: n is odd";
        return c;
    }
    std::size_t counts[3] = {0, 0, 0};
    for (int t = 0; t < 2000; ++t) {
        const ZqVector s = ZqVector::uniform(p.params.q, n, rng), x = ZqVector::uniform(p.params.q, n, rng);
        HardcoreTuple tup{random_bit(rng), x, PassR0Prover::random_bits(p.params.encoding_bits(), rng),
                          random_bit(rng)};
        const auto a = classify_tuple(tup, s);
        tup.c ^= 1;
        const auto b = classify_tuple(tup, s);
        const bool ok = (a == TupleClass::Neither) ? b == TupleClass::Neither
                                                   : (b != TupleClass::Neither && (a == TupleClass::InH) != (b == TupleClass::InH));
        c.passed = c.passed && ok;
        ++counts[static_cast<int>(a)];
    }
    c.value = Json{{"InH", counts[0]}, {"InHbar", counts[1]}, {"Neither", counts[2]}};
    return c;
}

inline Check inversion_check(const Preset &p, std::uint64_t seed) {
    Check c{"inversion_on_validated_instances", true, nullptr, ""};
    std::size_t validated = 0, recovered = 0, recovered_validated = 0;
    const std::size_t trials = 100;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = make_stream(seed, "invariants_keys", t);
        const auto keys = generate_keys(p.params, rng);
        const bool valid =
            validate_instance(keys.instance, p.params, keys.trapdoor ? &*keys.trapdoor : nullptr).valid();
        bool ok = false;
        try {
            ok = verifier_invert(keys.instance.A, keys.trapdoor, keys.instance.u) == keys.s();
        } catch (const InversionFailed &) {
        }
        recovered += ok;
        validated += valid;
        recovered_validated += ok && valid;
    }
    c.passed = recovered_validated == validated;
    c.value = Json{{"instances", trials}, {"validated", validated}, {"recovered", recovered},
                   {"recovered_validated", recovered_validated}};
    c.detail = "recovery must be exact on every validated instance";
    return c;
}

inline Check replay_determinism_check(const Preset &p, std::uint64_t seed) {
    std::ostringstream one, many;
    estimate_pass_rate(p.params, ProverKind::Quantum, 50, seed, 1, &one);
    estimate_pass_rate(p.params, ProverKind::Quantum, 50, seed, std::max(2u, p.worker_threads()), &many);
    std::istringstream in(many.str());
    const auto rep = replay_transcripts(in);
    Check c{"replay_determinism", one.str() == many.str() && rep.ok(), nullptr, ""};
    c.value = Json{{"identical_across_threads", one.str() == many.str()}, {"replay", to_json(rep)}};
    return c;
}

}  // namespace detail

/// Runs one battery; transcripts and the JSON report go to `out_dir` when set.
inline RunReport run_suite(SuiteKind kind, const Preset &preset, std::uint64_t seed,
                           const std::optional<std::filesystem::path> &out_dir = std::nullopt,
                           std::optional<ProverKind> prover_override = std::nullopt,
                           std::optional<std::size_t> trials_override = std::nullopt) {
    const auto start = std::chrono::steady_clock::now();
    RunReport rep;
    rep.suite = suite_kind_name(kind);
    rep.preset = preset.name;
    rep.seed = seed;
    rep.config_hash = config_hash(preset);
    const ProverKind prover = prover_override.value_or(preset.prover);
    const std::size_t trials = trials_override.value_or(preset.trials);
    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
    }
    switch (kind) {
        case SuiteKind::Invariants: {
            detail::require_desk(preset);
            rep.checks.push_back(detail::robust_overlap_check(preset, seed));
            rep.checks.push_back(detail::g_miss_check(preset, seed));
            rep.checks.push_back(detail::partition_check(preset, seed));
            rep.checks.push_back(detail::inversion_check(preset, seed));
            const auto honest = estimate_pass_rate(preset.params, ProverKind::Quantum, 200, seed, preset.worker_threads());
            rep.checks.push_back({"honest_r0_always_accepted",
                                  honest.per_challenge[0].accepts == honest.per_challenge[0].count,
                                  Json{{"r0_rate", honest.per_challenge[0].rate()}, {"r0_trials", honest.per_challenge[0].count}},
                                  ""});
            const auto oracle = estimate_pass_rate(preset.params, ProverKind::Oracle, 100, seed, preset.worker_threads());
            rep.checks.push_back({"oracle_prover_rate_one", oracle.accepts == oracle.trials, Json(oracle.rate), ""});
            rep.checks.push_back(detail::replay_determinism_check(preset, seed));
            break;
        }
        case SuiteKind::Protocol: {
            detail::require_desk(preset);
            rep.prover = prover_kind_name(prover);
            rep.trials = trials;
            std::ostringstream buffer;
            const auto st = estimate_pass_rate(preset.params, prover, trials, seed, preset.worker_threads(), &buffer);
            rep.statistics = to_json(st);
            switch (prover) {
                case ProverKind::Quantum:
                    rep.checks.push_back({"r0_rate_exactly_one", st.per_challenge[0].accepts == st.per_challenge[0].count,
                                          Json(st.per_challenge[0].rate()), ""});
                    if (preset.min_rate) {
                        rep.checks.push_back({"rate_at_least_min_rate", st.rate >= *preset.min_rate, Json(st.rate),
                                              "min_rate = " + std::to_string(*preset.min_rate)});
                    }
                    break;
                case ProverKind::PassR0:
                    rep.checks.push_back({"rate_in_0.70_0.80", st.rate >= 0.70 && st.rate <= 0.80, Json(st.rate), ""});
                    break;
                case ProverKind::Random:
                    rep.checks.push_back({"rate_at_most_0.6", st.rate <= 0.6, Json(st.rate), ""});
                    break;
                case ProverKind::Oracle:
                    rep.checks.push_back({"rate_exactly_one", st.accepts == st.trials, Json(st.rate), ""});
                    break;
            }
            std::istringstream in(buffer.str());
            const auto replayed = replay_transcripts(in);
            rep.checks.push_back({"replay_reproduces_verdicts", replayed.ok(), to_json(replayed), ""});
            if (out_dir) {
                std::ofstream(*out_dir / "transcripts.jsonl") << buffer.str();
            }
            break;
        }
        case SuiteKind::Depth: {
            Json table = Json::array();
            bool exact = true;
            for (std::size_t m = 1; m <= 8; ++m) {
                const auto c = compile_fanout(m);
                double worst = 1;
                for (int t = 0; t < 100; ++t) {
                    Rng rng = make_stream(seed, "depth_fanout", m * 1000 + static_cast<std::size_t>(t));
                    const auto in = DenseState::random(m, rng);
                    worst = std::min(worst, fidelity(run_layered(c, in, rng).output, reference_fanout(m, in)));
                }
                exact = exact && worst >= 1 - 1e-9;
                const auto d = depth_report(c);
                table.push_back(Json{{"m", m}, {"min_fidelity", worst}, {"layers", d.num_layers},
                                     {"quantum_depth", d.max_quantum_depth}, {"classical_depth", d.max_classical_depth},
                                     {"qubits", d.total_qubits}});
            }
            rep.checks.push_back({"fanout_equivalence_m1_to_8", exact, table, "fidelity >= 1 - 1e-9 on 100 random states"});
            bool scaling = true;
            for (std::size_t m = 1; m <= 64; ++m) {
                const auto d = depth_report(compile_fanout(m));
                scaling = scaling && d.num_layers <= 2 && d.max_classical_depth <= ceil_log2(m) + 1 &&
                          circuit_problems(compile_fanout(m)).empty();
            }
            rep.checks.push_back({"fanout_depth_scaling_m_to_64", scaling, nullptr, "<= 2 layers, classical <= ceil(log2 m) + 1"});
            const auto lin = compile_linear_map_modeled(
                ZqMatrix(preset.params.q, static_cast<std::size_t>(preset.params.m), static_cast<std::size_t>(preset.params.n) + 1));
            rep.statistics = Json{{"linear_map_modeled", to_json(depth_report(lin))}};
            break;
        }
        case SuiteKind::Extract: {
            detail::require_desk(preset);
            rep.prover = prover_kind_name(prover);
            rep.trials = trials;
            const auto st = run_extraction(preset.params, prover, trials, seed);
            rep.statistics = to_json(st);
            rep.checks.push_back({"in_h_rate_at_least_min", st.in_h_rate() >= preset.min_in_h, Json(st.in_h_rate()),
                                  "min_in_h = " + std::to_string(preset.min_in_h)});
            rep.checks.push_back({"labels_partition_trials", st.in_h + st.in_hbar + st.neither == st.trials,
                                  Json(st.trials), ""});
            break;
        }
    }
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out_dir) {
        std::ofstream(*out_dir / "report.json") << to_json(rep).dump(2) << '\n';
    }
    return rep;
}

}  // namespace qlwe

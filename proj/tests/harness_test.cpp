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

#include "qlwe/harness.hpp"

#include <sstream>

#include "gtest/gtest.h"

using namespace qlwe;

namespace {

Preset parse(const std::string &text) {
    std::istringstream in(text);
    return parse_config(in);
}

const char *kTiny = R"(
[preset]
name = tiny
mode = desk
[params]
n = 2
m = 6
q = 64
B_V = 1
C = 1
epsilon = 0.5
)";

Json without_wall_time(const RunReport &r) {
    Json j = to_json(r);
    j.erase("wall_time_s");
    return j;
}

}  // namespace

TEST(load_config, tiny_derives_interval_exponent) {
    const auto p = parse(kTiny);
    ASSERT_EQ(p.name, "tiny");
    // floor(log2(64 / sqrt(12 * 6))) = floor(log2 7.54) = 2.
    ASSERT_EQ(p.params.interval_exponent(), 2);
    ASSERT_NEAR(p.params.boundedness_radius(), 64 / std::sqrt(72.0), 1e-12);
    const Json j = to_json(p);
    ASSERT_EQ(j["params"]["derived"]["r"], 2);
    ASSERT_TRUE(j["desk_runnable"].get<bool>());
}

TEST(load_config, shipped_files_match_builtin_presets) {
    for (const char *name : {"tiny", "large", "strict_symbolic"}) {
        const auto p = load_config(std::string(QLWE_SOURCE_DIR) + "/configs/" + name + ".ini");
        const auto b = builtin_preset(p.name);
        ASSERT_EQ(to_json(p.params), to_json(b.params)) << name;
        ASSERT_EQ(config_hash(p), config_hash(b)) << name;
    }
}

TEST(load_config, missing_field_is_named) {
    std::string text = kTiny;
    text.replace(text.find("q = 64\n"), 7, "");
    try {
        parse(text);
        FAIL() << "expected ParameterError";
    } catch (const ParameterError &e) {
        ASSERT_NE(std::string(e.what()).find("params.q"), std::string::npos) << e.what();
    }
}

TEST(load_config, rejects_unknown_fields_and_bad_values) {
    ASSERT_THROW(parse(std::string(kTiny) + "[run]\ntrails = 3\n"), ParameterError);
    ASSERT_THROW(parse(std::string(kTiny) + "[extra]\nx = 1\n"), ParameterError);
    std::string bad = kTiny;
    bad.replace(bad.find("n = 2"), 5, "n = two");
    ASSERT_THROW(parse(bad), ParameterError);
    ASSERT_THROW(parse(std::string(kTiny) + "[run]\nprover = psychic\n"), ParameterError);
    ASSERT_THROW(load_config("/nonexistent/qlwe.ini"), ParameterError);
}

TEST(load_config, base_preset_with_override) {
    const auto p = parse("[preset]\nbase = large\nname = large-fast\n[run]\ntrials = 100\n");
    ASSERT_EQ(p.params.m, 270);
    ASSERT_EQ(p.trials, 100u);
    ASSERT_EQ(p.name, "large-fast");
}

TEST(load_config, strict_symbolic_is_flagged) {
    const auto p = builtin_preset("strict-symbolic");
    ASSERT_FALSE(p.desk_runnable());
    ASSERT_FALSE(to_json(p)["desk_runnable"].get<bool>());
    try {
        run_suite(SuiteKind::Protocol, p, 1);
        FAIL() << "expected GuardViolation";
    } catch (const GuardViolation &g) {
        ASSERT_EQ(g.guard, "desk_runnable");
    }
}

TEST(config_hash, sha256_reference_and_sensitivity) {
    ASSERT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    auto a = preset_tiny();
    auto b = preset_tiny();
    b.threads = 7;
    ASSERT_EQ(config_hash(a), config_hash(b));
    b.params.C = 1.5;
    ASSERT_NE(config_hash(a), config_hash(b));
}

TEST(run_suite, invariants_pass_on_tiny) {
    const auto rep = run_suite(SuiteKind::Invariants, preset_tiny(), 3);
    ASSERT_TRUE(rep.passed()) << to_json(rep).dump(2);
    ASSERT_GE(rep.checks.size(), 6u);
    for (const auto &c : rep.checks) {
        ASSERT_FALSE(c.name.empty());
    }
}

TEST(run_suite, protocol_pass_r0_in_band) {
    const auto rep = run_suite(SuiteKind::Protocol, preset_large(), 4, std::nullopt, ProverKind::PassR0, 2000);
    ASSERT_TRUE(rep.passed()) << to_json(rep).dump(2);
    const double rate = rep.statistics["rate"];
    ASSERT_GE(rate, 0.70);
    ASSERT_LE(rate, 0.80);
}

TEST(run_suite, depth_table_exact) {
    const auto rep = run_suite(SuiteKind::Depth, preset_tiny(), 5);
    ASSERT_TRUE(rep.passed());
    ASSERT_EQ(rep.checks[0].value.size(), 8u);
}

TEST(run_suite, extract_on_large_preset) {
    const auto rep = run_suite(SuiteKind::Extract, preset_large(), 6, std::nullopt, std::nullopt, 200);
    ASSERT_TRUE(rep.passed()) << to_json(rep).dump(2);
}

TEST(run_suite, report_is_function_of_preset_and_seed) {
    auto p = preset_large();
    p.threads = 1;
    const auto a = run_suite(SuiteKind::Protocol, p, 8, std::nullopt, ProverKind::Quantum, 100);
    p.threads = 3;
    const auto b = run_suite(SuiteKind::Protocol, p, 8, std::nullopt, ProverKind::Quantum, 100);
    ASSERT_EQ(without_wall_time(a), without_wall_time(b));
    ASSERT_EQ(to_json(a)["version"], kVersion);
    ASSERT_EQ(to_json(a)["config_hash"].get<std::string>().size(), 64u);
}

TEST(run_suite, writes_report_and_transcripts) {
    const auto dir = std::filesystem::temp_directory_path() / "qlwe_harness_test";
    std::filesystem::remove_all(dir);
    const auto rep = run_suite(SuiteKind::Protocol, preset_tiny(), 9, dir, ProverKind::Quantum, 20);
    ASSERT_TRUE(std::filesystem::exists(dir / "report.json"));
    std::ifstream in(dir / "transcripts.jsonl");
    const auto replayed = replay_transcripts(in);
    ASSERT_TRUE(replayed.ok());
    ASSERT_EQ(replayed.trials, 20u);
    std::filesystem::remove_all(dir);
}

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include "../support/corpus.hpp"

#include <rescan/cli/pipeline.hpp>
#include <rescan/cli/score.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace rescan;
using namespace rescan::cli;

namespace
{
namespace fs = std::filesystem;

double pct(const std::optional<double>& v)
{
    return std::round(*v * 10000.0) / 100.0;
}

int run_cli(const std::string& args)
{
    const auto status = std::system((std::string{RESCAN_CLI_PATH} + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Finding sample_finding()
{
    Finding f;
    f.function = "Bank.withdraw()";
    f.contract = "Bank";
    f.function_name = "withdraw";
    f.entry_functions = {"Bank.withdraw()"};
    f.span = {"bank.sol", 120, 40, 9, 9};
    f.rule = "eth-call-value";
    f.confidence = "high";
    f.guard_state = {"Bank.balances"};
    f.stale_state = {"Bank.balances"};
    f.check_lines = {8};
    f.effect_line = 10;
    f.verdict = VerdictRecord{"confirmed", "", 3, 17, {0, 4, 9}, nlohmann::json{{"attacker", "0x20002"}}};
    return f;
}

Report sample_report()
{
    Report r;
    r.stages = "both";
    r.config = AnalysisConfig{}.to_json();
    r.config_fingerprint = AnalysisConfig{}.fingerprint();
    UnitReport u;
    u.path = "bank.sol";
    u.compiler_version = "0.8.26";
    u.findings.push_back(sample_finding());
    auto dropped = sample_finding();
    dropped.ppt_drop = "storage-mutex";
    dropped.verdict.reset();
    u.findings.push_back(dropped);
    r.units.push_back(u);
    return r;
}
}  // namespace

TEST(score, reproduces_published_ratios)
{
    const auto a = score_counts(70, 27, 11, 0);
    EXPECT_DOUBLE_EQ(pct(a.precision), 72.16);
    EXPECT_DOUBLE_EQ(pct(a.recall), 86.42);
    EXPECT_DOUBLE_EQ(pct(a.f1), 78.65);
    const auto b = score_counts(30, 14, 1, 0);
    EXPECT_DOUBLE_EQ(pct(b.precision), 68.18);
    EXPECT_DOUBLE_EQ(pct(b.recall), 96.77);
    EXPECT_DOUBLE_EQ(pct(b.f1), 80.00);
}

TEST(score, zero_denominators_are_absent)
{
    const auto s = score_counts(0, 0, 0, 4);
    EXPECT_FALSE(s.precision);
    EXPECT_FALSE(s.recall);
    EXPECT_FALSE(s.f1);
    EXPECT_NE(render_text(s).find("n/a"), std::string::npos);
    const auto j = to_json(s);
    EXPECT_TRUE(j["precision"].is_null());
}

TEST(score, text_uses_two_decimals)
{
    EXPECT_NE(render_text(score_counts(70, 27, 11, 0)).find("precision 72.16%  recall 86.42%  F1 78.65%"),
        std::string::npos);
}

TEST(score, matching_by_granularity)
{
    Report r = sample_report();
    LabelManifest labels;
    labels.records.push_back({"bank.sol", "0.8.26", true, {{"Bank", "withdraw", 9, 9}}, ""});
    labels.records.push_back({"other.sol", "0.8.26", true, {{"Other", "pay", 3, 4}}, ""});
    labels.records.push_back({"missing_negative.sol", "0.8.26", false, {}, ""});
    const auto s = score({r}, labels, {});
    EXPECT_EQ(s.tp, 1u);
    EXPECT_EQ(s.fp, 0u);
    EXPECT_EQ(s.fn, 1u);
    EXPECT_EQ(s.diagnostics.size(), 2u);

    labels.records[0].positives[0].function = "deposit";
    EXPECT_EQ(score({r}, labels, {Granularity::function, false}).tp, 0u);
    EXPECT_EQ(score({r}, labels, {Granularity::contract, false}).tp, 1u);
    labels.records[0].positives[0] = {"Bank", "withdraw", 20, 30};
    EXPECT_EQ(score({r}, labels, {Granularity::line, false}).tp, 0u);
}

TEST(score, include_all_counts_unconfirmed)
{
    Report r = sample_report();
    r.units[0].findings[0].verdict->status = "unknown-budget";
    LabelManifest labels;
    labels.records.push_back({"bank.sol", "", true, {{"Bank", "withdraw", 9, 9}}, ""});
    EXPECT_EQ(score({r}, labels, {}).tp, 0u);
    EXPECT_EQ(score({r}, labels, {Granularity::function, true}).tp, 1u);
}

TEST(score, parse_granularity_rejects_unknown)
{
    EXPECT_EQ(parse_granularity("line"), Granularity::line);
    EXPECT_THROW(parse_granularity("statement"), std::invalid_argument);
}

TEST(config, defaults_validate)
{
    const AnalysisConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.time_budget, std::chrono::seconds{300});
    EXPECT_EQ(c.stages, Stages::both);
    EXPECT_EQ(c.fingerprint().size(), 16u);
}

TEST(config, rejects_bad_values)
{
    EXPECT_THROW(config_from_json({{"time_budget", 0}}).validate(), ConfigError);
    EXPECT_THROW(config_from_json({{"workers", -2}}), ConfigError);
    EXPECT_THROW(config_from_json({{"stages", "3"}}), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::array()), ConfigError);
    EXPECT_THROW(parse_stages("all"), ConfigError);
    AnalysisConfig c;
    c.budgets.max_paths = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(config, reads_all_sections)
{
    const auto c = config_from_json({{"time_budget", 60}, {"workers", 2}, {"stages", "1"},
        {"solc", {{"version", "0.8.26"}, {"optimize", true}}}, {"allowlist", {"0xbeef"}},
        {"symexec", {{"max_paths", 10}, {"loop_unroll", 1}}}});
    EXPECT_EQ(c.time_budget, std::chrono::seconds{60});
    EXPECT_EQ(c.workers, 2u);
    EXPECT_EQ(c.stages, Stages::stage1);
    EXPECT_EQ(c.solc.version, "0.8.26");
    EXPECT_TRUE(c.solc.optimize);
    EXPECT_EQ(c.budgets.max_paths, 10u);
    EXPECT_EQ(c.budgets.loop_unroll, 1u);
    EXPECT_NE(c.fingerprint(), AnalysisConfig{}.fingerprint());
}

TEST(report, json_round_trip)
{
    const auto r = sample_report();
    const auto j = to_json(r, true);
    EXPECT_EQ(to_json(report_from_json(j), true), j);
    EXPECT_THROW(report_from_json({{"format", "other"}}), std::runtime_error);
}

TEST(report, finding_fields_are_stable)
{
    const auto j = to_json(sample_report(), false);
    EXPECT_EQ(j["format"], "rescan-report/1");
    const auto& f = j["units"][0]["findings"][0];
    const nlohmann::json expected = {
        {"function", "Bank.withdraw()"},
        {"contract", "Bank"},
        {"function_name", "withdraw"},
        {"entry_functions", {"Bank.withdraw()"}},
        {"span", {{"file", "bank.sol"}, {"start", 120}, {"length", 40}, {"line", 9}, {"end_line", 9}}},
        {"rule", "eth-call-value"},
        {"confidence", "high"},
        {"gas_limited", false},
        {"guard_state", {"Bank.balances"}},
        {"stale_state", {"Bank.balances"}},
        {"check_lines", {8}},
        {"effect_line", 10},
        {"ppt_drop", nullptr},
        {"reported", true},
        {"counted", true},
        {"tags", nlohmann::json::array()},
        {"verdict",
            {{"status", "confirmed"}, {"reason", ""}, {"paths", 3}, {"solver_queries", 17}, {"path", {0, 4, 9}},
                {"witness", {{"attacker", "0x20002"}}}}},
    };
    EXPECT_EQ(f, expected);
    EXPECT_FALSE(j["units"][0].contains("timings_ms"));
    const auto& dropped = j["units"][0]["findings"][1];
    EXPECT_EQ(dropped["reported"], false);
    EXPECT_EQ(dropped["tags"], nlohmann::json({"dismissed"}));
}

TEST(report, counting_rules)
{
    auto f = sample_finding();
    EXPECT_TRUE(f.counted());
    f.gas_limited = true;
    EXPECT_TRUE(f.reported());
    EXPECT_FALSE(f.counted());
    f = sample_finding();
    f.verdict->status = "unreachable";
    EXPECT_FALSE(f.reported());
    f.verdict.reset();
    f.confidence = "low";
    EXPECT_TRUE(f.reported());
    EXPECT_FALSE(f.counted());
}

TEST(pipeline, empty_source_set_is_clean)
{
    const auto r = analyze({}, AnalysisConfig{}, {});
    EXPECT_TRUE(r.units.empty());
    EXPECT_EQ(exit_code(r), 0);
    EXPECT_EQ(run_cli("analyze"), 0);
}

TEST(pipeline, compile_failure_sets_error_exit)
{
    const auto dir = fs::temp_directory_path() / "rescan_cli_test";
    fs::create_directories(dir);
    const auto bad = dir / "bad.sol";
    std::ofstream{bad} << "pragma solidity ^0.8.0; contract { }";
    AnalysisConfig c;
    c.stages = Stages::stage1;
    const auto r = analyze({bad.string()}, c, {});
    ASSERT_EQ(r.units.size(), 1u);
    EXPECT_TRUE(r.units[0].error);
    EXPECT_EQ(exit_code(r), 2);
    EXPECT_EQ(run_cli("analyze --stage 1 " + bad.string()), 2);
}

TEST(pipeline, cli_exit_codes_and_dot_output)
{
    const auto dir = fs::temp_directory_path() / "rescan_cli_dot";
    fs::remove_all(dir);
    const auto corpus = fs::path{test::corpus_dir()};
    EXPECT_EQ(run_cli("analyze --stage 1 " + (corpus / "bank_safe.sol").string()), 0);
    EXPECT_EQ(run_cli("analyze --stage 1 --emit-dot " + dir.string() + " " + (corpus / "two_contract_withdraw.sol").string()), 1);
    EXPECT_TRUE(fs::exists(dir / "two_contract_withdraw.icfg.dot"));
    EXPECT_TRUE(fs::exists(dir / "two_contract_withdraw.ipdg.dot"));
    EXPECT_EQ(run_cli("analyze --stage 4"), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
}

TEST(pipeline, cli_score_round_trip)
{
    const auto dir = fs::temp_directory_path() / "rescan_cli_score";
    fs::create_directories(dir);
    const auto corpus = fs::path{test::corpus_dir()};
    ASSERT_EQ(run_cli("analyze --stage 1 --format json -o " + (dir / "r.json").string() + " " +
                      (corpus / "two_contract_withdraw.sol").string()),
        1);
    EXPECT_EQ(run_cli("score --reports " + dir.string() + " --labels " + (corpus / "labels.json").string()), 0);
    EXPECT_EQ(run_cli("score --reports " + dir.string() + " --labels /nonexistent.json"), 2);
}

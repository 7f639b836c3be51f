// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/cli/config.hpp>

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace rescan::cli
{
inline constexpr std::string_view report_format = "rescan-report/1";
inline constexpr std::string_view tool_version = "0.1.0";

struct Span
{
    std::string file;
    std::size_t start = 0;
    std::size_t length = 0;
    std::size_t line = 0;
    std::size_t end_line = 0;
};

struct VerdictRecord
{
    std::string status;  ///< confirmed, unreachable, unknown-timeout, unknown-budget
    std::string reason;
    std::size_t paths = 0;
    std::size_t solver_queries = 0;
    std::vector<std::size_t> path;  ///< Block ids of the first transaction.
    nlohmann::json witness;         ///< Null unless confirmed.
};

/// One Stage-I warning and what Stage II made of it.
struct Finding
{
    std::string function;  ///< Function id holding the interaction.
    std::string contract;
    std::string function_name;
    std::vector<std::string> entry_functions;
    Span span;
    std::string rule;
    std::string confidence;  ///< high, low, gas-limited
    bool gas_limited = false;
    std::vector<std::string> guard_state;
    std::vector<std::string> stale_state;
    std::vector<std::size_t> check_lines;
    std::optional<std::size_t> effect_line;
    std::optional<std::string> ppt_drop;  ///< Pre-filter reason when dropped.
    std::optional<VerdictRecord> verdict;
    double stage2_ms = 0;

    /// Not ruled out: dropped by the pre-filter or proven unreachable.
    [[nodiscard]] bool reported() const;
    /// Counted by scoring without --include-all: confirmed, or high
    /// confidence with no Stage-II verdict, and never gas-limited.
    [[nodiscard]] bool counted() const;
    /// gas-limited, low-confidence, unknown-*, dismissed.
    [[nodiscard]] std::vector<std::string> tags() const;
};

struct Timings
{
    double compile_ms = 0;
    double stage1_ms = 0;
    double stage2_ms = 0;
    double total_ms = 0;
};

/// Result for one analyzed source file.
struct UnitReport
{
    std::string path;
    std::string compiler_version;
    std::optional<std::string> error;
    std::vector<Finding> findings;
    Timings timings;
};

struct Report
{
    std::string stages;
    std::string config_fingerprint;
    nlohmann::json config;
    std::vector<UnitReport> units;

    [[nodiscard]] bool has_findings() const;
    [[nodiscard]] bool has_errors() const;
};

nlohmann::json to_json(const Report& r, bool with_timings = true);
Report report_from_json(const nlohmann::json& j);
std::string render_text(const Report& r);

}  // namespace rescan::cli

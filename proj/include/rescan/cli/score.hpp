// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/cli/report.hpp>

#include <optional>
#include <string>
#include <vector>

namespace rescan::cli
{
inline constexpr std::string_view labels_format = "rescan-labels/1";

struct LabeledSpan
{
    std::string contract;
    std::string function;
    std::size_t start_line = 0;
    std::size_t end_line = 0;
};

struct LabelRecord
{
    std::string path;  ///< Relative to the manifest directory.
    std::string compiler_version;
    bool vulnerable = false;
    std::vector<LabeledSpan> positives;
    std::string note;
};

struct LabelManifest
{
    std::string directory;  ///< Base for relative record paths.
    std::vector<LabelRecord> records;
};

LabelManifest load_labels(const std::string& path);
LabelManifest labels_from_json(const nlohmann::json& j, std::string directory = {});

enum class Granularity
{
    contract,
    function,  ///< Default.
    line,
};

Granularity parse_granularity(std::string_view text);

struct ScoreOptions
{
    Granularity granularity = Granularity::function;
    /// Count every reported finding, not only confirmed or high-confidence ones.
    bool include_all = false;
};

struct ScoreCard
{
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    /// Absent when the denominator is zero.
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::vector<std::string> diagnostics;
};

/// Ratios from raw counts.
ScoreCard score_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn = 0);

ScoreCard score(const std::vector<Report>& reports, const LabelManifest& labels, const ScoreOptions& options = {});

nlohmann::json to_json(const ScoreCard& s);
/// Percentages to two decimals; absent ratios print as "n/a".
std::string render_text(const ScoreCard& s);

}  // namespace rescan::cli

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/cli/report.hpp>

#include <optional>

namespace rescan::cli
{
struct AnalyzeOptions
{
    /// Directory for Graphviz dumps of the I-CFG and I-PDG per source file.
    std::optional<std::string> emit_dot;
};

/// Two-stage analysis of each source file independently.
Report analyze(const std::vector<std::string>& paths, const AnalysisConfig& config, const AnalyzeOptions& options = {});

/// One source file; errors become the unit's error entry.
UnitReport analyze_unit(const std::string& path, const AnalysisConfig& config, const AnalyzeOptions& options = {});

/// 0 = ran clean, 1 = findings present, 2 = analysis error.
int exit_code(const Report& r);

}  // namespace rescan::cli

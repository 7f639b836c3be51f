// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/ast/solc.hpp>
#include <rescan/slicer/slicer.hpp>
#include <rescan/symexec/engine.hpp>

#include <chrono>
#include <stdexcept>
#include <string>

namespace rescan::cli
{
enum class Stages
{
    stage1,  ///< Slicing and ordering checks only.
    stage2,  ///< Symbolic verification of every reachable interaction, unpruned.
    both,
};

std::string_view to_string(Stages s) noexcept;
Stages parse_stages(std::string_view text);

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct AnalysisConfig
{
    /// Wall-clock limit per analyzed source file.
    std::chrono::seconds time_budget{300};
    ast::SolcOptions solc;
    slicer::Allowlist allowlist;
    symexec::Budget budgets;
    Stages stages = Stages::both;
    std::size_t workers = 1;

    /// Throws ConfigError on non-positive budgets.
    void validate() const;
    /// Settings that affect results; excludes paths and the cache location.
    [[nodiscard]] nlohmann::json to_json() const;
    /// Digest of `to_json`.
    [[nodiscard]] std::string fingerprint() const;
};

/// Reads a JSON configuration; absent keys keep their defaults.
AnalysisConfig config_from_json(const nlohmann::json& j, AnalysisConfig base = {});
AnalysisConfig load_config(const std::string& path, AnalysisConfig base = {});

}  // namespace rescan::cli

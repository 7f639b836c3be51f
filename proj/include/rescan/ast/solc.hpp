// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rescan::ast
{
struct SourceInput
{
    std::string path;  ///< Key used in the compiler input and in spans.
    std::string content;
};

struct SolcOptions
{
    /// Explicit compiler binary. Otherwise RESCAN_SOLC, then `solc`, then `solcjs` on PATH.
    std::optional<std::string> solc_path;
    /// Required compiler version prefix, e.g. "0.8.26" or "0.8".
    std::optional<std::string> version;
    bool want_bytecode = true;
    bool optimize = false;
    /// Directory for cached compiler outputs keyed by input digest.
    /// Falls back to RESCAN_SOLC_CACHE when unset.
    std::optional<std::string> cache_dir;
};

struct CompileOutput
{
    nlohmann::json output;
    std::string compiler_version;
    std::string compiler;
    std::vector<std::string> warnings;
};

class CompileError : public std::runtime_error
{
public:
    CompileError(const std::string& what, std::string diagnostics)
      : std::runtime_error{what}, diagnostics_{std::move(diagnostics)}
    {}
    [[nodiscard]] const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    std::string diagnostics_;
};

class UnsupportedAstError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Compiler binary per the resolution order, or empty if none is found.
std::string locate_solc(const SolcOptions& options);

/// Version string reported by `compiler --version`, e.g. "0.8.26+commit.8a97fa7a".
std::string solc_version(const std::string& compiler);

/// Standard-JSON input with sources embedded as content.
nlohmann::json make_standard_input(const std::vector<SourceInput>& sources, const SolcOptions& options);

/// Runs the compiler. Errors reported by the compiler raise CompileError
/// carrying the formatted messages.
CompileOutput run_solc(const std::vector<SourceInput>& sources, const SolcOptions& options);

}  // namespace rescan::ast

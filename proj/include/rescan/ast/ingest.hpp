// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/ast/model.hpp>
#include <rescan/ast/solc.hpp>

#include <json.hpp>

namespace rescan::ast
{
/// Reads .sol files; directories are searched recursively in sorted order.
/// Each path is kept as written; files found in a directory are joined onto it.
std::vector<SourceInput> read_sources(const std::vector<std::string>& paths);

/// Validates the AST schema. Compact ASTs are returned unchanged; the legacy
/// name/children AST raises UnsupportedAstError.
nlohmann::json normalize_ast(const nlohmann::json& ast);

/// Builds the statement-level model from compiler standard-JSON output.
/// Calls carry target hints only; run `resolve_calls` to bind them.
ContractModel load_model(const nlohmann::json& solc_output, const std::vector<SourceInput>& sources,
    const std::string& compiler_version = {});

/// Compiles and loads. Calls are not resolved.
ContractModel compile_and_load(const std::vector<SourceInput>& sources, const SolcOptions& options,
    std::vector<std::string>* warnings = nullptr);

struct CallEdge
{
    NodeId caller = 0;
    std::size_t call_index = 0;  ///< Position in the caller node's call list.
    std::optional<std::string> callee;  ///< Absent for external-unknown.
    CallKind kind = CallKind::internal;
    Taint address_taint = Taint::constant;

    friend auto operator<=>(const CallEdge&, const CallEdge&) = default;
};

using CallGraph = std::vector<CallEdge>;

/// Binds call hints to model functions and computes address taint. Hints that
/// name a missing or unimplemented function degrade to external-unknown.
CallGraph resolve_calls(ContractModel& model);

/// Versioned serialization ("rescan-model/1"); byte-stable for equal models.
nlohmann::json to_json(const ContractModel& model);

}  // namespace rescan::ast

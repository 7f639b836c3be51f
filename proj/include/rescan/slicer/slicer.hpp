// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/ipdg/graph.hpp>

#include <set>
#include <string>
#include <vector>

namespace rescan::slicer
{
using ast::NodeId;

enum class Rule
{
    eth_call_value,
    erc_token_call,
};

std::string_view to_string(Rule r) noexcept;

struct SliceCriterion
{
    NodeId entry_node = 0;
    std::size_t call_index = 0;  ///< Which call of the node is the interaction.
    Rule rule = Rule::eth_call_value;
    ast::Taint address_taint = ast::Taint::user_input;
    friend auto operator<=>(const SliceCriterion&, const SliceCriterion&) = default;
};

/// Calls that must never produce a criterion, matched against the declared
/// contract ("IERC20"), the member ("transfer") or both ("IERC20.transfer").
struct Allowlist
{
    std::set<std::string> entries;
    [[nodiscard]] bool allows(const ast::CallSite& c) const;
};

struct Slice
{
    SliceCriterion criterion;
    std::set<NodeId> nodes;
    std::set<ipdg::DepEdge> retained_call_deps;
};

enum class Confidence
{
    high,
    low,          ///< No state-reading check guards the interaction.
    gas_limited,  ///< send/transfer with the 2300-gas stipend.
};

std::string_view to_string(Confidence c) noexcept;

struct Warning
{
    std::string function;  ///< Function holding the interaction.
    std::vector<std::string> entry_functions;  ///< Public functions whose paths reach it.
    ast::SourceSpan span;  ///< Span of the interaction call.
    Rule rule = Rule::eth_call_value;
    SliceCriterion criterion;
    std::vector<NodeId> checks;  ///< Check nodes in the slice.
    NodeId interaction = 0;
    std::optional<NodeId> effect;  ///< First guard write after the interaction.
    std::set<ast::VarRef> guard_state;  ///< Whole-variable identities.
    std::set<ast::VarRef> stale_state;  ///< Guard vars some path leaves unwritten.
    Confidence confidence = Confidence::high;
    bool gas_limited = false;
};

std::vector<SliceCriterion> find_criteria(
    const ipdg::Ipdg& ipdg, const ast::ContractModel& model, const Allowlist& allow = {});

/// Backward closure of `from` over control, data and call dependencies.
std::set<NodeId> backward_closure(const ipdg::Ipdg& ipdg, const std::set<NodeId>& from);

Slice backward_slice(const ipdg::Ipdg& ipdg, const SliceCriterion& criterion);

/// Check/Effect/Interaction ordering of one slice. At most one warning.
/// Without `prune`, every interaction reachable from a public function is
/// reported whatever the ordering.
std::vector<Warning> check_cei(
    const Slice& slice, const ipdg::Icfg& icfg, const ipdg::Ipdg& ipdg, bool prune = true);

/// All Stage-I warnings of a model, in criterion order.
struct StageOne
{
    std::vector<SliceCriterion> criteria;
    std::vector<Slice> slices;
    std::vector<Warning> warnings;
};

StageOne run_stage_one(
    const ipdg::Icfg& icfg, const ipdg::Ipdg& ipdg, const Allowlist& allow = {}, bool prune = true);

}  // namespace rescan::slicer

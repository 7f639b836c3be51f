// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/ast/ingest.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace rescan::ipdg
{
using ast::NodeId;

enum class IcfgEdgeKind
{
    sequential,
    branch,
    call_entry,
    call_return,
};

std::string_view to_string(IcfgEdgeKind k) noexcept;

struct IcfgEdge
{
    NodeId from = 0;
    NodeId to = 0;
    IcfgEdgeKind kind = IcfgEdgeKind::sequential;
    friend auto operator<=>(const IcfgEdge&, const IcfgEdge&) = default;
};

/// Statement-level control flow across functions and contracts. Resolved calls
/// become jumps into the callee's entry and back from its exit; failing check
/// arms and explicit reverts end the path and carry no edge.
class Icfg
{
public:
    Icfg() = default;
    explicit Icfg(const ast::ContractModel& model) : model_{&model} {}

    void add_edge(const IcfgEdge& e);

    [[nodiscard]] const ast::ContractModel& model() const { return *model_; }
    [[nodiscard]] const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::set<IcfgEdge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::vector<std::string>& entry_points() const noexcept { return entries_; }
    [[nodiscard]] const std::vector<IcfgEdge>& out(NodeId n) const;
    [[nodiscard]] const std::vector<IcfgEdge>& in(NodeId n) const;
    /// Nodes reachable from `from` (inclusive), never stepping onto `blocked`.
    [[nodiscard]] std::set<NodeId> reachable(
        const std::set<NodeId>& from, const std::set<NodeId>& blocked = {}) const;
    /// Resolved callees of a call-site node, in evaluation order.
    [[nodiscard]] const std::vector<const ast::Function*>& callees(NodeId n) const;
    /// Like `reachable`, but only along interprocedurally valid paths: a callee
    /// exit returns to the call site that entered it. Paths start in the
    /// functions owning `from` with an empty call stack and end at their exits.
    /// Calls nested deeper than `max_depth` are stepped over.
    [[nodiscard]] std::set<NodeId> valid_reachable(const std::set<NodeId>& from,
        const std::set<NodeId>& blocked = {}, std::size_t max_depth = 8) const;
    /// Valid-path walk that avoids `blocked` and counts only nodes reached after
    /// passing one of `gates` (all nodes when `gates` is empty).
    [[nodiscard]] std::set<NodeId> valid_reachable_after(const std::set<NodeId>& from,
        const std::set<NodeId>& gates, const std::set<NodeId>& blocked, std::size_t max_depth = 8) const;

private:
    friend Icfg build_icfg(const ast::ContractModel&, const ast::CallGraph&);
    const ast::ContractModel* model_ = nullptr;
    std::vector<NodeId> nodes_;
    std::set<IcfgEdge> edges_;
    std::vector<std::string> entries_;
    std::map<NodeId, std::vector<const ast::Function*>> callees_;
    std::map<NodeId, std::vector<IcfgEdge>> out_;
    std::map<NodeId, std::vector<IcfgEdge>> in_;
};

Icfg build_icfg(const ast::ContractModel& model, const ast::CallGraph& calls);

enum class DepKind
{
    control,
    data,
    call,
};

std::string_view to_string(DepKind k) noexcept;

struct DepEdge
{
    NodeId from = 0;
    NodeId to = 0;
    DepKind kind = DepKind::control;
    friend auto operator<=>(const DepEdge&, const DepEdge&) = default;
};

class Ipdg
{
public:
    void add_node(NodeId n) { nodes_.insert(n); }
    void add_edge(const DepEdge& e);

    [[nodiscard]] const std::set<NodeId>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::set<DepEdge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::vector<DepEdge>& in(NodeId n) const;
    [[nodiscard]] std::set<DepEdge> edges_of(DepKind k) const;

private:
    std::set<NodeId> nodes_;
    std::set<DepEdge> edges_;
    std::map<NodeId, std::vector<DepEdge>> in_;
};

/// Control dependence of one function's statement graph (revert arms
/// included), by post-dominance frontiers with an entry->exit edge added.
std::set<DepEdge> control_dependence(const ast::ContractModel& model, const ast::Function& f);

/// Reaching definitions over the I-CFG: a->b when a writes a variable that b
/// may read and some path from a to b has no intervening must-alias write.
std::set<DepEdge> data_dependence(const Icfg& icfg);

Ipdg build_ipdg(const Icfg& icfg);

std::string to_dot(const Icfg& icfg);
std::string to_dot(const Ipdg& ipdg, const ast::ContractModel& model);

}  // namespace rescan::ipdg

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/slicer/slicer.hpp>

#include <deque>

namespace rescan::slicer
{
namespace
{
ast::VarRef whole(ast::VarRef v)
{
    v.key.reset();
    v.key_constant = false;
    return v;
}

/// State variables a check depends on: reads anywhere in its backward closure,
/// skipping constants and immutables, which no transaction can change.
std::set<ast::VarRef> guard_of(const ipdg::Ipdg& ipdg, const ast::ContractModel& model, NodeId check)
{
    std::set<ast::VarRef> out;
    for (const auto n : backward_closure(ipdg, {check}))
        for (const auto& v : model.node(n).reads)
        {
            if (v.scope != ast::VarScope::state)
                continue;
            const auto* sv = model.state_var(v.owner, v.decl_id);
            if (sv && (sv->constant || sv->immutable))
                continue;
            out.insert(whole(v));
        }
    return out;
}

std::set<NodeId> writers_of(const ast::ContractModel& model, const ast::VarRef& g)
{
    std::set<NodeId> out;
    for (const auto& n : model.nodes)
        for (const auto& w : n.writes)
            if (w.same_variable(g))
            {
                out.insert(n.id);
                break;
            }
    return out;
}
}  // namespace

std::string_view to_string(Rule r) noexcept
{
    return r == Rule::eth_call_value ? "eth-call-value" : "erc-token-call";
}

std::string_view to_string(Confidence c) noexcept
{
    switch (c)
    {
    case Confidence::high:
        return "high";
    case Confidence::low:
        return "low";
    case Confidence::gas_limited:
        return "gas-limited";
    }
    return "?";
}

bool Allowlist::allows(const ast::CallSite& c) const
{
    if (entries.empty())
        return false;
    if (entries.contains(c.member))
        return true;
    if (c.declared_contract.empty())
        return false;
    return entries.contains(c.declared_contract) || entries.contains(c.declared_contract + "." + c.member);
}

std::vector<SliceCriterion> find_criteria(
    const ipdg::Ipdg& ipdg, const ast::ContractModel& model, const Allowlist& allow)
{
    std::vector<SliceCriterion> out;
    for (const auto n : ipdg.nodes())
    {
        const auto& node = model.node(n);
        for (std::size_t i = 0; i < node.calls.size(); ++i)
        {
            const auto& c = node.calls[i];
            if (c.address_taint != ast::Taint::user_input || allow.allows(c))
                continue;
            if (c.eth_transfer)
                out.push_back({n, i, Rule::eth_call_value, c.address_taint});
            else if (c.kind == ast::CallKind::external_typed || c.kind == ast::CallKind::low_level)
                out.push_back({n, i, Rule::erc_token_call, c.address_taint});
        }
    }
    return out;
}

std::set<NodeId> backward_closure(const ipdg::Ipdg& ipdg, const std::set<NodeId>& from)
{
    std::set<NodeId> seen = from;
    std::deque<NodeId> work(from.begin(), from.end());
    while (!work.empty())
    {
        const auto n = work.front();
        work.pop_front();
        for (const auto& e : ipdg.in(n))
            if (seen.insert(e.from).second)
                work.push_back(e.from);
    }
    return seen;
}

Slice backward_slice(const ipdg::Ipdg& ipdg, const SliceCriterion& criterion)
{
    Slice s{criterion, backward_closure(ipdg, {criterion.entry_node}), {}};
    for (const auto& e : ipdg.edges())
        if (e.kind == ipdg::DepKind::call && s.nodes.contains(e.from) && s.nodes.contains(e.to))
            s.retained_call_deps.insert(e);
    return s;
}

std::vector<Warning> check_cei(const Slice& slice, const ipdg::Icfg& icfg, const ipdg::Ipdg& ipdg, bool prune)
{
    const auto& model = icfg.model();
    const auto target = slice.criterion.entry_node;
    const auto& node = model.node(target);
    const auto& call = node.calls.at(slice.criterion.call_index);

    Warning w;
    w.function = node.function;
    w.span = call.span;
    w.rule = slice.criterion.rule;
    w.criterion = slice.criterion;
    w.interaction = target;
    w.gas_limited = call.gas_limited;

    // Public entry points whose transactions can reach the interaction.
    std::set<NodeId> entries;
    for (const auto& id : icfg.entry_points())
    {
        const auto& f = *model.function(id);
        if (icfg.valid_reachable({f.entry}).contains(target))
        {
            entries.insert(f.entry);
            w.entry_functions.push_back(id);
        }
    }

    if (entries.empty())
        return {};

    // Check phase: guard variables per check in the slice.
    std::map<ast::VarRef, std::set<NodeId>> checks_of;
    for (const auto n : slice.nodes)
    {
        if (model.node(n).kind != ast::StatementKind::condition_check)
            continue;
        w.checks.push_back(n);
        for (const auto& g : guard_of(ipdg, model, n))
        {
            w.guard_state.insert(g);
            checks_of[g].insert(n);
        }
    }

    // Effect phase: a guard is stale when some valid path passes a check that
    // reads it and reaches the interaction without ever writing it.
    const auto reachable = icfg.valid_reachable(entries);
    bool any_written = false;
    for (const auto& [g, checks] : checks_of)
    {
        const auto writers = writers_of(model, g);
        if (std::none_of(writers.begin(), writers.end(), [&](NodeId n) { return reachable.contains(n); }))
            continue;
        any_written = true;
        if (!icfg.valid_reachable_after(entries, checks, writers).contains(target))
            continue;
        w.stale_state.insert(g);
        const auto after = icfg.reachable({target});
        for (const auto n : writers)
            if (n != target && after.contains(n) && (!w.effect || n < *w.effect))
                w.effect = n;
    }

    // Guards nobody can write cannot go stale; with no writable guard at all
    // the interaction is effectively unchecked.
    if (prune && any_written && w.stale_state.empty())
        return {};
    w.confidence = w.gas_limited ? Confidence::gas_limited :
                   w.guard_state.empty() ? Confidence::low : Confidence::high;
    return {w};
}

StageOne run_stage_one(const ipdg::Icfg& icfg, const ipdg::Ipdg& ipdg, const Allowlist& allow, bool prune)
{
    StageOne out;
    out.criteria = find_criteria(ipdg, icfg.model(), allow);
    for (const auto& c : out.criteria)
    {
        auto slice = backward_slice(ipdg, c);
        for (auto& w : check_cei(slice, icfg, ipdg, prune))
            out.warnings.push_back(std::move(w));
        out.slices.push_back(std::move(slice));
    }
    return out;
}

}  // namespace rescan::slicer

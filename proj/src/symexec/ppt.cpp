// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/symexec/engine.hpp>

namespace rescan::symexec
{
namespace
{
/// Library reentrancy guards recognized by base contract name.
const std::set<std::string> guard_bases{"ReentrancyGuard", "ReentrancyGuardUpgradeable", "ReentrancyGuardTransient"};
const std::set<std::string> guard_modifiers{"nonReentrant"};

bool touches(const ast::ContractModel& model, const ast::Function& f, const ast::VarRef& v)
{
    for (const auto id : f.nodes)
    {
        const auto& n = model.node(id);
        for (const auto* set : {&n.reads, &n.writes})
            for (const auto& r : *set)
                if (r.same_variable(v))
                    return true;
    }
    return false;
}

bool has_modifier(const ast::Function& f, const std::string& m)
{
    return std::find(f.modifiers.begin(), f.modifiers.end(), m) != f.modifiers.end();
}

/// Every public state-changing function of `contract` touching one of `vars`
/// carries modifier `m`.
bool all_touching_hold(const ast::ContractModel& model, const std::string& contract,
    const std::set<ast::VarRef>& vars, const std::string& m)
{
    const auto* c = model.contract(contract);
    if (!c)
        return false;
    for (const auto& id : c->functions)
    {
        const auto* f = model.function(id);
        if (!f || !f->implemented || !f->is_public() || !f->mutates() || f->kind == "constructor")
            continue;
        const bool uses = std::any_of(vars.begin(), vars.end(), [&](const auto& v) { return touches(model, *f, v); });
        if (uses && !has_modifier(*f, m))
            return false;
    }
    return true;
}

/// Whether `v` is written outside constructors.
bool written_after_deploy(const ast::ContractModel& model, const ast::VarRef& v)
{
    for (const auto& n : model.nodes)
    {
        const auto* f = model.function(n.function);
        if (f && f->kind == "constructor")
            continue;
        for (const auto& w : n.writes)
            if (w.same_variable(v))
                return true;
    }
    return false;
}

std::set<ast::VarRef> stale_or_guard(const slicer::Warning& w)
{
    return w.stale_state.empty() ? w.guard_state : w.stale_state;
}
}  // namespace

PptResult ppt_filter(const slicer::Warning& warning, const slicer::Slice& slice,
    const ast::ContractModel& model, const ipdg::Icfg& /*icfg*/)
{
    std::set<ast::NodeId> nodes = slice.nodes;
    nodes.insert(warning.checks.begin(), warning.checks.end());

    // Only the deployer-assigned account passes a sender check.
    for (const auto id : nodes)
    {
        const auto& n = model.node(id);
        if (n.sender_guard && !written_after_deploy(model, *n.sender_guard))
            return {PptDecision::drop, "permission-check"};
    }

    const auto vars = stale_or_guard(warning);
    const auto* holder = model.function(warning.function);
    if (!holder || vars.empty())
        return {};

    // Library guard on every function that can re-enter the state.
    const auto* c = model.contract(holder->contract);
    if (c)
    {
        const bool has_base = std::any_of(c->linearized_bases.begin(), c->linearized_bases.end(),
            [](const auto& b) { return guard_bases.contains(b); });
        if (has_base)
            for (const auto& m : guard_modifiers)
            {
                const bool entries_hold = std::all_of(warning.entry_functions.begin(),
                    warning.entry_functions.end(), [&](const auto& id) {
                        const auto* f = model.function(id);
                        return f && has_modifier(*f, m);
                    });
                const bool local = std::all_of(vars.begin(), vars.end(),
                    [&](const auto& v) { return v.owner == holder->contract; });
                if (entries_hold && local && all_touching_hold(model, holder->contract, vars, m))
                    return {PptDecision::drop, "builtin-guard"};
            }
    }

    // Storage lock: a modifier check on a state variable the same modifier writes.
    for (const auto id : nodes)
    {
        const auto& n = model.node(id);
        if (n.from_modifier.empty() || n.kind != ast::StatementKind::condition_check)
            continue;
        const auto* f = model.function(n.function);
        if (!f)
            continue;
        for (const auto& lock : n.reads)
        {
            if (lock.scope != ast::VarScope::state)
                continue;
            const bool sets_lock = std::any_of(f->nodes.begin(), f->nodes.end(), [&](ast::NodeId m) {
                const auto& w = model.node(m);
                return w.from_modifier == n.from_modifier &&
                       std::any_of(w.writes.begin(), w.writes.end(), [&](const auto& x) { return x.same_variable(lock); });
            });
            if (!sets_lock)
                continue;
            const bool same_owner = std::all_of(vars.begin(), vars.end(), [&](const auto& v) { return v.owner == lock.owner; });
            if (same_owner && all_touching_hold(model, lock.owner, vars, n.from_modifier))
                return {PptDecision::drop, "storage-mutex"};
        }
    }
    return {};
}

}  // namespace rescan::symexec

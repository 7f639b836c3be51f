// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include "dataflow_oracle.hpp"

#include <algorithm>
#include <deque>

namespace rescan::test
{
using ipdg::DepEdge;
using ipdg::DepKind;

namespace
{
/// Post-dominance by deletion: b post-dominates n when every path from n to
/// the exit meets b, i.e. the exit is unreachable from n once b is removed.
bool reaches_exit_without(const std::map<ast::NodeId, std::vector<ast::NodeId>>& succ, ast::NodeId from,
    ast::NodeId exit, std::optional<ast::NodeId> removed)
{
    if (removed && from == *removed)
        return false;
    std::set<ast::NodeId> seen{from};
    for (std::deque<ast::NodeId> work{from}; !work.empty(); work.pop_front())
    {
        if (work.front() == exit)
            return true;
        if (const auto it = succ.find(work.front()); it != succ.end())
            for (const auto s : it->second)
                if ((!removed || s != *removed) && seen.insert(s).second)
                    work.push_back(s);
    }
    return false;
}

bool must(const ast::VarRef& a, const ast::VarRef& b)
{
    return ast::must_alias(a, b);
}
}  // namespace

std::set<DepEdge> control_oracle(const ast::ContractModel& m, const ast::Function& f)
{
    std::map<ast::NodeId, std::vector<ast::NodeId>> succ;
    for (const auto id : f.nodes)
        for (const auto& s : m.node(id).successors)
            succ[id].push_back(s.to);
    // Augmented graph: entry may fall straight to exit.
    succ[f.entry].push_back(f.exit);

    std::vector<ast::NodeId> live;
    for (const auto id : f.nodes)
        if (reaches_exit_without(succ, id, f.exit, std::nullopt))
            live.push_back(id);
    const auto pdom = [&](ast::NodeId b, ast::NodeId n) {
        return b == n || !reaches_exit_without(succ, n, f.exit, b);
    };
    std::set<DepEdge> out;
    for (const auto a : live)
        for (const auto s : succ[a])
        {
            if (!reaches_exit_without(succ, s, f.exit, std::nullopt))
                continue;
            for (const auto b : live)
                if (pdom(b, s) && (b == a || !pdom(b, a)))
                    out.insert({a, b, DepKind::control});
        }
    return out;
}

/// Reaching definitions by one forward search per definition over the I-CFG:
/// a read at n depends on the write at d when some path d -> n avoids every
/// intermediate write that certainly overwrites the same storage.
std::set<DepEdge> data_oracle(const ipdg::Icfg& icfg)
{
    const auto& m = icfg.model();
    std::set<DepEdge> out;
    for (const auto d : icfg.nodes())
        for (const auto& w : m.node(d).writes)
        {
            std::set<ast::NodeId> seen;
            std::deque<ast::NodeId> work;
            for (const auto& e : icfg.out(d))
                if (seen.insert(e.to).second)
                    work.push_back(e.to);
            for (; !work.empty(); work.pop_front())
            {
                const auto n = work.front();
                const auto& node = m.node(n);
                for (const auto& r : node.reads)
                    if (ast::may_alias(w, r))
                        out.insert({d, n, DepKind::data});
                if (std::any_of(node.writes.begin(), node.writes.end(), [&](const auto& x) { return must(x, w); }))
                    continue;
                for (const auto& e : icfg.out(n))
                    if (seen.insert(e.to).second)
                        work.push_back(e.to);
            }
        }
    return out;
}

std::size_t statement_count(const ast::ContractModel& m)
{
    return static_cast<std::size_t>(
        std::count_if(m.nodes.begin(), m.nodes.end(), [](const auto& n) { return !n.synthetic(); }));
}

}  // namespace rescan::test

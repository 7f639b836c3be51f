// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/ipdg/graph.hpp>

#include <algorithm>
#include <deque>

namespace rescan::ipdg
{
namespace
{
const std::vector<IcfgEdge> no_icfg_edges;
const std::vector<const ast::Function*> no_callees;

struct Frame
{
    NodeId site = 0;
    std::size_t next = 0;  ///< Index of the callee to enter after this one returns.
    friend auto operator<=>(const Frame&, const Frame&) = default;
};

using Stack = std::vector<Frame>;

struct WalkState
{
    NodeId node = 0;
    Stack stack;
    bool past_gate = false;
    friend auto operator<=>(const WalkState&, const WalkState&) = default;
};
}

std::string_view to_string(IcfgEdgeKind k) noexcept
{
    switch (k)
    {
    case IcfgEdgeKind::sequential:
        return "sequential";
    case IcfgEdgeKind::branch:
        return "branch";
    case IcfgEdgeKind::call_entry:
        return "call-entry";
    case IcfgEdgeKind::call_return:
        return "call-return";
    }
    return "?";
}

void Icfg::add_edge(const IcfgEdge& e)
{
    if (!edges_.insert(e).second)
        return;
    out_[e.from].push_back(e);
    in_[e.to].push_back(e);
}

const std::vector<IcfgEdge>& Icfg::out(NodeId n) const
{
    const auto it = out_.find(n);
    return it == out_.end() ? no_icfg_edges : it->second;
}

const std::vector<IcfgEdge>& Icfg::in(NodeId n) const
{
    const auto it = in_.find(n);
    return it == in_.end() ? no_icfg_edges : it->second;
}

std::set<NodeId> Icfg::reachable(const std::set<NodeId>& from, const std::set<NodeId>& blocked) const
{
    std::set<NodeId> seen;
    std::deque<NodeId> work;
    for (const auto n : from)
        if (!blocked.contains(n) && seen.insert(n).second)
            work.push_back(n);
    while (!work.empty())
    {
        const auto n = work.front();
        work.pop_front();
        for (const auto& e : out(n))
            if (!blocked.contains(e.to) && seen.insert(e.to).second)
                work.push_back(e.to);
    }
    return seen;
}

const std::vector<const ast::Function*>& Icfg::callees(NodeId n) const
{
    const auto it = callees_.find(n);
    return it == callees_.end() ? no_callees : it->second;
}

std::set<NodeId> Icfg::valid_reachable(
    const std::set<NodeId>& from, const std::set<NodeId>& blocked, std::size_t max_depth) const
{
    return valid_reachable_after(from, {}, blocked, max_depth);
}

std::set<NodeId> Icfg::valid_reachable_after(const std::set<NodeId>& from, const std::set<NodeId>& gates,
    const std::set<NodeId>& blocked, std::size_t max_depth) const
{
    const auto& m = model();
    std::set<WalkState> seen;
    std::set<NodeId> out;
    std::deque<WalkState> work;
    const auto visit = [&](NodeId n, const Stack& st, bool past) {
        if (blocked.contains(n))
            return;
        past = past || gates.contains(n);
        WalkState s{n, st, past};
        if (!seen.insert(s).second)
            return;
        if (past)
            out.insert(n);
        work.push_back(std::move(s));
    };
    // Intra-function successors of a node once its calls have completed.
    const auto step_over = [&](NodeId n, const Stack& st, bool past) {
        for (const auto& s : m.node(n).successors)
            if (s.kind != ast::FlowKind::revert)
                visit(s.to, st, past);
    };
    for (const auto n : from)
        visit(n, {}, gates.empty());
    while (!work.empty())
    {
        auto [n, st, past] = work.front();
        work.pop_front();
        if (m.node(n).kind == ast::StatementKind::exit)
        {
            if (st.empty())
                continue;
            const auto frame = st.back();
            st.pop_back();
            const auto& list = callees(frame.site);
            if (frame.next < list.size())
            {
                st.push_back({frame.site, frame.next + 1});
                visit(list[frame.next]->entry, st, past);
            }
            else
            {
                step_over(frame.site, st, past);
            }
            continue;
        }
        const auto& list = callees(n);
        if (list.empty() || st.size() >= max_depth)
        {
            step_over(n, st, past);
            continue;
        }
        st.push_back({n, 1});
        visit(list.front()->entry, st, past);
    }
    return out;
}

Icfg build_icfg(const ast::ContractModel& model, const ast::CallGraph& calls)
{
    Icfg g{model};
    for (const auto& n : model.nodes)
        g.nodes_.push_back(n.id);
    for (const auto& id : model.function_ids())
        if (const auto* f = model.function(id); f && f->implemented && f->is_public() && f->kind != "constructor")
            g.entries_.push_back(id);

    // Resolved callees per call site, in evaluation order.
    std::map<NodeId, std::vector<std::pair<std::size_t, const ast::Function*>>> callees;
    for (const auto& c : calls)
        if (c.callee)
            if (const auto* f = model.function(*c.callee); f && f->implemented)
                callees[c.caller].emplace_back(c.call_index, f);

    for (const auto& n : model.nodes)
    {
        std::vector<std::pair<NodeId, IcfgEdgeKind>> succ;
        for (const auto& s : n.successors)
        {
            if (s.kind == ast::FlowKind::revert)
                continue;
            succ.emplace_back(s.to, s.kind == ast::FlowKind::sequential ? IcfgEdgeKind::sequential :
                                                                          IcfgEdgeKind::branch);
        }
        auto it = callees.find(n.id);
        if (it == callees.end())
        {
            for (const auto& [to, kind] : succ)
                g.add_edge({n.id, to, kind});
            continue;
        }
        auto& list = it->second;
        std::sort(list.begin(), list.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [idx, f] : list)
            g.callees_[n.id].push_back(f);
        NodeId from = n.id;
        for (const auto& [idx, f] : list)
        {
            g.add_edge({from, f->entry, IcfgEdgeKind::call_entry});
            from = f->exit;
        }
        for (const auto& [to, kind] : succ)
            g.add_edge({from, to, IcfgEdgeKind::call_return});
    }
    return g;
}

}  // namespace rescan::ipdg

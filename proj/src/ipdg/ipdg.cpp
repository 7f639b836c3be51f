// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/ipdg/graph.hpp>

#include <algorithm>
#include <deque>
#include <sstream>

namespace rescan::ipdg
{
namespace
{
const std::vector<DepEdge> no_dep_edges;

using Def = std::pair<NodeId, ast::VarRef>;

bool kills(const ast::StatementNode& n, const ast::VarRef& v)
{
    return std::any_of(n.writes.begin(), n.writes.end(),
        [&](const ast::VarRef& w) { return ast::must_alias(w, v); });
}

std::string escape(const std::string& s)
{
    std::string out;
    for (const char c : s)
    {
        if (c == '"' || c == '\\')
            out += '\\';
        if (c == '\n')
        {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out;
}

std::string label(const ast::StatementNode& n)
{
    std::ostringstream os;
    os << n.id << " L" << n.span.line << " " << ast::to_string(n.kind);
    if (!n.text.empty())
        os << ": " << n.text.substr(0, 60);
    return escape(os.str());
}
}  // namespace

std::string_view to_string(DepKind k) noexcept
{
    switch (k)
    {
    case DepKind::control:
        return "control";
    case DepKind::data:
        return "data";
    case DepKind::call:
        return "call";
    }
    return "?";
}

void Ipdg::add_edge(const DepEdge& e)
{
    nodes_.insert(e.from);
    nodes_.insert(e.to);
    if (edges_.insert(e).second)
        in_[e.to].push_back(e);
}

const std::vector<DepEdge>& Ipdg::in(NodeId n) const
{
    const auto it = in_.find(n);
    return it == in_.end() ? no_dep_edges : it->second;
}

std::set<DepEdge> Ipdg::edges_of(DepKind k) const
{
    std::set<DepEdge> out;
    for (const auto& e : edges_)
        if (e.kind == k)
            out.insert(e);
    return out;
}

std::set<DepEdge> control_dependence(const ast::ContractModel& model, const ast::Function& f)
{
    std::map<NodeId, std::vector<NodeId>> succ;
    std::map<NodeId, std::vector<NodeId>> pred;
    for (const auto id : f.nodes)
        for (const auto& s : model.node(id).successors)
        {
            succ[id].push_back(s.to);
            pred[s.to].push_back(id);
        }
    succ[f.entry].push_back(f.exit);
    pred[f.exit].push_back(f.entry);

    // Only nodes that reach the exit take part in post-dominance.
    std::set<NodeId> live{f.exit};
    for (std::deque<NodeId> work{f.exit}; !work.empty(); work.pop_front())
        for (const auto p : pred[work.front()])
            if (live.insert(p).second)
                work.push_back(p);

    std::map<NodeId, std::set<NodeId>> pdom;
    for (const auto n : live)
        pdom[n] = n == f.exit ? std::set<NodeId>{n} : live;
    for (bool changed = true; changed;)
    {
        changed = false;
        for (const auto n : live)
        {
            if (n == f.exit)
                continue;
            std::optional<std::set<NodeId>> meet;
            for (const auto s : succ[n])
            {
                if (!live.contains(s))
                    continue;
                if (!meet)
                {
                    meet = pdom[s];
                    continue;
                }
                std::set<NodeId> both;
                std::set_intersection(meet->begin(), meet->end(), pdom[s].begin(), pdom[s].end(),
                    std::inserter(both, both.end()));
                meet = std::move(both);
            }
            auto next = meet.value_or(std::set<NodeId>{});
            next.insert(n);
            if (next != pdom[n])
            {
                pdom[n] = std::move(next);
                changed = true;
            }
        }
    }

    std::set<DepEdge> out;
    for (const auto a : live)
        for (const auto s : succ[a])
        {
            if (!live.contains(s))
                continue;
            for (const auto b : pdom[s])
                if (b == a || !pdom[a].contains(b))
                    out.insert({a, b, DepKind::control});
        }
    return out;
}

std::set<DepEdge> data_dependence(const Icfg& icfg)
{
    const auto& model = icfg.model();
    std::map<NodeId, std::set<Def>> in;
    std::map<NodeId, std::set<Def>> out;
    std::deque<NodeId> work(icfg.nodes().begin(), icfg.nodes().end());
    std::set<NodeId> queued(work.begin(), work.end());
    while (!work.empty())
    {
        const auto n = work.front();
        work.pop_front();
        queued.erase(n);
        std::set<Def> reach;
        for (const auto& e : icfg.in(n))
        {
            const auto& o = out[e.from];
            reach.insert(o.begin(), o.end());
        }
        in[n] = reach;
        const auto& node = model.node(n);
        std::set<Def> next;
        for (const auto& d : reach)
            if (!kills(node, d.second))
                next.insert(d);
        for (const auto& w : node.writes)
            next.emplace(n, w);
        if (next == out[n])
            continue;
        out[n] = std::move(next);
        for (const auto& e : icfg.out(n))
            if (queued.insert(e.to).second)
                work.push_back(e.to);
    }

    std::set<DepEdge> edges;
    for (const auto n : icfg.nodes())
    {
        const auto& node = model.node(n);
        for (const auto& [from, v] : in[n])
            if (std::any_of(node.reads.begin(), node.reads.end(),
                    [&](const ast::VarRef& r) { return ast::may_alias(v, r); }))
                edges.insert({from, n, DepKind::data});
    }
    return edges;
}

Ipdg build_ipdg(const Icfg& icfg)
{
    const auto& model = icfg.model();
    Ipdg g;
    for (const auto n : icfg.nodes())
        g.add_node(n);
    for (const auto& [id, f] : model.functions)
        if (f.implemented)
            for (const auto& e : control_dependence(model, f))
                g.add_edge(e);
    for (const auto& e : data_dependence(icfg))
        g.add_edge(e);
    for (const auto& n : model.nodes)
        for (const auto& c : n.calls)
        {
            if (!c.callee)
                continue;
            const auto* f = model.function(*c.callee);
            if (!f || !f->implemented)
                continue;
            g.add_edge({n.id, f->entry, DepKind::call});
            g.add_edge({f->exit, n.id, DepKind::call});
            for (const auto r : f->nodes)
                if (model.node(r).kind == ast::StatementKind::return_)
                    g.add_edge({r, n.id, DepKind::call});
        }
    return g;
}

std::string to_dot(const Icfg& icfg)
{
    const auto& model = icfg.model();
    std::ostringstream os;
    os << "digraph icfg {\n  node [shape=box];\n";
    for (const auto n : icfg.nodes())
        os << "  n" << n << " [label=\"" << label(model.node(n)) << "\"];\n";
    for (const auto& e : icfg.edges())
    {
        os << "  n" << e.from << " -> n" << e.to;
        if (e.kind == IcfgEdgeKind::call_entry || e.kind == IcfgEdgeKind::call_return)
            os << " [style=dashed,label=\"" << to_string(e.kind) << "\"]";
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

std::string to_dot(const Ipdg& ipdg, const ast::ContractModel& model)
{
    std::ostringstream os;
    os << "digraph ipdg {\n  node [shape=box];\n";
    for (const auto n : ipdg.nodes())
        os << "  n" << n << " [label=\"" << label(model.node(n)) << "\"];\n";
    for (const auto& e : ipdg.edges())
    {
        os << "  n" << e.from << " -> n" << e.to;
        switch (e.kind)
        {
        case DepKind::control:
            break;
        case DepKind::data:
            os << " [color=darkgreen,style=dashed]";
            break;
        case DepKind::call:
            os << " [color=blue,style=dotted]";
            break;
        }
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace rescan::ipdg

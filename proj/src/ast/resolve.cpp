// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/ast/ingest.hpp>

namespace rescan::ast
{
namespace
{
VarRef whole(VarRef v)
{
    v.key.reset();
    v.key_constant = false;
    return v;
}

class TaintSolver
{
public:
    explicit TaintSolver(const ContractModel& m) : m_{m}
    {
        for (const auto& n : m.nodes)
            for (const auto& c : n.calls)
                if (c.callee)
                    callers_[*c.callee].push_back(&c);
    }

    void solve()
    {
        for (bool changed = true; changed;)
        {
            changed = false;
            for (const auto& [id, f] : m_.functions)
            {
                for (const auto& p : f.params)
                {
                    const VarRef v{VarScope::param, id, p.decl_id, p.name, {}, false};
                    changed |= raise(v, param_taint(f, p.decl_id));
                }
                for (const auto& [v, srcs] : f.local_sources)
                    changed |= raise(whole(v), eval(srcs));
            }
        }
    }

    Taint eval(const std::vector<TaintSource>& srcs) const
    {
        if (srcs.empty())
            return Taint::user_input;
        Taint t = Taint::constant;
        for (const auto& s : srcs)
            t = std::max(t, eval(s));
        return t;
    }

private:
    Taint eval(const TaintSource& s) const
    {
        switch (s.kind)
        {
        case TaintSource::Kind::user:
        case TaintSource::Kind::call:
            return Taint::user_input;
        case TaintSource::Kind::constant:
            return Taint::constant;
        case TaintSource::Kind::variable:
            break;
        }
        if (s.var.scope == VarScope::state)
            return Taint::state_variable;
        const auto it = taint_.find(whole(s.var));
        return it == taint_.end() ? Taint::constant : it->second;
    }

    Taint param_taint(const Function& f, int64_t decl) const
    {
        if (f.is_public())
            return Taint::user_input;
        const auto it = callers_.find(f.id);
        if (it == callers_.end())
            return Taint::user_input;
        std::size_t pos = 0;
        while (pos < f.params.size() && f.params[pos].decl_id != decl)
            ++pos;
        Taint t = Taint::constant;
        for (const auto* c : it->second)
            t = std::max(t, pos < c->arg_sources.size() ? eval(c->arg_sources[pos]) : Taint::user_input);
        return t;
    }

    bool raise(const VarRef& v, Taint t)
    {
        auto [it, inserted] = taint_.emplace(v, t);
        if (inserted)
            return true;
        if (t <= it->second)
            return false;
        it->second = t;
        return true;
    }

    const ContractModel& m_;
    std::map<std::string, std::vector<const CallSite*>> callers_;
    std::map<VarRef, Taint> taint_;
};
}  // namespace

CallGraph resolve_calls(ContractModel& model)
{
    for (auto& n : model.nodes)
        for (auto& c : n.calls)
        {
            c.callee.reset();
            const auto* f = c.target_hint.empty() ? nullptr : model.function(c.target_hint);
            if (!f || !f->implemented)
                continue;
            if (c.kind == CallKind::external_typed)
            {
                const auto* target = model.contract(f->contract);
                if (!target || !target->deployable() || !f->is_public())
                    continue;
            }
            else if (c.kind != CallKind::internal)
            {
                continue;
            }
            c.callee = c.target_hint;
        }

    TaintSolver solver{model};
    solver.solve();

    CallGraph graph;
    for (auto& n : model.nodes)
        for (std::size_t i = 0; i < n.calls.size(); ++i)
        {
            auto& c = n.calls[i];
            c.address_taint = c.kind == CallKind::internal ? Taint::constant : solver.eval(c.address_sources);
            graph.push_back({n.id, i, c.callee, c.kind, c.address_taint});
        }
    return graph;
}

}  // namespace rescan::ast

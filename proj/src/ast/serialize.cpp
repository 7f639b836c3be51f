// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/ast/ingest.hpp>

namespace rescan::ast
{
namespace
{
using json = nlohmann::json;

json span_json(const SourceSpan& s)
{
    return {{"file", s.file}, {"start", s.start}, {"length", s.length}, {"line", s.line},
        {"column", s.column}, {"end_line", s.end_line}};
}

json var_json(const VarRef& v)
{
    json j{{"scope", v.scope == VarScope::state ? "state" : v.scope == VarScope::param ? "param" : "local"},
        {"owner", v.owner}, {"decl", v.decl_id}, {"name", v.name}};
    if (v.key)
    {
        j["key"] = *v.key;
        j["key_constant"] = v.key_constant;
    }
    return j;
}

json call_json(const CallSite& c)
{
    json j{{"kind", to_string(c.kind)}, {"member", c.member}, {"span", span_json(c.span)},
        {"args", c.args}, {"eth_transfer", c.eth_transfer}, {"gas_limited", c.gas_limited}};
    j["callee"] = c.callee ? json(*c.callee) : json("external-unknown");
    if (!c.target_hint.empty())
        j["target_hint"] = c.target_hint;
    if (c.kind != CallKind::internal)
    {
        j["address"] = c.address_expr;
        j["address_taint"] = to_string(c.address_taint);
    }
    if (!c.declared_contract.empty())
        j["declared_contract"] = c.declared_contract;
    if (!c.value_expr.empty())
        j["value"] = c.value_expr;
    return j;
}
}  // namespace

nlohmann::json to_json(const ContractModel& model)
{
    json j;
    j["format"] = "rescan-model/1";
    j["compiler_version"] = model.compiler_version;
    j["sources"] = json::array();
    for (const auto& s : model.sources)
        j["sources"].push_back({{"path", s.path}, {"index", s.index}});
    j["contracts"] = json::array();
    for (const auto& c : model.contracts)
    {
        json cj{{"name", c.name}, {"kind", c.kind}, {"abstract", c.is_abstract}, {"file", c.file},
            {"bases", c.linearized_bases}, {"functions", c.functions}, {"modifiers", c.modifiers},
            {"deployable", c.deployable()}, {"has_bytecode", !c.runtime_bytecode.empty()}};
        cj["state_vars"] = json::array();
        for (const auto& v : c.state_vars)
            cj["state_vars"].push_back({{"decl", v.decl_id}, {"name", v.name}, {"type", v.type},
                {"declared_in", v.declaring_contract}, {"constant", v.constant},
                {"immutable", v.immutable}});
        j["contracts"].push_back(std::move(cj));
    }
    j["functions"] = json::array();
    for (const auto& [id, f] : model.functions)
    {
        json fj{{"id", id}, {"contract", f.contract}, {"declared_in", f.declaring_contract},
            {"name", f.name}, {"kind", f.kind}, {"visibility", f.visibility},
            {"mutability", f.mutability}, {"modifiers", f.modifiers}, {"implemented", f.implemented},
            {"span", span_json(f.span)}, {"entry", f.entry}, {"exit", f.exit}, {"nodes", f.nodes}};
        if (f.selector)
            fj["selector"] = *f.selector;
        fj["params"] = json::array();
        for (const auto& p : f.params)
            fj["params"].push_back({{"name", p.name}, {"type", p.type}});
        j["functions"].push_back(std::move(fj));
    }
    j["nodes"] = json::array();
    for (const auto& n : model.nodes)
    {
        json nj{{"id", n.id}, {"function", n.function}, {"kind", to_string(n.kind)},
            {"span", span_json(n.span)}, {"text", n.text}};
        nj["reads"] = json::array();
        for (const auto& v : n.reads)
            nj["reads"].push_back(var_json(v));
        nj["writes"] = json::array();
        for (const auto& v : n.writes)
            nj["writes"].push_back(var_json(v));
        nj["calls"] = json::array();
        for (const auto& c : n.calls)
            nj["calls"].push_back(call_json(c));
        nj["successors"] = json::array();
        for (const auto& s : n.successors)
            nj["successors"].push_back({{"to", s.to}, {"kind", to_string(s.kind)}});
        if (!n.from_modifier.empty())
            nj["modifier"] = n.from_modifier;
        if (n.reverts)
            nj["reverts"] = true;
        if (n.opaque)
            nj["opaque"] = true;
        if (n.sender_guard)
            nj["sender_guard"] = var_json(*n.sender_guard);
        j["nodes"].push_back(std::move(nj));
    }
    return j;
}

}  // namespace rescan::ast

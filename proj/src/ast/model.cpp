// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/ast/model.hpp>

namespace rescan::ast
{
bool may_alias(const VarRef& a, const VarRef& b) noexcept
{
    if (!a.same_variable(b))
        return false;
    if (!a.key || !b.key)
        return true;
    if (*a.key == *b.key)
        return true;
    return !a.key_constant || !b.key_constant;
}

bool must_alias(const VarRef& a, const VarRef& b) noexcept
{
    if (!a.same_variable(b))
        return false;
    if (!a.key && !b.key)
        return true;
    return a.key && b.key && *a.key == *b.key && a.key_constant && b.key_constant;
}

std::string_view to_string(Taint t) noexcept
{
    switch (t)
    {
    case Taint::constant:
        return "constant";
    case Taint::state_variable:
        return "state-variable";
    case Taint::user_input:
        return "user-input";
    }
    return "?";
}

std::string_view to_string(CallKind k) noexcept
{
    switch (k)
    {
    case CallKind::internal:
        return "internal";
    case CallKind::external_typed:
        return "external-typed";
    case CallKind::low_level:
        return "call";
    case CallKind::delegatecall:
        return "delegatecall";
    case CallKind::staticcall:
        return "staticcall";
    case CallKind::send:
        return "send";
    case CallKind::transfer:
        return "transfer";
    }
    return "?";
}

std::string_view to_string(StatementKind k) noexcept
{
    switch (k)
    {
    case StatementKind::condition_check:
        return "condition-check";
    case StatementKind::external_call:
        return "external-call";
    case StatementKind::internal_call:
        return "internal-call";
    case StatementKind::state_write:
        return "state-write";
    case StatementKind::assignment:
        return "assignment";
    case StatementKind::state_read:
        return "state-read";
    case StatementKind::return_:
        return "return";
    case StatementKind::loop_header:
        return "loop-header";
    case StatementKind::other:
        return "other";
    case StatementKind::entry:
        return "entry";
    case StatementKind::exit:
        return "exit";
    }
    return "?";
}

std::string_view to_string(FlowKind k) noexcept
{
    switch (k)
    {
    case FlowKind::sequential:
        return "seq";
    case FlowKind::branch_true:
        return "true";
    case FlowKind::branch_false:
        return "false";
    case FlowKind::revert:
        return "revert";
    }
    return "?";
}

const Contract* ContractModel::contract(std::string_view name) const
{
    for (const auto& c : contracts)
        if (c.name == name)
            return &c;
    return nullptr;
}

const Function* ContractModel::function(std::string_view id) const
{
    const auto it = functions.find(std::string{id});
    return it == functions.end() ? nullptr : &it->second;
}

const StateVar* ContractModel::state_var(std::string_view contract_name, int64_t decl_id) const
{
    if (const auto* c = contract(contract_name))
        for (const auto& v : c->state_vars)
            if (v.decl_id == decl_id)
                return &v;
    return nullptr;
}

std::vector<std::string> ContractModel::function_ids() const
{
    std::vector<std::string> out;
    for (const auto& c : contracts)
        out.insert(out.end(), c.functions.begin(), c.functions.end());
    // Instances reached only through super or explicit base calls.
    for (const auto& [id, f] : functions)
        if (std::find(out.begin(), out.end(), id) == out.end())
            out.push_back(id);
    return out;
}

}  // namespace rescan::ast

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rescan::ast
{
struct SourceSpan
{
    std::string file;
    std::size_t start = 0;   ///< Byte offset.
    std::size_t length = 0;
    std::size_t line = 0;    ///< 1-based.
    std::size_t column = 0;  ///< 1-based, in bytes.
    std::size_t end_line = 0;

    [[nodiscard]] bool overlaps(const SourceSpan& o) const noexcept
    {
        return file == o.file && start < o.start + std::max<std::size_t>(o.length, 1) &&
               o.start < start + std::max<std::size_t>(length, 1);
    }
    [[nodiscard]] bool contains(const SourceSpan& o) const noexcept
    {
        return file == o.file && start <= o.start && o.start + o.length <= start + length;
    }
    friend auto operator<=>(const SourceSpan&, const SourceSpan&) = default;
};

enum class VarScope
{
    state,
    local,
    param,
};

/// Identity of a variable access. State variables belong to the contract
/// instance executing the code; locals and parameters to one function.
/// Indexed accesses keep the rendered key path, e.g. `balances[msg.sender]`
/// has key "msg.sender".
struct VarRef
{
    VarScope scope = VarScope::local;
    std::string owner;
    int64_t decl_id = 0;
    std::string name;
    std::optional<std::string> key;
    bool key_constant = false;

    [[nodiscard]] bool same_variable(const VarRef& o) const noexcept
    {
        return scope == o.scope && owner == o.owner && decl_id == o.decl_id;
    }
    [[nodiscard]] std::string to_string() const
    {
        return key ? name + "[" + *key + "]" : name;
    }
    friend auto operator<=>(const VarRef&, const VarRef&) = default;
};

/// Accesses that may touch the same storage: same variable, and either one
/// covers the whole variable, the keys are equal, or a key is non-constant.
bool may_alias(const VarRef& a, const VarRef& b) noexcept;

/// Accesses that certainly touch the same storage, so a write to `a` kills
/// earlier definitions of `b`.
bool must_alias(const VarRef& a, const VarRef& b) noexcept;

/// Address provenance, ordered so that join is max.
enum class Taint
{
    constant,
    state_variable,
    user_input,
};

std::string_view to_string(Taint t) noexcept;

enum class CallKind
{
    internal,        ///< Jump within the executing contract (incl. this.f()).
    external_typed,  ///< Message call through a contract-typed expression.
    low_level,       ///< address.call
    delegatecall,
    staticcall,
    send,
    transfer,
};

std::string_view to_string(CallKind k) noexcept;

/// Where an address expression's value may come from.
struct TaintSource
{
    enum class Kind
    {
        user,      ///< msg.sender, tx.origin
        constant,  ///< literals, this, constants, immutables
        variable,  ///< see `var`
        call,      ///< return value of a call
    };
    Kind kind = Kind::constant;
    VarRef var;

    friend auto operator<=>(const TaintSource&, const TaintSource&) = default;
};

struct CallSite
{
    CallKind kind = CallKind::internal;
    std::string member;  ///< Called function or member name.
    /// Function id the call would bind to if it exists in the model; set at load.
    std::string target_hint;
    /// Resolved model function, set by resolve_calls; absent means external-unknown.
    std::optional<std::string> callee;
    /// Contract type the address expression is declared as, if any.
    std::string declared_contract;
    std::string address_expr;
    std::vector<TaintSource> address_sources;
    Taint address_taint = Taint::user_input;
    std::vector<VarRef> address_reads;
    bool eth_transfer = false;  ///< Carries a value option, or send/transfer.
    bool gas_limited = false;   ///< send/transfer: 2300-gas stipend.
    std::string value_expr;
    std::vector<std::string> args;
    /// Argument sources per position, for internal-parameter taint.
    std::vector<std::vector<TaintSource>> arg_sources;
    SourceSpan span;
    int64_t ast_id = 0;
    /// Referenced declaration of the called function as written.
    int64_t referenced_decl = 0;

    [[nodiscard]] bool is_message_call() const noexcept { return kind != CallKind::internal; }
    [[nodiscard]] bool resolved() const noexcept { return callee.has_value(); }
};

enum class StatementKind
{
    condition_check,
    external_call,
    internal_call,
    state_write,
    assignment,
    state_read,
    return_,
    loop_header,
    other,
    entry,
    exit,
};

std::string_view to_string(StatementKind k) noexcept;

using NodeId = std::size_t;

enum class FlowKind
{
    sequential,
    branch_true,
    branch_false,
    revert,  ///< Failing arm of a check or an explicit revert; leaves via EXIT.
};

std::string_view to_string(FlowKind k) noexcept;

struct Flow
{
    NodeId to = 0;
    FlowKind kind = FlowKind::sequential;
    friend auto operator<=>(const Flow&, const Flow&) = default;
};

struct StatementNode
{
    NodeId id = 0;
    std::string function;
    StatementKind kind = StatementKind::other;
    std::set<VarRef> reads;
    std::set<VarRef> writes;
    std::vector<CallSite> calls;
    SourceSpan span;
    std::string text;
    int64_t ast_id = 0;
    /// Modifier the statement was inlined from, empty for the function body.
    std::string from_modifier;
    bool is_branch = false;
    bool reverts = false;        ///< Unconditionally reverts.
    bool opaque = false;         ///< Inline assembly.
    /// For checks of the form `msg.sender == v` with `v` a state variable.
    std::optional<VarRef> sender_guard;
    std::vector<Flow> successors;

    [[nodiscard]] bool synthetic() const noexcept
    {
        return kind == StatementKind::entry || kind == StatementKind::exit;
    }
};

struct Param
{
    int64_t decl_id = 0;
    std::string name;
    std::string type;
};

struct Function
{
    std::string id;  ///< "Contract.name(type,...)"
    std::string contract;
    std::string declaring_contract;
    std::string name;
    std::string kind;  ///< function, constructor, fallback, receive
    std::string visibility;
    std::string mutability;
    std::optional<std::string> selector;
    std::vector<Param> params;
    std::vector<Param> returns;
    std::vector<std::string> modifiers;
    bool implemented = false;
    SourceSpan span;
    int64_t ast_id = 0;
    NodeId entry = 0;
    NodeId exit = 0;
    std::vector<NodeId> nodes;  ///< entry first, exit last
    /// Value sources assigned to each local or modifier parameter.
    std::map<VarRef, std::vector<TaintSource>> local_sources;

    [[nodiscard]] bool is_public() const noexcept
    {
        return visibility == "public" || visibility == "external";
    }
    [[nodiscard]] bool mutates() const noexcept
    {
        return mutability != "view" && mutability != "pure";
    }
};

struct StateVar
{
    int64_t decl_id = 0;
    std::string name;
    std::string type;
    std::string declaring_contract;
    bool constant = false;
    bool immutable = false;
    bool has_initializer = false;
};

/// One entry of the compiler's storage layout.
struct StorageSlot
{
    std::string name;
    std::string declaring_contract;
    std::size_t slot = 0;
    std::size_t offset = 0;  ///< Byte offset within the slot.
    std::size_t size = 32;   ///< Bytes.
    std::string type;        ///< Type label, e.g. "contract Token" or "mapping(address => uint256)".
};

struct Contract
{
    std::string name;
    std::string kind;  ///< contract, interface, library
    bool is_abstract = false;
    std::string file;
    int64_t ast_id = 0;
    std::vector<std::string> linearized_bases;  ///< Most derived first, incl. self.
    std::vector<StateVar> state_vars;
    std::vector<std::string> functions;  ///< Flattened function ids.
    std::vector<std::string> modifiers;  ///< Modifier names visible in this contract.
    std::string runtime_bytecode;        ///< Hex, empty if not deployable.
    std::string source_map;
    std::map<std::string, std::string> method_identifiers;  ///< signature -> selector
    std::vector<StorageSlot> storage_layout;

    [[nodiscard]] bool deployable() const noexcept
    {
        return kind == "contract" && !is_abstract;
    }
};

struct SourceText
{
    std::string path;
    std::string content;
    std::size_t index = 0;  ///< solc source id used in source maps.
};

/// Normalized, inheritance-flattened view of one compilation.
struct ContractModel
{
    std::string compiler_version;
    std::vector<SourceText> sources;
    std::vector<Contract> contracts;
    std::map<std::string, Function> functions;
    std::vector<StatementNode> nodes;  ///< Indexed by NodeId.

    [[nodiscard]] const Contract* contract(std::string_view name) const;
    [[nodiscard]] const Function* function(std::string_view id) const;
    [[nodiscard]] const StatementNode& node(NodeId id) const { return nodes.at(id); }
    [[nodiscard]] const StateVar* state_var(std::string_view contract, int64_t decl_id) const;
    /// Function ids in deterministic order.
    [[nodiscard]] std::vector<std::string> function_ids() const;
};

}  // namespace rescan::ast

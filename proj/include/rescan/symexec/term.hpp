// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/evm/word.hpp>

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace rescan::symexec
{
/// Operators over 256-bit words. Comparisons yield 0 or 1. `byte_at` is the
/// EVM BYTE operator; `concat` joins 32 byte-valued words big-endian;
/// `keccak` hashes its word operands truncated to `length` bytes.
enum class Op : uint8_t
{
    constant,
    var,
    add,
    sub,
    mul,
    div,
    sdiv,
    mod,
    smod,
    addmod,
    mulmod,
    exp,
    signextend,
    lt,
    gt,
    slt,
    sgt,
    eq,
    iszero,
    and_,
    or_,
    xor_,
    not_,
    byte_at,
    shl,
    shr,
    sar,
    concat,
    keccak,
    ite,
};

std::string_view to_string(Op op) noexcept;

struct TermNode;
/// Interned term: structurally equal terms from one arena are the same pointer.
using Term = const TermNode*;

struct TermNode
{
    Op op = Op::constant;
    word value = 0;           ///< constant
    std::string name;         ///< var
    unsigned bits = 256;      ///< var: values are below 2^bits
    std::size_t length = 0;   ///< keccak: input bytes
    std::vector<Term> args;
    std::size_t id = 0;       ///< Creation order within the arena.

    [[nodiscard]] bool is_const() const noexcept { return op == Op::constant; }
    [[nodiscard]] bool is_bool() const noexcept
    {
        return op == Op::lt || op == Op::gt || op == Op::slt || op == Op::sgt || op == Op::eq ||
               op == Op::iszero;
    }
};

/// Owns and interns terms, simplifying on construction: constant folding,
/// neutral elements, byte reassembly, and mask elimination on narrow vars.
class TermArena
{
public:
    Term constant(const word& v);
    Term var(const std::string& name, unsigned bits = 256);
    Term apply(Op op, std::vector<Term> args);
    Term keccak(std::vector<Term> words, std::size_t length);

    Term add(Term a, Term b) { return apply(Op::add, {a, b}); }
    Term sub(Term a, Term b) { return apply(Op::sub, {a, b}); }
    Term eq(Term a, Term b) { return apply(Op::eq, {a, b}); }
    Term iszero(Term a) { return apply(Op::iszero, {a}); }
    Term and_(Term a, Term b) { return apply(Op::and_, {a, b}); }
    Term lt(Term a, Term b) { return apply(Op::lt, {a, b}); }
    /// Byte `i` (0 = most significant) of `w`.
    Term byte_of(Term w, unsigned i) { return apply(Op::byte_at, {constant(i), w}); }
    /// Nonzero-ness of `c` as a 0/1 term.
    Term truthy(Term c) { return c->is_bool() ? c : iszero(iszero(c)); }

    [[nodiscard]] std::size_t size() const;

private:
    Term intern(TermNode node);
    Term simplify(Op op, std::vector<Term>& args);

    mutable std::mutex mutex_;
    std::deque<TermNode> nodes_;
    std::map<std::tuple<Op, word, std::string, unsigned, std::size_t, std::vector<std::size_t>>, Term> index_;
};

/// Concrete semantics of one operator, shared by folding and evaluation.
word fold(Op op, const std::vector<word>& args, std::size_t length = 0);

using Assignment = std::map<std::string, word>;

/// Evaluates with real keccak; unassigned variables read as zero.
word evaluate(Term t, const Assignment& a);

/// Variables occurring in `t`.
void collect_vars(Term t, std::map<std::string, Term>& out);

std::string to_string(Term t, std::size_t max_depth = 6);

}  // namespace rescan::symexec

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/bytecode/cfg.hpp>

#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

namespace rescan::recovery
{
using bytecode::BlockId;
using ValueId = std::size_t;

struct Constant
{
    word value;
};

/// Entry-stack slot read by the block; depth 0 is the top at block entry.
struct StackInput
{
    std::size_t depth;
};

struct Computed
{
    uint8_t opcode;
    std::vector<ValueId> operands;
};

struct SsaValue
{
    ValueId id = 0;
    BlockId def_block = 0;
    std::variant<Constant, StackInput, Computed> origin;
    bool used = false;

    [[nodiscard]] std::optional<word> constant() const
    {
        if (const auto* c = std::get_if<Constant>(&origin))
            return c->value;
        return std::nullopt;
    }
    [[nodiscard]] std::optional<std::size_t> input_depth() const
    {
        if (const auto* s = std::get_if<StackInput>(&origin))
            return s->depth;
        return std::nullopt;
    }
};

struct SsaBlock
{
    BlockId block_id = 0;
    std::vector<SsaValue> values;  ///< Indexed by ValueId.
    std::vector<ValueId> exit_stack;  ///< Bottom first, top last.
    /// Entry-stack slots materialised by underflow; deeper entry slots pass
    /// through the block untouched, below `exit_stack`.
    std::size_t inputs_materialised = 0;
    /// Value consumed as target by a terminating JUMP/JUMPI.
    std::optional<ValueId> jump_target;

    [[nodiscard]] const SsaValue& value(ValueId id) const { return values.at(id); }

    /// Value occupying exit-stack position `depth` (0 = top), or, when the
    /// position lies below the explicit exit stack, the entry-stack depth it
    /// passes through from.
    [[nodiscard]] std::variant<ValueId, StackInput> at_exit_depth(std::size_t depth) const;
};

/// Single-assignment view of one block's stack effects with constant folding
/// over ADD SUB MUL DIV EXP AND OR XOR SHL SHR NOT (mod 2^256). DUP defines a
/// copy of its source; SWAP only permutes.
SsaBlock to_ssa(const bytecode::BasicBlock& block);

using SsaMap = std::map<BlockId, SsaBlock>;
SsaMap to_ssa(const bytecode::Cfg& cfg);

}  // namespace rescan::recovery

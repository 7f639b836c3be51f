// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/evm/opcodes.hpp>
#include <rescan/evm/word.hpp>

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rescan::bytecode
{
struct Instruction
{
    std::size_t offset = 0;
    uint8_t opcode = evm::OP_INVALID;  ///< Unknown bytes and truncated pushes become INVALID.
    uint8_t raw = evm::OP_INVALID;     ///< Byte as found in the code.
    bytes immediate;                   ///< PUSH payload, empty for everything else.
    bool truncated = false;            ///< PUSH whose payload ran past end of code.

    [[nodiscard]] std::size_t size() const noexcept { return 1 + immediate.size(); }
    [[nodiscard]] std::size_t next_offset() const noexcept { return offset + size(); }
    [[nodiscard]] word push_value() const noexcept { return load_word(immediate); }
    [[nodiscard]] bool is_push() const noexcept { return evm::is_push(opcode); }
};

/// Decodes every byte exactly once. Never fails: malformed input degrades to
/// INVALID instructions.
std::vector<Instruction> disassemble(bytes_view code);

/// Inverse of disassemble() for inputs without truncated pushes.
bytes reassemble(const std::vector<Instruction>& instructions);

std::string to_string(const Instruction& instr);

using BlockId = std::size_t;

enum class TerminatorKind
{
    push_jump,         ///< JUMP whose target is the immediately preceding PUSH.
    orphan_jump,       ///< JUMP or JUMPI with no immediately preceding PUSH.
    conditional_jump,  ///< JUMPI whose target is the immediately preceding PUSH.
    fallthrough,       ///< Block ends because the next instruction is a JUMPDEST.
    halt,              ///< STOP, RETURN, REVERT, INVALID, SELFDESTRUCT, or end of code.
};

std::string_view to_string(TerminatorKind kind) noexcept;

struct BasicBlock
{
    BlockId id = 0;
    std::size_t start_offset = 0;
    std::vector<Instruction> instructions;
    TerminatorKind terminator_kind = TerminatorKind::halt;

    [[nodiscard]] bool starts_with_jumpdest() const noexcept
    {
        return !instructions.empty() && instructions.front().opcode == evm::OP_JUMPDEST;
    }
    [[nodiscard]] const Instruction& last() const { return instructions.back(); }
    [[nodiscard]] std::size_t end_offset() const noexcept
    {
        return instructions.empty() ? start_offset : instructions.back().next_offset();
    }
    [[nodiscard]] bool ends_in_jump() const noexcept
    {
        return !instructions.empty() && evm::is_jump(instructions.back().opcode);
    }
    [[nodiscard]] bool ends_in_jumpi() const noexcept
    {
        return !instructions.empty() && instructions.back().opcode == evm::OP_JUMPI;
    }
    /// Push-jump or conditional push-jump: target known from the preceding PUSH.
    [[nodiscard]] bool is_push_jump() const noexcept
    {
        return terminator_kind == TerminatorKind::push_jump ||
               terminator_kind == TerminatorKind::conditional_jump;
    }
    /// Whether control may continue into the next block by address order.
    [[nodiscard]] bool falls_through() const noexcept
    {
        return terminator_kind == TerminatorKind::fallthrough || ends_in_jumpi();
    }
};

/// Splits after JUMP/JUMPI/halting opcodes and before every JUMPDEST. Block ids
/// are assigned in offset order starting at 0.
std::vector<BasicBlock> split_blocks(const std::vector<Instruction>& instructions);

enum class EdgeKind
{
    sequential,
    jump,
    branch_taken,
    branch_fallthrough,
};

std::string_view to_string(EdgeKind kind) noexcept;

struct Edge
{
    BlockId from = 0;
    BlockId to = 0;
    EdgeKind kind = EdgeKind::sequential;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

class Cfg
{
public:
    Cfg() = default;
    explicit Cfg(std::vector<BasicBlock> blocks);

    [[nodiscard]] const std::vector<BasicBlock>& blocks() const noexcept { return blocks_; }
    [[nodiscard]] const BasicBlock& block(BlockId id) const { return blocks_.at(id); }
    [[nodiscard]] std::size_t size() const noexcept { return blocks_.size(); }

    /// Block starting exactly at `offset`, if any.
    [[nodiscard]] std::optional<BlockId> block_at(std::size_t offset) const;
    /// Block containing the instruction at `offset`, if any.
    [[nodiscard]] std::optional<BlockId> block_containing(std::size_t offset) const;

    [[nodiscard]] const std::set<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::set<BlockId>& unresolved() const noexcept { return unresolved_; }
    [[nodiscard]] const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }
    /// Edges added by orphan-jump recovery rather than by static emulation.
    [[nodiscard]] const std::set<Edge>& recovered_edges() const noexcept { return recovered_; }

    [[nodiscard]] std::vector<BlockId> successors(BlockId id) const;
    [[nodiscard]] std::vector<BlockId> predecessors(BlockId id) const;
    [[nodiscard]] std::vector<Edge> incoming(BlockId id) const;
    [[nodiscard]] std::vector<Edge> outgoing(BlockId id) const;
    [[nodiscard]] bool has_jump_edge(BlockId id) const;

    /// Whether `offset` is the start of a JUMPDEST block, i.e. a legal jump target.
    [[nodiscard]] bool is_valid_jump_target(const word& offset) const;

    bool add_edge(const Edge& e, bool recovered = false);
    void mark_unresolved(BlockId id) { unresolved_.insert(id); }
    void mark_resolved(BlockId id) { unresolved_.erase(id); }
    void add_diagnostic(std::string message) { diagnostics_.push_back(std::move(message)); }

private:
    std::vector<BasicBlock> blocks_;
    std::map<std::size_t, BlockId> by_offset_;
    std::set<Edge> edges_;
    std::set<Edge> recovered_;
    std::multimap<BlockId, Edge> out_;
    std::multimap<BlockId, Edge> in_;
    std::set<BlockId> unresolved_;
    std::vector<std::string> diagnostics_;
};

/// Builds the partial CFG recoverable from push-jumps and fallthroughs only.
Cfg static_stack_emulate(std::vector<BasicBlock> blocks);

/// disassemble + split_blocks + static_stack_emulate.
Cfg build_partial_cfg(bytes_view code);

/// Graphviz rendering: one node per block labeled `id@offset`, edges labeled by
/// kind. Edges added by orphan recovery are drawn blue.
std::string to_dot(const Cfg& cfg, std::string_view name = "cfg");

}  // namespace rescan::bytecode

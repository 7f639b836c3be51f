// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/bytecode/cfg.hpp>

#include <sstream>

namespace rescan::bytecode
{
std::vector<Instruction> disassemble(bytes_view code)
{
    std::vector<Instruction> out;
    out.reserve(code.size());
    std::size_t pc = 0;
    while (pc < code.size())
    {
        Instruction instr;
        instr.offset = pc;
        instr.raw = code[pc];
        instr.opcode = evm::is_defined(instr.raw) ? instr.raw : uint8_t{evm::OP_INVALID};
        const auto width = evm::push_size(instr.opcode);
        const auto available = std::min<std::size_t>(width, code.size() - pc - 1);
        instr.immediate.assign(code.begin() + static_cast<std::ptrdiff_t>(pc + 1),
            code.begin() + static_cast<std::ptrdiff_t>(pc + 1 + available));
        if (available < width)
        {
            instr.truncated = true;
            instr.opcode = evm::OP_INVALID;
        }
        pc += 1 + available;
        out.push_back(std::move(instr));
    }
    return out;
}

bytes reassemble(const std::vector<Instruction>& instructions)
{
    bytes out;
    for (const auto& i : instructions)
    {
        out.push_back(i.raw);
        out.insert(out.end(), i.immediate.begin(), i.immediate.end());
    }
    return out;
}

std::string to_string(const Instruction& instr)
{
    std::string s{evm::info(instr.opcode).name};
    if (!instr.immediate.empty() || (instr.is_push() && !instr.truncated))
        s += " 0x" + to_hex(instr.push_value());
    return s;
}

std::string_view to_string(TerminatorKind kind) noexcept
{
    switch (kind)
    {
    case TerminatorKind::push_jump:
        return "push-jump";
    case TerminatorKind::orphan_jump:
        return "orphan-jump";
    case TerminatorKind::conditional_jump:
        return "conditional-jump";
    case TerminatorKind::fallthrough:
        return "fallthrough";
    case TerminatorKind::halt:
        return "halt";
    }
    return "?";
}

std::string_view to_string(EdgeKind kind) noexcept
{
    switch (kind)
    {
    case EdgeKind::sequential:
        return "sequential";
    case EdgeKind::jump:
        return "jump";
    case EdgeKind::branch_taken:
        return "branch-taken";
    case EdgeKind::branch_fallthrough:
        return "branch-fallthrough";
    }
    return "?";
}

namespace
{
TerminatorKind classify(const std::vector<Instruction>& instrs, bool followed_by_block)
{
    const auto& last = instrs.back();
    if (evm::is_jump(last.opcode))
    {
        const bool preceded_by_push = instrs.size() >= 2 && instrs[instrs.size() - 2].is_push();
        if (!preceded_by_push)
            return TerminatorKind::orphan_jump;
        return last.opcode == evm::OP_JUMPI ? TerminatorKind::conditional_jump :
                                              TerminatorKind::push_jump;
    }
    if (evm::is_halt(last.opcode) || !followed_by_block)
        return TerminatorKind::halt;
    return TerminatorKind::fallthrough;
}
}  // namespace

std::vector<BasicBlock> split_blocks(const std::vector<Instruction>& instructions)
{
    std::vector<BasicBlock> blocks;
    std::vector<Instruction> current;

    auto close = [&](bool followed_by_block) {
        if (current.empty())
            return;
        BasicBlock b;
        b.id = blocks.size();
        b.start_offset = current.front().offset;
        b.terminator_kind = classify(current, followed_by_block);
        b.instructions = std::move(current);
        current.clear();
        blocks.push_back(std::move(b));
    };

    for (const auto& instr : instructions)
    {
        if (instr.opcode == evm::OP_JUMPDEST)
            close(true);
        current.push_back(instr);
        if (evm::is_control_transfer(instr.opcode))
            close(true);
    }
    close(false);
    return blocks;
}

Cfg::Cfg(std::vector<BasicBlock> blocks) : blocks_(std::move(blocks))
{
    for (const auto& b : blocks_)
        by_offset_.emplace(b.start_offset, b.id);
}

std::optional<BlockId> Cfg::block_at(std::size_t offset) const
{
    const auto it = by_offset_.find(offset);
    if (it == by_offset_.end())
        return std::nullopt;
    return it->second;
}

std::optional<BlockId> Cfg::block_containing(std::size_t offset) const
{
    auto it = by_offset_.upper_bound(offset);
    if (it == by_offset_.begin())
        return std::nullopt;
    --it;
    const auto& b = blocks_[it->second];
    if (offset >= b.end_offset())
        return std::nullopt;
    return it->second;
}

std::vector<BlockId> Cfg::successors(BlockId id) const
{
    std::vector<BlockId> out;
    const auto [lo, hi] = out_.equal_range(id);
    for (auto it = lo; it != hi; ++it)
        out.push_back(it->second.to);
    return out;
}

std::vector<BlockId> Cfg::predecessors(BlockId id) const
{
    std::vector<BlockId> out;
    const auto [lo, hi] = in_.equal_range(id);
    for (auto it = lo; it != hi; ++it)
        out.push_back(it->second.from);
    return out;
}

std::vector<Edge> Cfg::incoming(BlockId id) const
{
    std::vector<Edge> out;
    const auto [lo, hi] = in_.equal_range(id);
    for (auto it = lo; it != hi; ++it)
        out.push_back(it->second);
    return out;
}

std::vector<Edge> Cfg::outgoing(BlockId id) const
{
    std::vector<Edge> out;
    const auto [lo, hi] = out_.equal_range(id);
    for (auto it = lo; it != hi; ++it)
        out.push_back(it->second);
    return out;
}

bool Cfg::has_jump_edge(BlockId id) const
{
    const auto [lo, hi] = out_.equal_range(id);
    for (auto it = lo; it != hi; ++it)
        if (it->second.kind == EdgeKind::jump || it->second.kind == EdgeKind::branch_taken)
            return true;
    return false;
}

bool Cfg::is_valid_jump_target(const word& offset) const
{
    if (offset > word{blocks_.empty() ? 0 : blocks_.back().end_offset()})
        return false;
    const auto b = block_at(static_cast<std::size_t>(offset));
    return b && blocks_[*b].starts_with_jumpdest();
}

bool Cfg::add_edge(const Edge& e, bool recovered)
{
    if (!edges_.insert(e).second)
        return false;
    out_.emplace(e.from, e);
    in_.emplace(e.to, e);
    if (recovered)
        recovered_.insert(e);
    return true;
}

Cfg static_stack_emulate(std::vector<BasicBlock> blocks)
{
    Cfg cfg{std::move(blocks)};
    for (const auto& b : cfg.blocks())
    {
        const auto next = cfg.block_at(b.end_offset());
        switch (b.terminator_kind)
        {
        case TerminatorKind::fallthrough:
            if (next)
                cfg.add_edge({b.id, *next, EdgeKind::sequential});
            break;
        case TerminatorKind::halt:
            break;
        case TerminatorKind::orphan_jump:
            cfg.mark_unresolved(b.id);
            if (b.ends_in_jumpi() && next)
                cfg.add_edge({b.id, *next, EdgeKind::branch_fallthrough});
            break;
        case TerminatorKind::push_jump:
        case TerminatorKind::conditional_jump:
        {
            const bool conditional = b.terminator_kind == TerminatorKind::conditional_jump;
            const auto target = b.instructions[b.instructions.size() - 2].push_value();
            if (cfg.is_valid_jump_target(target))
            {
                cfg.add_edge({b.id, *cfg.block_at(static_cast<std::size_t>(target)),
                    conditional ? EdgeKind::branch_taken : EdgeKind::jump});
            }
            else
            {
                cfg.mark_unresolved(b.id);
                cfg.add_diagnostic("block " + std::to_string(b.id) + ": push-jump target 0x" +
                                   to_hex(target) + " is not a JUMPDEST");
            }
            if (conditional && next)
                cfg.add_edge({b.id, *next, EdgeKind::branch_fallthrough});
            break;
        }
        }
    }
    return cfg;
}

Cfg build_partial_cfg(bytes_view code)
{
    return static_stack_emulate(split_blocks(disassemble(code)));
}

std::string to_dot(const Cfg& cfg, std::string_view name)
{
    std::ostringstream os;
    os << "digraph \"" << name << "\" {\n  node [shape=box, fontname=monospace];\n";
    for (const auto& b : cfg.blocks())
    {
        os << "  b" << b.id << " [label=\"" << b.id << "@0x" << std::hex << b.start_offset
           << std::dec << "\"";
        if (cfg.unresolved().contains(b.id))
            os << ", color=red";
        os << "];\n";
    }
    for (const auto& e : cfg.edges())
    {
        os << "  b" << e.from << " -> b" << e.to << " [label=\"" << to_string(e.kind) << "\"";
        if (cfg.recovered_edges().contains(e))
            os << ", color=blue";
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace rescan::bytecode

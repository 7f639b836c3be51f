// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/recovery/recover.hpp>

#include <algorithm>
#include <tuple>

namespace rescan::recovery
{
namespace
{
/// Slots tracked at a block's entry during the backward walk. The primary slot
/// is the orphan jump's target; each constraint records a slot that must hold
/// a given constant for the walked path to be feasible. Constraints come from
/// traversing a jump edge backwards: the jumping block's own target slot must
/// equal the start of the block it jumped to. Without them, shared helpers
/// would leak every caller's return address into every return site.
struct Track
{
    std::optional<std::size_t> primary_depth;
    std::optional<word> resolved;
    std::vector<std::pair<std::size_t, word>> constraints;

    friend bool operator<(const Track& a, const Track& b)
    {
        return std::tie(a.primary_depth, a.resolved, a.constraints) <
               std::tie(b.primary_depth, b.resolved, b.constraints);
    }
};

constexpr std::size_t max_constraints = 8;

/// Backward walk over predecessor edges. The answer is a reachability union,
/// so every (block, track) key is expanded once: a key cut short by a cycle
/// lies below an ancestor on the current path whose own expansion covers what
/// the cut skipped.
class Walker
{
public:
    Walker(const bytecode::Cfg& cfg, const SsaMap& ssa, std::size_t max_depth)
      : cfg_{cfg}, ssa_{ssa}, max_depth_{max_depth}
    {}

    std::set<word> entry_slot(BlockId block, std::size_t depth)
    {
        return walk(block, Track{depth, std::nullopt, {}}, 0);
    }

private:
    using Key = std::pair<BlockId, Track>;

    /// A slot read at a predecessor's exit: a constant, an entry depth of the
    /// predecessor, or a computed (unknown) value.
    using Slot = std::variant<word, std::size_t, std::monostate>;

    static Slot read(const SsaBlock& sb, std::size_t depth)
    {
        const auto slot = sb.at_exit_depth(depth);
        if (const auto* in = std::get_if<StackInput>(&slot))
            return in->depth;
        const auto& value = sb.value(std::get<ValueId>(slot));
        if (const auto c = value.constant())
            return *c;
        if (const auto d = value.input_depth())
            return *d;
        return std::monostate{};
    }

    /// Maps `t` from the entry of `to` back to the entry of `from` across one
    /// edge. Returns nullopt when the path is infeasible or carries no constant.
    std::optional<Track> step_back(const Track& t, BlockId from, BlockId to, bool via_jump) const
    {
        const auto& sb = ssa_.at(from);
        Track out;
        out.resolved = t.resolved;

        auto require = [&](const Slot& slot, const word& expected) {
            if (const auto* c = std::get_if<word>(&slot))
                return *c == expected;
            if (const auto* d = std::get_if<std::size_t>(&slot))
                out.constraints.emplace_back(*d, expected);
            return true;
        };

        if (via_jump && sb.jump_target)
        {
            const auto& target = sb.value(*sb.jump_target);
            const word dest = cfg_.block(to).start_offset;
            Slot slot = std::monostate{};
            if (const auto c = target.constant())
                slot = *c;
            else if (const auto d = target.input_depth())
                slot = *d;
            if (!require(slot, dest))
                return std::nullopt;
        }

        if (t.primary_depth)
        {
            const auto slot = read(sb, *t.primary_depth);
            if (const auto* c = std::get_if<word>(&slot))
                out.resolved = *c;
            else if (const auto* d = std::get_if<std::size_t>(&slot))
                out.primary_depth = *d;
            else
                return std::nullopt;
        }

        for (const auto& [depth, expected] : t.constraints)
            if (!require(read(sb, depth), expected))
                return std::nullopt;

        std::sort(out.constraints.begin(), out.constraints.end());
        out.constraints.erase(
            std::unique(out.constraints.begin(), out.constraints.end()), out.constraints.end());
        if (out.constraints.size() > max_constraints)
            out.constraints.resize(max_constraints);
        return out;
    }

    std::set<word> walk(BlockId block, const Track& track, std::size_t steps)
    {
        Key key{block, track};
        if (const auto it = memo_.find(key); it != memo_.end())
            return it->second;
        if (on_path_.contains(key))
            return {};
        if (steps >= max_depth_)
        {
            // Out of budget: a resolved value with unchecked constraints is kept.
            if (track.resolved)
                return {*track.resolved};
            return {};
        }
        on_path_.insert(key);

        std::set<std::pair<BlockId, bool>> incoming;
        for (const auto& e : cfg_.incoming(block))
            incoming.emplace(e.from, e.kind == bytecode::EdgeKind::jump ||
                                             e.kind == bytecode::EdgeKind::branch_taken);

        std::set<word> found;
        for (const auto& [pred, via_jump] : incoming)
        {
            const auto next = step_back(track, pred, block, via_jump);
            if (!next)
                continue;
            if (next->resolved && next->constraints.empty())
            {
                found.insert(*next->resolved);
                continue;
            }
            const auto deeper = walk(pred, *next, steps + 1);
            found.insert(deeper.begin(), deeper.end());
        }

        on_path_.erase(key);
        memo_.emplace(std::move(key), found);
        return found;
    }

    const bytecode::Cfg& cfg_;
    const SsaMap& ssa_;
    std::size_t max_depth_;
    std::map<Key, std::set<word>> memo_;
    std::set<Key> on_path_;
};
}  // namespace

std::set<word> find_unused_var(
    BlockId block, const bytecode::Cfg& cfg, const SsaMap& ssa, const RecoveryOptions& options)
{
    const auto& sb = ssa.at(block);
    if (!sb.jump_target)
        return {};
    const auto& target = sb.value(*sb.jump_target);
    if (const auto c = target.constant())
        return {*c};
    const auto depth = target.input_depth();
    if (!depth)
        return {};
    return Walker{cfg, ssa, options.max_walk_depth}.entry_slot(block, *depth);
}

bytecode::Cfg recover_cfg(bytecode::Cfg cfg, const RecoveryOptions& options, RecoveryStats* stats)
{
    using bytecode::EdgeKind;
    using bytecode::TerminatorKind;

    const auto ssa = to_ssa(cfg);
    std::set<std::string> reported;
    RecoveryStats local;

    for (bool changed = true; changed;)
    {
        changed = false;
        ++local.iterations;
        for (const auto& b : cfg.blocks())
        {
            if (b.terminator_kind != TerminatorKind::orphan_jump)
                continue;
            const auto kind = b.ends_in_jumpi() ? EdgeKind::branch_taken : EdgeKind::jump;
            for (const auto& target : find_unused_var(b.id, cfg, ssa, options))
            {
                if (!cfg.is_valid_jump_target(target))
                {
                    auto msg = "block " + std::to_string(b.id) + ": recovered target 0x" +
                               to_hex(target) + " is not a JUMPDEST";
                    if (reported.insert(msg).second)
                        cfg.add_diagnostic(std::move(msg));
                    continue;
                }
                const auto to = *cfg.block_at(static_cast<std::size_t>(target));
                if (cfg.add_edge({b.id, to, kind}, true))
                {
                    changed = true;
                    ++local.edges_added;
                }
                cfg.mark_resolved(b.id);
            }
        }
    }

    if (stats)
        *stats = local;
    return cfg;
}
}  // namespace rescan::recovery

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/recovery/ssa.hpp>

namespace rescan::recovery
{
struct RecoveryOptions
{
    /// Maximum number of predecessor blocks walked back from an orphan jump.
    std::size_t max_walk_depth = 64;
};

/// Constants that can reach the jump-target stack position of `block`'s
/// terminator. Looks at the block's own definitions first, then walks every
/// acyclic predecessor path, tracking the stack position through each block.
/// Crossing a jump edge backwards also requires the jumping block's target
/// slot to hold that edge's destination, which prunes paths that enter a
/// shared helper from one caller and leave it towards another.
/// An empty set means not-found: the target is computed, comes from a
/// predecessor cycle, or lies beyond the walk bound.
std::set<word> find_unused_var(BlockId block, const bytecode::Cfg& cfg, const SsaMap& ssa,
    const RecoveryOptions& options = {});

struct RecoveryStats
{
    std::size_t iterations = 0;
    std::size_t edges_added = 0;
};

/// Resolves orphan jumps until no new edge is added. The result's edge set is a
/// superset of the input's and its unresolved set is a subset.
bytecode::Cfg recover_cfg(bytecode::Cfg cfg, const RecoveryOptions& options = {},
    RecoveryStats* stats = nullptr);

}  // namespace rescan::recovery

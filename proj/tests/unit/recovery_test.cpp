// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include "../support/bytecode_fixtures.hpp"
#include "../support/dispatcher_gen.hpp"
#include "../support/asm.hpp"
#include "../support/toy_evm.hpp"

#include <rescan/recovery/recover.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace rescan;
using namespace rescan::bytecode;
using namespace rescan::recovery;

namespace
{
SsaBlock ssa_of(std::string_view hex)
{
    const auto blocks = split_blocks(disassemble(from_hex(hex)));
    return to_ssa(blocks.at(0));
}

/// Edges in `a` but not in `b`, rendered as "from->to:kind".
std::string describe(const std::set<Edge>& a, const std::set<Edge>& b)
{
    std::string out;
    for (const auto& e : a)
        if (!b.contains(e))
            out += std::to_string(e.from) + "->" + std::to_string(e.to) + ":" +
                   std::string{to_string(e.kind)} + " ";
    return out;
}

std::vector<std::optional<word>> exit_constants(const SsaBlock& b)
{
    std::vector<std::optional<word>> out;
    for (const auto v : b.exit_stack)
        out.push_back(b.value(v).constant());
    return out;
}
}  // namespace

TEST(to_ssa, single_push)
{
    const auto b = ssa_of("600d");
    ASSERT_EQ(b.values.size(), 1u);
    EXPECT_EQ(b.values[0].constant(), word{0x0d});
    EXPECT_FALSE(b.values[0].used);
    EXPECT_EQ(b.exit_stack, std::vector<ValueId>{0});
}

TEST(to_ssa, add_folds)
{
    const auto b = ssa_of("6002600301");
    ASSERT_EQ(b.exit_stack.size(), 1u);
    EXPECT_EQ(b.exit_stack[0], 2u);
    EXPECT_EQ(b.value(2).constant(), word{5});
    EXPECT_TRUE(b.value(0).used);
    EXPECT_TRUE(b.value(1).used);
}

TEST(to_ssa, swap_jump_underflow)
{
    const auto b = ssa_of("9056");
    EXPECT_EQ(b.inputs_materialised, 2u);
    ASSERT_TRUE(b.jump_target);
    EXPECT_EQ(b.value(*b.jump_target).input_depth(), 1u);
    EXPECT_TRUE(b.exit_stack.size() == 1u);
    EXPECT_EQ(b.value(b.exit_stack[0]).input_depth(), 0u);
}

TEST(to_ssa, dup_copies_and_marks_source_used)
{
    const auto b = ssa_of("600780");
    ASSERT_EQ(b.values.size(), 2u);
    EXPECT_TRUE(b.values[0].used);
    EXPECT_EQ(b.values[1].constant(), word{7});
}

TEST(to_ssa, computed_values_are_not_constant)
{
    const auto b = ssa_of("600035");
    ASSERT_EQ(b.exit_stack.size(), 1u);
    EXPECT_FALSE(b.value(b.exit_stack[0]).constant());
}

TEST(to_ssa, at_exit_depth_passes_through)
{
    const auto b = ssa_of("50600156");  // POP, PUSH1 1, JUMP
    EXPECT_EQ(b.inputs_materialised, 1u);
    const auto slot = b.at_exit_depth(0);
    ASSERT_TRUE(std::holds_alternative<StackInput>(slot));
    EXPECT_EQ(std::get<StackInput>(slot).depth, 1u);
}

// Folding agrees with the concrete interpreter on random constant blocks.
TEST(to_ssa, folding_matches_interpreter)
{
    const uint8_t ops[] = {0x01, 0x02, 0x03, 0x04, 0x0a, 0x16, 0x17, 0x18, 0x1b, 0x1c, 0x19,
        0x80, 0x81, 0x90};
    std::mt19937 rng{3};
    for (int iter = 0; iter < 400; ++iter)
    {
        bytes code;
        for (int i = 0; i < 4; ++i)
        {
            const auto width = std::uniform_int_distribution<int>{1, 32}(rng);
            code.push_back(static_cast<uint8_t>(0x5f + width));
            for (int k = 0; k < width; ++k)
            {
                const bool small = width > 2 && rng() % 3 == 0;
                code.push_back(small && k + 1 < width ? 0 : static_cast<uint8_t>(rng()));
            }
        }
        for (int i = 0; i < 3; ++i)
            code.push_back(ops[rng() % std::size(ops)]);

        // Interpreter: store each stack slot to memory then return it.
        test::World world;
        std::vector<word> final_stack;
        world.on_step = [&](const test::Step& s) { final_stack = s.stack; };
        bytes program = code;
        program.push_back(0x00);
        world.accounts[1].code = program;
        test::Message msg;
        msg.address = 1;
        ASSERT_TRUE(world.transact(msg).success);

        const auto blocks = split_blocks(disassemble(code));
        ASSERT_EQ(blocks.size(), 1u);
        const auto b = to_ssa(blocks[0]);
        ASSERT_EQ(b.inputs_materialised, 0u);
        const auto consts = exit_constants(b);
        ASSERT_EQ(consts.size(), final_stack.size());
        for (std::size_t i = 0; i < consts.size(); ++i)
        {
            ASSERT_TRUE(consts[i]) << "slot " << i << " iter " << iter;
            EXPECT_EQ(*consts[i], final_stack[i]) << "slot " << i << " iter " << iter;
        }
    }
}

TEST(find_unused_var, orphan_fixture_walks_to_predecessor)
{
    const auto cfg = build_partial_cfg(test::orphan_jump_fixture());
    const auto ssa = to_ssa(cfg);
    EXPECT_EQ(find_unused_var(6, cfg, ssa), (std::set<word>{0x0d}));
}

TEST(find_unused_var, local_constant)
{
    const auto cfg = build_partial_cfg(from_hex("6008565b5b00"));
    const auto ssa = to_ssa(cfg);
    EXPECT_EQ(find_unused_var(0, cfg, ssa), (std::set<word>{8}));
}

TEST(find_unused_var, calldata_target_not_found)
{
    const auto cfg = build_partial_cfg(from_hex("600035565b00"));
    const auto ssa = to_ssa(cfg);
    EXPECT_TRUE(find_unused_var(0, cfg, ssa).empty());
}

TEST(find_unused_var, predecessor_cycle_not_found)
{
    // b0: PUSH1 3 JUMP -> b1: JUMPDEST PUSH1 3 JUMP (self loop) ; b2: JUMPDEST JUMP
    // b2 is reachable only from itself, so its target never resolves.
    test::Assembler a;
    a.push_label("loop").op(0x56).label("loop").push_label("loop").op(0x56);
    a.label("self").op(0x56);
    const auto code = a.build();
    auto cfg = build_partial_cfg(code);
    const auto id = *cfg.block_at(a.offset("self"));
    cfg.add_edge({id, id, EdgeKind::jump});
    const auto ssa = to_ssa(cfg);
    EXPECT_TRUE(find_unused_var(id, cfg, ssa).empty());
}

TEST(find_unused_var, walk_depth_bound)
{
    // A chain of 70 pass-through blocks between the push and the orphan jump.
    test::Assembler a;
    a.push_label("target").push_label("p0").op(0x56);
    for (int i = 0; i < 70; ++i)
        a.label("p" + std::to_string(i)).push_label("p" + std::to_string(i + 1)).op(0x56);
    a.label("p70").op(0x56);
    a.label("target").op(0x00);
    const auto cfg = build_partial_cfg(a.build());
    const auto ssa = to_ssa(cfg);
    const auto jump_block = *cfg.block_at(a.offset("p70"));
    EXPECT_TRUE(find_unused_var(jump_block, cfg, ssa).empty());
    EXPECT_EQ(find_unused_var(jump_block, cfg, ssa, {128}),
        (std::set<word>{word{a.offset("target")}}));
}

TEST(recover_cfg, orphan_fixture)
{
    const auto partial = build_partial_cfg(test::orphan_jump_fixture());
    RecoveryStats stats;
    const auto cfg = recover_cfg(partial, {}, &stats);
    EXPECT_TRUE(cfg.edges().contains({6, 4, EdgeKind::jump}));
    EXPECT_EQ(*cfg.block_at(0x0d), 4u);
    EXPECT_TRUE(cfg.unresolved().empty());
    EXPECT_EQ(stats.edges_added, 1u);
    EXPECT_TRUE(std::includes(cfg.edges().begin(), cfg.edges().end(), partial.edges().begin(),
        partial.edges().end()));
}

TEST(recover_cfg, already_complete_is_identity)
{
    const auto partial = build_partial_cfg(from_hex("600356" "5b00"));
    const auto cfg = recover_cfg(partial);
    ASSERT_FALSE(partial.edges().empty());
    EXPECT_EQ(cfg.edges(), partial.edges());
    EXPECT_EQ(cfg.unresolved(), partial.unresolved());
}

TEST(recover_cfg, rejects_non_jumpdest_target)
{
    const auto cfg = recover_cfg(build_partial_cfg(from_hex("6004600190035600")));
    EXPECT_TRUE(cfg.unresolved().contains(0));
    ASSERT_FALSE(cfg.diagnostics().empty());
    EXPECT_NE(cfg.diagnostics().back().find("not a JUMPDEST"), std::string::npos);
}

TEST(recover_cfg, dispatchers_match_concrete_oracle)
{
    for (unsigned seed = 0; seed < 20; ++seed)
    {
        const auto prog = test::generate_dispatcher(seed);
        const auto partial = build_partial_cfg(prog.code);
        ASSERT_FALSE(partial.unresolved().empty());
        RecoveryStats stats;
        const auto cfg = recover_cfg(partial, {}, &stats);
        const auto observed = test::observe_edges(cfg, prog.code, prog.selectors);
        EXPECT_EQ(describe(cfg.edges(), observed), "") << "seed " << seed;
        EXPECT_EQ(describe(observed, cfg.edges()), "") << "seed " << seed;
        EXPECT_TRUE(cfg.unresolved().empty()) << "seed " << seed;
        EXPECT_LE(stats.iterations, cfg.size() * cfg.size());
    }
}

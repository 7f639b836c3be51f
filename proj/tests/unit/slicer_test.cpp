// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include "../support/corpus.hpp"

#include <gtest/gtest.h>

using namespace rescan;

namespace
{
/// Source lines of a node set. Function entries stand for the declaration
/// line; exits are synthetic and have no statement of their own.
std::set<std::size_t> lines_of(const ast::ContractModel& m, const std::set<ast::NodeId>& nodes)
{
    std::set<std::size_t> out;
    for (const auto n : nodes)
        if (m.node(n).kind != ast::StatementKind::exit)
            out.insert(m.node(n).span.line);
    return out;
}

const slicer::Slice* slice_at(const slicer::StageOne& s1, const ast::ContractModel& m, std::size_t line)
{
    for (const auto& s : s1.slices)
        if (m.node(s.criterion.entry_node).span.line == line)
            return &s;
    return nullptr;
}
}  // namespace

TEST(slicer, two_contract_criteria_are_the_three_external_calls)
{
    const auto a = test::analyze_source("two_contract_withdraw.sol");
    std::set<std::size_t> lines;
    for (const auto& c : slicer::find_criteria(a->ipdg, a->model))
        lines.insert(a->model.node(c.entry_node).span.line);
    EXPECT_EQ(lines, (std::set<std::size_t>{4, 6, 7}));
}

TEST(slicer, two_contract_call_value_slice)
{
    const auto a = test::analyze_source("two_contract_withdraw.sol");
    const auto s1 = slicer::run_stage_one(a->icfg, a->ipdg);
    const auto* s = slice_at(s1, a->model, 6);
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(lines_of(a->model, s->nodes), (std::set<std::size_t>{3, 4, 5, 6, 13, 14}));
}

TEST(slicer, slices_are_backward_closed)
{
    for (const auto& file : {"two_contract_withdraw.sol", "lending_cross_contract.sol", "internal_helper.sol", "loop_payout.sol"})
    {
        const auto a = test::analyze_source(file);
        for (const auto& c : slicer::find_criteria(a->ipdg, a->model))
        {
            const auto s = slicer::backward_slice(a->ipdg, c);
            EXPECT_TRUE(s.nodes.contains(c.entry_node)) << file;
            EXPECT_EQ(slicer::backward_closure(a->ipdg, s.nodes), s.nodes) << file;
        }
    }
}

TEST(slicer, closure_is_monotone)
{
    const auto a = test::analyze_source("lending_cross_contract.sol");
    std::set<ast::NodeId> seeds;
    std::set<ast::NodeId> previous;
    for (const auto n : a->ipdg.nodes())
    {
        seeds.insert(n);
        const auto now = slicer::backward_closure(a->ipdg, seeds);
        EXPECT_TRUE(std::includes(now.begin(), now.end(), previous.begin(), previous.end()));
        previous = now;
    }
}

TEST(slicer, closure_follows_dependence_chains)
{
    // z depends on y, y on x: slicing at the call keeps all three.
    const auto a = test::analyze_text("chain.sol",
        "pragma solidity ^0.8.0;\n"
        "contract Chain {\n"
        "  uint x; uint y; uint z;\n"
        "  function f(uint v) public {\n"
        "    x = v;\n"
        "    y = x + 1;\n"
        "    z = y * 2;\n"
        "    payable(msg.sender).call{value: z}(\"\");\n"
        "  }\n"
        "}\n");
    const auto s1 = slicer::run_stage_one(a->icfg, a->ipdg);
    const auto* s = slice_at(s1, a->model, 8);
    ASSERT_NE(s, nullptr);
    const auto lines = lines_of(a->model, s->nodes);
    for (const std::size_t l : {5, 6, 7, 8})
        EXPECT_TRUE(lines.contains(l)) << l;
}

TEST(slicer, two_contract_warns_on_call_value)
{
    const auto a = test::analyze_source("two_contract_withdraw.sol");
    const auto s1 = slicer::run_stage_one(a->icfg, a->ipdg);
    const slicer::Warning* w6 = nullptr;
    for (const auto& w : s1.warnings)
        if (w.span.line == 6)
            w6 = &w;
    ASSERT_NE(w6, nullptr);
    EXPECT_EQ(w6->rule, slicer::Rule::eth_call_value);
    EXPECT_EQ(w6->confidence, slicer::Confidence::high);
    ASSERT_EQ(w6->stale_state.size(), 1u);
    EXPECT_EQ(w6->stale_state.begin()->name, "balances");
}

TEST(slicer, effect_before_interaction_is_safe)
{
    const auto a = test::analyze_source("bank_safe.sol");
    const auto s1 = slicer::run_stage_one(a->icfg, a->ipdg);
    EXPECT_TRUE(s1.warnings.empty());
}

TEST(slicer, unpruned_mode_reports_every_criterion)
{
    const auto a = test::analyze_source("bank_safe.sol");
    const auto pruned = slicer::run_stage_one(a->icfg, a->ipdg);
    const auto all = slicer::run_stage_one(a->icfg, a->ipdg, {}, false);
    EXPECT_GE(all.warnings.size(), pruned.warnings.size());
    EXPECT_FALSE(all.warnings.empty());
}

TEST(slicer, constant_recipient_is_not_reported)
{
    const auto a = test::analyze_source("constant_recipient.sol");
    EXPECT_TRUE(slicer::run_stage_one(a->icfg, a->ipdg).warnings.empty());
}

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include "../support/corpus.hpp"
#include "../support/dataflow_oracle.hpp"

#include <gtest/gtest.h>

using namespace rescan;
using ipdg::DepEdge;
using ipdg::DepKind;

namespace
{
class DataflowOracle : public ::testing::TestWithParam<std::string>
{
};

TEST_P(DataflowOracle, edges_equal_brute_force)
{
    const auto a = test::analyze_source(GetParam());
    if (test::statement_count(a->model) > 30)
        GTEST_SKIP() << "more than 30 statements";
    std::set<DepEdge> control;
    for (const auto& [id, f] : a->model.functions)
        if (f.implemented)
        {
            const auto mine = ipdg::control_dependence(a->model, f);
            EXPECT_EQ(mine, test::control_oracle(a->model, f)) << id;
            control.insert(mine.begin(), mine.end());
        }
    EXPECT_EQ(ipdg::data_dependence(a->icfg), test::data_oracle(a->icfg));
    EXPECT_EQ(a->ipdg.edges_of(DepKind::control), control);
    EXPECT_EQ(a->ipdg.edges_of(DepKind::data), test::data_oracle(a->icfg));
}

INSTANTIATE_TEST_SUITE_P(corpus, DataflowOracle, ::testing::ValuesIn(test::corpus_files()),
    [](const auto& info) {
        auto n = info.param.substr(0, info.param.size() - 4);
        std::replace(n.begin(), n.end(), '-', '_');
        return n;
    });
}  // namespace

TEST(ipdg, straight_line_has_no_data_edges)
{
    const auto a = test::analyze_text("s.sol",
        "pragma solidity ^0.8.0;\n"
        "contract S {\n"
        "  uint x; uint y;\n"
        "  function f() public {\n"
        "    x = 1;\n"
        "    y = 2;\n"
        "  }\n"
        "}\n");
    EXPECT_TRUE(a->ipdg.edges_of(DepKind::data).empty());
    const auto* f = a->model.function("S.f()");
    ASSERT_NE(f, nullptr);
    // Every statement depends on the entry only.
    for (const auto& e : ipdg::control_dependence(a->model, *f))
        EXPECT_EQ(e.from, f->entry);
}

TEST(ipdg, branch_controls_its_arm)
{
    const auto a = test::analyze_text("b.sol",
        "pragma solidity ^0.8.0;\n"
        "contract B {\n"
        "  uint x;\n"
        "  function f(uint v) public {\n"
        "    if (v > 3) {\n"
        "      x = v;\n"
        "    }\n"
        "    x = x + 1;\n"
        "  }\n"
        "}\n");
    const auto cond = test::nodes_on_line(a->model, "b.sol", 5);
    const auto arm = test::nodes_on_line(a->model, "b.sol", 6);
    const auto join = test::nodes_on_line(a->model, "b.sol", 8);
    ASSERT_EQ(cond.size(), 1u);
    ASSERT_EQ(arm.size(), 1u);
    ASSERT_EQ(join.size(), 1u);
    const auto ctrl = a->ipdg.edges_of(DepKind::control);
    EXPECT_TRUE(ctrl.contains({cond[0], arm[0], DepKind::control}));
    EXPECT_FALSE(ctrl.contains({cond[0], join[0], DepKind::control}));
    const auto data = a->ipdg.edges_of(DepKind::data);
    EXPECT_TRUE(data.contains({arm[0], join[0], DepKind::data}));
}

TEST(ipdg, call_dependencies_link_callee)
{
    const auto a = test::analyze_source("two_contract_withdraw.sol");
    const auto l4 = test::nodes_on_line(a->model, "", 4);
    ASSERT_EQ(l4.size(), 1u);
    const auto* g = a->model.function("ContractB.getBalance(address)");
    ASSERT_NE(g, nullptr);
    const auto call = a->ipdg.edges_of(DepKind::call);
    EXPECT_TRUE(call.contains({l4[0], g->entry, DepKind::call}));
}

TEST(ipdg, dot_output_is_a_digraph)
{
    const auto a = test::analyze_source("two_contract_withdraw.sol");
    EXPECT_EQ(ipdg::to_dot(a->icfg).rfind("digraph icfg {", 0), 0u);
    EXPECT_EQ(ipdg::to_dot(a->ipdg, a->model).rfind("digraph ipdg {", 0), 0u);
}

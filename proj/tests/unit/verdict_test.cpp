// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include "../support/corpus.hpp"
#include "../support/replay.hpp"

#include <rescan/symexec/engine.hpp>

#include <gtest/gtest.h>

using namespace rescan;

namespace
{
struct Verified
{
    slicer::Warning warning;
    symexec::Verdict verdict;
    symexec::Targets targets;
};

class VerdictSoundness : public ::testing::TestWithParam<std::string>
{
};

TEST_P(VerdictSoundness, confirmed_replay_and_unreachable_resist_grid)
{
    // Unpruned Stage I: every interaction reachable from a public function,
    // so safe fixtures contribute unreachable verdicts too.
    const auto a = test::analyze_source(GetParam(), true);
    const auto s1 = slicer::run_stage_one(a->icfg, a->ipdg, {}, false);
    if (s1.warnings.empty())
        GTEST_SKIP() << "no interactions";
    const symexec::Program program{a->model};
    const auto solver = symexec::make_z3_backend();
    for (const auto& w : s1.warnings)
    {
        symexec::Engine engine{program, *solver};
        const auto v = engine.verify(w);
        const auto targets = program.locate_warning_targets(w);
        SCOPED_TRACE(w.function + " line " + std::to_string(w.span.line) + " " +
                     std::string{symexec::to_string(v.status)});
        EXPECT_TRUE(v.status == symexec::VerdictStatus::confirmed || v.status == symexec::VerdictStatus::unreachable)
            << v.reason;
        if (v.status == symexec::VerdictStatus::confirmed)
        {
            ASSERT_TRUE(v.witness);
            const auto r = test::replay(*v.witness);
            EXPECT_TRUE(r.ok(v.witness->reentry.has_value())) << r.detail;
        }
        if (v.status == symexec::VerdictStatus::unreachable)
        {
            const auto g = test::grid_search(program, w, targets);
            EXPECT_GT(g.runs, 0u);
            EXPECT_FALSE(g.counterexample) << *g.counterexample;
        }
    }
}

INSTANTIATE_TEST_SUITE_P(corpus, VerdictSoundness, ::testing::ValuesIn(test::corpus_files()),
    [](const auto& info) { return info.param.substr(0, info.param.size() - 4); });
}  // namespace

TEST(grid_search, finds_known_reentrancy)
{
    for (const auto& [file, line] : {std::pair{"bank_vulnerable.sol", 0}, {"two_contract_withdraw.sol", 6}})
    {
        const auto a = test::analyze_source(file, true);
        const auto s1 = slicer::run_stage_one(a->icfg, a->ipdg);
        const symexec::Program program{a->model};
        bool checked = false;
        for (const auto& w : s1.warnings)
        {
            if (line != 0 && w.span.line != static_cast<std::size_t>(line))
                continue;
            const auto g = test::grid_search(program, w, program.locate_warning_targets(w));
            EXPECT_TRUE(g.counterexample) << file << " runs=" << g.runs;
            checked = true;
        }
        EXPECT_TRUE(checked) << file;
    }
}

TEST(replay, tampered_witness_fails)
{
    const auto a = test::analyze_source("bank_vulnerable.sol", true);
    const auto s1 = slicer::run_stage_one(a->icfg, a->ipdg);
    ASSERT_FALSE(s1.warnings.empty());
    const symexec::Program program{a->model};
    const auto solver = symexec::make_z3_backend();
    symexec::Engine engine{program, *solver};
    const auto v = engine.verify(s1.warnings.front());
    ASSERT_EQ(v.status, symexec::VerdictStatus::confirmed);
    ASSERT_TRUE(v.witness);
    ASSERT_TRUE(test::replay(*v.witness).ok(true));

    auto wrong_target = *v.witness;
    wrong_target.attacker += 1;
    EXPECT_FALSE(test::replay(wrong_target).ok(true));

    auto emptied = *v.witness;
    for (auto& acct : emptied.accounts)
        acct.storage.clear();
    EXPECT_FALSE(test::replay(emptied).ok(true));
}

TEST(replay, witness_json_has_transactions)
{
    const auto a = test::analyze_source("two_contract_withdraw.sol", true);
    const auto s1 = slicer::run_stage_one(a->icfg, a->ipdg);
    const symexec::Program program{a->model};
    const auto solver = symexec::make_z3_backend();
    for (const auto& w : s1.warnings)
    {
        if (w.span.line != 6)
            continue;
        symexec::Engine engine{program, *solver};
        const auto v = engine.verify(w);
        ASSERT_EQ(v.status, symexec::VerdictStatus::confirmed);
        const auto j = symexec::to_json(*v.witness);
        EXPECT_TRUE(j.contains("first"));
        EXPECT_TRUE(j.contains("reentry"));
        EXPECT_EQ(j["first"]["calldata"].get<std::string>().substr(0, 10), "0xf3fef3a3");
    }
}

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include "../support/toy_evm.hpp"

#include <rescan/evm/keccak.hpp>
#include <rescan/symexec/solver.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace rescan;
using namespace rescan::symexec;

namespace
{
struct OpCode
{
    Op op;
    uint8_t opcode;
    std::size_t arity;
};

const std::vector<OpCode> arithmetic{
    {Op::add, 0x01, 2}, {Op::mul, 0x02, 2}, {Op::sub, 0x03, 2}, {Op::div, 0x04, 2}, {Op::sdiv, 0x05, 2},
    {Op::mod, 0x06, 2}, {Op::smod, 0x07, 2}, {Op::addmod, 0x08, 3}, {Op::mulmod, 0x09, 3}, {Op::exp, 0x0a, 2},
    {Op::signextend, 0x0b, 2}, {Op::lt, 0x10, 2}, {Op::gt, 0x11, 2}, {Op::slt, 0x12, 2}, {Op::sgt, 0x13, 2},
    {Op::eq, 0x14, 2}, {Op::iszero, 0x15, 1}, {Op::and_, 0x16, 2}, {Op::or_, 0x17, 2}, {Op::xor_, 0x18, 2},
    {Op::not_, 0x19, 1}, {Op::byte_at, 0x1a, 2}, {Op::shl, 0x1b, 2}, {Op::shr, 0x1c, 2}, {Op::sar, 0x1d, 2},
};

word random_word(std::mt19937_64& rng)
{
    static const std::vector<word> edges{0, 1, 2, 31, 32, 255, 256, word{1} << 255, (word{1} << 255) - 1,
        ~word{0}, ~word{0} - 1};
    switch (rng() % 4)
    {
    case 0: return edges[rng() % edges.size()];
    case 1: return rng() % 300;
    default:
    {
        word w = 0;
        for (int i = 0; i < 4; ++i)
            w = (w << 64) | rng();
        return w;
    }
    }
}

/// Executes one opcode on the reference interpreter: operands pushed so that
/// args[0] is on top, result returned as one word.
word run_opcode(uint8_t opcode, const std::vector<word>& args)
{
    bytes code;
    for (auto it = args.rbegin(); it != args.rend(); ++it)
    {
        code.push_back(0x7f);
        const auto b = store_word(*it);
        code.insert(code.end(), b.begin(), b.end());
    }
    code.insert(code.end(), {opcode, 0x60, 0x00, 0x52, 0x60, 0x20, 0x60, 0x00, 0xf3});
    test::World world;
    world.accounts[0x1000].code = code;
    const auto r = world.transact({0x2000, 0x1000, 0, {}});
    EXPECT_TRUE(r.success);
    return load_word(std::span<const uint8_t>{r.output.data(), 32});
}

bool holds(const std::vector<Term>& cs, const Assignment& m)
{
    return std::all_of(cs.begin(), cs.end(), [&](Term t) { return evaluate(t, m) != 0; });
}
}  // namespace

TEST(term, fold_matches_reference_interpreter)
{
    std::mt19937_64 rng{7};
    for (const auto& oc : arithmetic)
        for (int i = 0; i < 60; ++i)
        {
            std::vector<word> args;
            for (std::size_t k = 0; k < oc.arity; ++k)
                args.push_back(random_word(rng));
            EXPECT_EQ(fold(oc.op, args), run_opcode(oc.opcode, args)) << to_string(oc.op) << " #" << i;
        }
}

TEST(term, arena_folds_constants_and_interns)
{
    TermArena t;
    const auto x = t.var("x");
    EXPECT_EQ(t.add(x, t.constant(0)), x);
    EXPECT_EQ(t.add(t.constant(2), t.constant(3)), t.constant(5));
    EXPECT_EQ(t.eq(x, x), t.constant(1));
    EXPECT_EQ(t.add(x, t.constant(1)), t.add(x, t.constant(1)));
}

TEST(term, simplifier_preserves_meaning)
{
    // Random expression trees: the arena's simplified term must evaluate like
    // the plain fold of the unsimplified tree.
    std::mt19937_64 rng{11};
    TermArena t;
    const std::vector<std::string> names{"a", "b", "c"};
    struct Built
    {
        Term term;
        std::function<word(const Assignment&)> eval;
    };
    std::function<Built(int)> build = [&](int depth) -> Built {
        if (depth == 0 || rng() % 4 == 0)
        {
            if (rng() % 2)
            {
                const auto v = random_word(rng);
                return {t.constant(v), [v](const Assignment&) { return v; }};
            }
            const auto n = names[rng() % names.size()];
            return {t.var(n), [n](const Assignment& m) { return m.at(n); }};
        }
        const auto& oc = arithmetic[rng() % arithmetic.size()];
        std::vector<Built> kids;
        for (std::size_t k = 0; k < oc.arity; ++k)
            kids.push_back(build(depth - 1));
        std::vector<Term> terms;
        for (const auto& k : kids)
            terms.push_back(k.term);
        const auto op = oc.op;
        return {t.apply(op, terms), [kids, op](const Assignment& m) {
                    std::vector<word> vals;
                    for (const auto& k : kids)
                        vals.push_back(k.eval(m));
                    return fold(op, vals);
                }};
    };
    for (int i = 0; i < 400; ++i)
    {
        const auto e = build(4);
        for (int j = 0; j < 5; ++j)
        {
            const Assignment m{{"a", random_word(rng)}, {"b", random_word(rng)}, {"c", random_word(rng)}};
            ASSERT_EQ(evaluate(e.term, m), e.eval(m)) << to_string(e.term);
        }
    }
}

TEST(term, selector_extraction_folds)
{
    // shr(224, concat(bytes of calldata word)) with a constant selector prefix.
    TermArena t;
    std::vector<Term> bytes_;
    for (const uint8_t b : {0xf3, 0xfe, 0xf3, 0xa3})
        bytes_.push_back(t.constant(b));
    const auto arg = t.var("cd1_0");
    for (unsigned i = 0; i < 28; ++i)
        bytes_.push_back(t.byte_of(arg, i));
    const auto w = t.apply(Op::concat, bytes_);
    EXPECT_EQ(t.apply(Op::shr, {t.constant(224), w}), t.constant(0xf3fef3a3));
}

TEST(term, keccak_of_constants_folds)
{
    TermArena t;
    const auto h = t.keccak({t.constant(5), t.constant(0)}, 64);
    ASSERT_TRUE(h->is_const());
    bytes data(64, 0);
    data[31] = 5;
    EXPECT_EQ(h->value, keccak256_word(data));
}

class Solvers : public ::testing::Test
{
protected:
    static std::unique_ptr<SolverBackend> smtlib()
    {
        for (const char* p : {"/usr/local/bin/z3", "/usr/bin/z3"})
            if (std::filesystem::exists(p))
                return make_smtlib_backend(p, {"-in", "-smt2"});
        return nullptr;
    }
};

TEST_F(Solvers, contradictory_bounds_are_unsat)
{
    TermArena t;
    const auto x = t.var("x");
    const std::vector<Term> cs{t.apply(Op::gt, {x, t.constant(5)}), t.lt(x, t.constant(3))};
    const auto z3 = make_z3_backend();
    EXPECT_EQ(z3->check(cs, std::chrono::seconds{10}).status, SatStatus::unsatisfiable);
    if (auto s = smtlib())
        EXPECT_EQ(s->check(cs, std::chrono::seconds{10}).status, SatStatus::unsatisfiable);
}

TEST_F(Solvers, balance_covers_amount_is_sat_with_valid_model)
{
    TermArena t;
    const auto balance = t.var("balance", 128);
    const auto amount = t.var("amount");
    const std::vector<Term> cs{t.iszero(t.lt(balance, amount)), t.apply(Op::gt, {amount, t.constant(1000)})};
    const auto z3 = make_z3_backend();
    const auto r = z3->check(cs, std::chrono::seconds{10});
    ASSERT_EQ(r.status, SatStatus::satisfiable);
    EXPECT_TRUE(holds(cs, r.model));
    EXPECT_LT(r.model.at("balance"), word{1} << 128);
}

TEST_F(Solvers, backends_agree)
{
    auto other = smtlib();
    if (!other)
        GTEST_SKIP() << "no z3 executable for the SMT-LIB backend";
    const auto z3 = make_z3_backend();
    std::mt19937_64 rng{3};
    TermArena t;
    const std::vector<Term> vars{t.var("p"), t.var("q", 64), t.var("r", 8)};
    for (int i = 0; i < 40; ++i)
    {
        std::vector<Term> cs;
        for (int k = 0; k < 3; ++k)
        {
            const auto a = vars[rng() % vars.size()];
            const auto b = rng() % 2 ? vars[rng() % vars.size()] : t.constant(rng() % 500);
            const std::vector<Op> rel{Op::lt, Op::gt, Op::eq};
            const std::vector<Op> arith{Op::add, Op::sub, Op::mul, Op::and_};
            const auto lhs = t.apply(arith[rng() % arith.size()], {a, t.constant(rng() % 50)});
            auto c = t.apply(rel[rng() % rel.size()], {lhs, b});
            if (rng() % 3 == 0)
                c = t.iszero(c);
            cs.push_back(c);
        }
        const auto r1 = z3->check(cs, std::chrono::seconds{10});
        const auto r2 = other->check(cs, std::chrono::seconds{10});
        ASSERT_EQ(r1.status, r2.status) << i;
        if (r1.status == SatStatus::satisfiable)
        {
            EXPECT_TRUE(holds(cs, r1.model)) << i;
            EXPECT_TRUE(holds(cs, r2.model)) << i;
        }
    }
}

TEST_F(Solvers, keccak_is_injective_on_distinct_inputs)
{
    TermArena t;
    const auto x = t.var("x");
    const auto y = t.var("y");
    const std::vector<Term> cs{t.eq(t.keccak({x}, 32), t.keccak({y}, 32)), t.iszero(t.eq(x, y))};
    EXPECT_NE(make_z3_backend()->check(cs, std::chrono::seconds{10}).status, SatStatus::satisfiable);
}

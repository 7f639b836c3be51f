// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include "dispatcher_gen.hpp"

#include "asm.hpp"

#include <random>

namespace rescan::test
{
namespace
{
constexpr uint8_t ADD = 0x01, MUL = 0x02, EQ = 0x14, POP = 0x50, JUMP = 0x56, JUMPI = 0x57,
                  STOP = 0x00, REVERT = 0xfd, DUP1 = 0x80, SHR = 0x1c, CALLDATALOAD = 0x35,
                  SSTORE = 0x55, SLOAD = 0x54, SWAP1 = 0x90;

class Generator
{
public:
    explicit Generator(unsigned seed) : rng_{seed} {}

    DispatcherProgram run()
    {
        const auto n_funcs = pick(2, 5);
        const auto n_helpers = pick(1, 4);
        // Helper h may call helpers > h only, so the call graph is acyclic.
        for (unsigned h = 0; h < n_helpers; ++h)
            helper_arity_.push_back(pick(0, 1));

        DispatcherProgram prog;
        std::set<uint32_t> used;
        while (prog.selectors.size() < n_funcs)
        {
            const auto s = static_cast<uint32_t>(rng_());
            if (s != 0xffffffff && used.insert(s).second)
                prog.selectors.push_back(s);
        }

        a_.push(0).op(CALLDATALOAD).push(0xe0).op(SHR);
        for (unsigned f = 0; f < n_funcs; ++f)
            a_.op(DUP1).push(prog.selectors[f], 4).op(EQ).push_label(fn(f)).op(JUMPI);
        a_.push(0).op(DUP1).op(REVERT);

        // Every helper must be called at least once to keep all blocks live.
        std::vector<std::vector<unsigned>> calls(n_funcs);
        for (unsigned h = 0; h < n_helpers; ++h)
            calls[pick(0, n_funcs - 1)].push_back(h);
        for (auto& c : calls)
            for (auto extra = pick(0, 2); extra > 0; --extra)
                c.push_back(pick(0, n_helpers - 1));

        for (unsigned f = 0; f < n_funcs; ++f)
        {
            a_.label(fn(f));
            work();
            for (const auto h : calls[f])
            {
                call(h);
                if (coin())
                    branch();
            }
            if (calls[f].empty() || coin())
                branch();
            a_.op(STOP);
        }

        for (unsigned h = 0; h < n_helpers; ++h)
        {
            a_.label(helper(h));
            if (helper_arity_[h] == 1)
                a_.push(pick(1, 200)).op(ADD).push(pick(0, 3)).op(SSTORE);
            work();
            if (h + 1 < n_helpers && coin())
                call(pick(h + 1, n_helpers - 1));
            work();
            a_.op(JUMP);
            ++prog.orphan_jumps;
        }
        prog.code = a_.build();
        return prog;
    }

private:
    unsigned pick(unsigned lo, unsigned hi)
    {
        return std::uniform_int_distribution<unsigned>{lo, hi}(rng_);
    }
    bool coin() { return pick(0, 1) == 1; }

    static std::string fn(unsigned f) { return "fn" + std::to_string(f); }
    static std::string helper(unsigned h) { return "helper" + std::to_string(h); }

    void work()
    {
        switch (pick(0, 3))
        {
        case 0:
            break;
        case 1:
            a_.push(pick(0, 255)).push(pick(0, 255)).op(ADD).op(POP);
            break;
        case 2:
            a_.push(pick(0, 3)).op(SLOAD).push(pick(2, 9)).op(MUL).push(pick(0, 3)).op(SSTORE);
            break;
        default:
            a_.push(pick(0, 255)).push(pick(0, 255)).op(SWAP1).op(POP).op(POP);
            break;
        }
    }

    void call(unsigned h)
    {
        const auto ret = "ret" + std::to_string(next_label_++);
        a_.push_label(ret);
        if (helper_arity_[h] == 1)
            a_.push(pick(0, 255));
        a_.push_label(helper(h)).op(JUMP).label(ret);
    }

    /// Two-way branch on the first argument; both arms rejoin.
    void branch()
    {
        const auto id = std::to_string(next_label_++);
        a_.push(4).op(CALLDATALOAD).push_label("taken" + id).op(JUMPI);
        work();
        a_.push_label("join" + id).op(JUMP);
        a_.label("taken" + id);
        work();
        a_.label("join" + id);
    }

    std::mt19937 rng_;
    Assembler a_;
    std::vector<unsigned> helper_arity_;
    unsigned next_label_ = 0;
};
}  // namespace

DispatcherProgram generate_dispatcher(unsigned seed)
{
    return Generator{seed}.run();
}

std::set<bytecode::Edge> observe_edges(
    const bytecode::Cfg& cfg, const bytes& code, const std::vector<uint32_t>& selectors)
{
    using bytecode::EdgeKind;
    const word self = 0xa11ce;
    std::set<bytecode::Edge> seen;

    auto record = [&](std::size_t from_pc, uint8_t from_op, std::size_t to_pc) {
        const auto a = cfg.block_containing(from_pc);
        const auto b = cfg.block_at(to_pc);
        if (!a || !b)
            return;
        const auto& block = cfg.block(*a);
        if (from_pc != block.last().offset)
            return;
        EdgeKind kind = EdgeKind::sequential;
        if (from_op == JUMP)
            kind = EdgeKind::jump;
        else if (from_op == JUMPI)
            kind = to_pc == block.end_offset() ? EdgeKind::branch_fallthrough :
                                                 EdgeKind::branch_taken;
        seen.insert({*a, *b, kind});
    };

    auto inputs = selectors;
    inputs.push_back(0xffffffff);
    for (const auto sel : inputs)
    {
        for (const word arg : {word{0}, word{1}})
        {
            World world;
            world.accounts[self].code = code;
            std::optional<std::pair<std::size_t, uint8_t>> prev;
            world.on_step = [&](const Step& s) {
                if (prev)
                    record(prev->first, prev->second, s.pc);
                prev = {s.pc, s.opcode};
            };
            Message msg;
            msg.caller = 0xca11e7;
            msg.address = self;
            msg.input = abi_call(sel, {arg});
            world.transact(msg);
        }
    }
    return seen;
}

}  // namespace rescan::test

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/recovery/ssa.hpp>

namespace rescan::recovery
{
using namespace evm;

namespace
{
word exp_mod(word base, word exponent) noexcept
{
    word result = 1;
    while (exponent != 0)
    {
        if (bit_test(exponent, 0))
            result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

/// a is the top operand, b the second, as popped.
std::optional<word> fold(uint8_t op, const std::vector<word>& args)
{
    const auto& a = args[0];
    switch (op)
    {
    case OP_NOT:
        return ~a;
    case OP_ADD:
        return a + args[1];
    case OP_SUB:
        return a - args[1];
    case OP_MUL:
        return a * args[1];
    case OP_DIV:
        return args[1] == 0 ? word{0} : a / args[1];
    case OP_EXP:
        return exp_mod(a, args[1]);
    case OP_AND:
        return a & args[1];
    case OP_OR:
        return a | args[1];
    case OP_XOR:
        return a ^ args[1];
    case OP_SHL:
        return a >= 256 ? word{0} : word{args[1] << static_cast<unsigned>(a)};
    case OP_SHR:
        return a >= 256 ? word{0} : word{args[1] >> static_cast<unsigned>(a)};
    default:
        return std::nullopt;
    }
}

class Builder
{
public:
    explicit Builder(BlockId id) { ssa_.block_id = id; }

    ValueId define(std::variant<Constant, StackInput, Computed> origin)
    {
        const auto id = ssa_.values.size();
        ssa_.values.push_back({id, ssa_.block_id, std::move(origin), false});
        return id;
    }

    void ensure(std::size_t n)
    {
        while (stack_.size() < n)
        {
            const auto v = define(StackInput{ssa_.inputs_materialised++});
            stack_.insert(stack_.begin(), v);
        }
    }

    ValueId pop()
    {
        ensure(1);
        const auto v = stack_.back();
        stack_.pop_back();
        ssa_.values[v].used = true;
        return v;
    }

    void push(ValueId v) { stack_.push_back(v); }

    void step(const bytecode::Instruction& instr)
    {
        const auto op = instr.opcode;
        if (is_push(op))
        {
            push(define(Constant{instr.push_value()}));
            return;
        }
        if (is_dup(op))
        {
            const auto n = static_cast<std::size_t>(op - OP_DUP1 + 1);
            ensure(n);
            const auto src = stack_[stack_.size() - n];
            ssa_.values[src].used = true;
            const auto c = ssa_.values[src].constant();
            push(c ? define(Constant{*c}) : define(Computed{op, {src}}));
            return;
        }
        if (is_swap(op))
        {
            const auto n = static_cast<std::size_t>(op - OP_SWAP1 + 1);
            ensure(n + 1);
            std::swap(stack_.back(), stack_[stack_.size() - 1 - n]);
            return;
        }
        if (op == OP_JUMP || op == OP_JUMPI)
        {
            ssa_.jump_target = pop();
            if (op == OP_JUMPI)
                pop();
            return;
        }

        const auto& meta = info(op);
        std::vector<ValueId> operands;
        operands.reserve(meta.stack_in);
        for (unsigned i = 0; i < meta.stack_in; ++i)
            operands.push_back(pop());
        if (meta.stack_out == 0)
            return;

        std::vector<word> constants;
        for (const auto v : operands)
        {
            const auto c = ssa_.values[v].constant();
            if (!c)
                break;
            constants.push_back(*c);
        }
        if (constants.size() == operands.size() && !operands.empty())
        {
            if (const auto folded = fold(op, constants))
            {
                push(define(Constant{*folded}));
                return;
            }
        }
        push(define(Computed{op, std::move(operands)}));
    }

    SsaBlock finish()
    {
        ssa_.exit_stack = stack_;
        return std::move(ssa_);
    }

private:
    SsaBlock ssa_;
    std::vector<ValueId> stack_;
};
}  // namespace

std::variant<ValueId, StackInput> SsaBlock::at_exit_depth(std::size_t depth) const
{
    if (depth < exit_stack.size())
        return exit_stack[exit_stack.size() - 1 - depth];
    return StackInput{depth - exit_stack.size() + inputs_materialised};
}

SsaBlock to_ssa(const bytecode::BasicBlock& block)
{
    Builder b{block.id};
    for (const auto& instr : block.instructions)
        b.step(instr);
    return b.finish();
}

SsaMap to_ssa(const bytecode::Cfg& cfg)
{
    SsaMap out;
    for (const auto& b : cfg.blocks())
        out.emplace(b.id, to_ssa(b));
    return out;
}
}  // namespace rescan::recovery

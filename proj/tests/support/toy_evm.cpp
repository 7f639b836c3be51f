// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include "toy_evm.hpp"

#include <rescan/evm/keccak.hpp>

#include <stdexcept>

namespace rescan::test
{
namespace
{
struct Halt
{
    bool success;
    bytes output;
};

struct Fault
{};

bool negative(const word& w)
{
    return bit_test(w, 255);
}

word neg(const word& w)
{
    return ~w + 1;
}

word sdiv(const word& a, const word& b)
{
    if (b == 0)
        return 0;
    const auto ua = negative(a) ? neg(a) : a;
    const auto ub = negative(b) ? neg(b) : b;
    const word q = ua / ub;
    return negative(a) != negative(b) ? neg(q) : q;
}

word smod(const word& a, const word& b)
{
    if (b == 0)
        return 0;
    const auto ua = negative(a) ? neg(a) : a;
    const auto ub = negative(b) ? neg(b) : b;
    const word r = ua % ub;
    return negative(a) ? neg(r) : r;
}

bool slt(const word& a, const word& b)
{
    if (negative(a) != negative(b))
        return negative(a);
    return a < b;
}

word sar(const word& shift, const word& v)
{
    const bool n = negative(v);
    if (shift >= 256)
        return n ? ~word{0} : word{0};
    const auto s = static_cast<unsigned>(shift);
    word r = v >> s;
    if (n && s > 0)
        r |= ~word{0} << (256 - s);
    return r;
}

word signextend(const word& b, const word& x)
{
    if (b >= 31)
        return x;
    const auto bit = static_cast<unsigned>(b) * 8 + 7;
    const word mask = (word{1} << bit) - 1;
    return bit_test(x, bit) ? (x | ~mask) : (x & mask);
}

word power(word base, word e)
{
    word r = 1;
    while (e != 0)
    {
        if (bit_test(e, 0))
            r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}

using wide = boost::multiprecision::uint512_t;

std::size_t to_size(const word& w)
{
    if (w > word{1} << 32)
        throw Fault{};
    return static_cast<std::size_t>(w);
}
}  // namespace

class Frame
{
public:
    Frame(World& world, const Message& msg, const bytes& code)
      : world_{world}, msg_{msg}, code_{code}
    {
        for (std::size_t pc = 0; pc < code_.size(); ++pc)
        {
            if (code_[pc] == 0x5b)
                jumpdests_.insert(pc);
            else if (code_[pc] >= 0x60 && code_[pc] <= 0x7f)
                pc += code_[pc] - 0x5f;
        }
    }

    Halt run()
    {
        try
        {
            for (;;)
                step();
        }
        catch (Halt& h)
        {
            return std::move(h);
        }
        catch (const Fault&)
        {
            return {false, {}};
        }
    }

private:
    word pop()
    {
        if (stack_.empty())
            throw Fault{};
        auto v = stack_.back();
        stack_.pop_back();
        return v;
    }

    void push(const word& v)
    {
        if (stack_.size() >= 1024)
            throw Fault{};
        stack_.push_back(v);
    }

    void expand(std::size_t offset, std::size_t size)
    {
        if (size == 0)
            return;
        const auto end = offset + size;
        if (end > (1u << 24))
            throw Fault{};
        if (memory_.size() < end)
            memory_.resize((end + 31) / 32 * 32);
    }

    bytes read_memory(const word& off, const word& len)
    {
        const auto n = to_size(len);
        if (n == 0)
            return {};
        const auto o = to_size(off);
        expand(o, n);
        return {memory_.begin() + static_cast<std::ptrdiff_t>(o),
            memory_.begin() + static_cast<std::ptrdiff_t>(o + n)};
    }

    void write_memory(std::size_t off, bytes_view data)
    {
        expand(off, data.size());
        std::copy(data.begin(), data.end(), memory_.begin() + static_cast<std::ptrdiff_t>(off));
    }

    /// Copies `len` bytes of `src` starting at `src_off` into memory, zero-padding.
    void copy_padded(const word& mem_off, const word& src_off, const word& len, bytes_view src)
    {
        const auto n = to_size(len);
        if (n == 0)
            return;
        const auto mo = to_size(mem_off);
        expand(mo, n);
        for (std::size_t i = 0; i < n; ++i)
        {
            const word idx = src_off + i;
            memory_[mo + i] = idx < src.size() ? src[static_cast<std::size_t>(idx)] : 0;
        }
    }

    Account& self() { return world_.accounts[msg_.address]; }

    void jump(const word& target)
    {
        if (target >= code_.size() || !jumpdests_.contains(static_cast<std::size_t>(target)))
            throw Fault{};
        pc_ = static_cast<std::size_t>(target);
    }

    void do_call(uint8_t op)
    {
        pop();  // gas
        const auto to = pop() & ((word{1} << 160) - 1);
        const word value = (op == 0xf1 || op == 0xf2) ? pop() : word{0};
        const auto in_off = pop(), in_len = pop(), out_off = pop(), out_len = pop();
        const auto input = read_memory(in_off, in_len);
        const auto out_n = to_size(out_len);
        if (out_n != 0)
            expand(to_size(out_off), out_n);

        if (op == 0xf1 && value != 0 && msg_.is_static)
            throw Fault{};

        Message sub;
        sub.depth = msg_.depth + 1;
        sub.input = input;
        sub.is_static = msg_.is_static || op == 0xfa;
        if (op == 0xf4)
        {
            sub.caller = msg_.caller;
            sub.address = msg_.address;
            sub.value = msg_.value;
        }
        else
        {
            sub.caller = msg_.address;
            sub.address = op == 0xf2 ? msg_.address : to;
            sub.value = value;
        }

        CallResult r;
        if (sub.depth > 1024 || (value != 0 && self().balance < value))
            r = {false, {}};
        else if (op == 0xf4 || op == 0xf2)
        {
            const auto code = world_.accounts[to].code;
            r = world_.call_with_code(sub, code);
        }
        else
            r = world_.call(sub);

        returndata_ = r.output;
        const auto copy = std::min(out_n, r.output.size());
        if (copy != 0)
            write_memory(to_size(out_off), bytes_view{r.output}.first(copy));
        push(r.success ? 1 : 0);
    }

    void step()
    {
        if (++world_.steps_ > world_.step_limit)
            throw Fault{};
        if (pc_ >= code_.size())
            throw Halt{true, {}};
        const auto op = code_[pc_];
        if (world_.on_step)
            world_.on_step(Step{msg_.depth, msg_.address, pc_, op, stack_});

        std::size_t next = pc_ + 1;
        switch (op)
        {
        case 0x00:
            throw Halt{true, {}};
        case 0x01: { auto a = pop(), b = pop(); push(a + b); break; }
        case 0x02: { auto a = pop(), b = pop(); push(a * b); break; }
        case 0x03: { auto a = pop(), b = pop(); push(a - b); break; }
        case 0x04: { auto a = pop(), b = pop(); push(b == 0 ? word{0} : word{a / b}); break; }
        case 0x05: { auto a = pop(), b = pop(); push(sdiv(a, b)); break; }
        case 0x06: { auto a = pop(), b = pop(); push(b == 0 ? word{0} : word{a % b}); break; }
        case 0x07: { auto a = pop(), b = pop(); push(smod(a, b)); break; }
        case 0x08:
        {
            wide a{pop()}, b{pop()}, n{pop()};
            push(n == 0 ? word{0} : word{(a + b) % n});
            break;
        }
        case 0x09:
        {
            wide a{pop()}, b{pop()}, n{pop()};
            push(n == 0 ? word{0} : word{(a * b) % n});
            break;
        }
        case 0x0a: { auto a = pop(), b = pop(); push(power(a, b)); break; }
        case 0x0b: { auto b = pop(), x = pop(); push(signextend(b, x)); break; }
        case 0x10: { auto a = pop(), b = pop(); push(a < b ? 1 : 0); break; }
        case 0x11: { auto a = pop(), b = pop(); push(a > b ? 1 : 0); break; }
        case 0x12: { auto a = pop(), b = pop(); push(slt(a, b) ? 1 : 0); break; }
        case 0x13: { auto a = pop(), b = pop(); push(slt(b, a) ? 1 : 0); break; }
        case 0x14: { auto a = pop(), b = pop(); push(a == b ? 1 : 0); break; }
        case 0x15: push(pop() == 0 ? 1 : 0); break;
        case 0x16: { auto a = pop(), b = pop(); push(a & b); break; }
        case 0x17: { auto a = pop(), b = pop(); push(a | b); break; }
        case 0x18: { auto a = pop(), b = pop(); push(a ^ b); break; }
        case 0x19: push(~pop()); break;
        case 0x1a:
        {
            auto i = pop(), x = pop();
            push(i >= 32 ? word{0} : word{(x >> (8 * (31 - static_cast<unsigned>(i)))) & 0xff});
            break;
        }
        case 0x1b:
        {
            auto s = pop(), v = pop();
            push(s >= 256 ? word{0} : word{v << static_cast<unsigned>(s)});
            break;
        }
        case 0x1c:
        {
            auto s = pop(), v = pop();
            push(s >= 256 ? word{0} : word{v >> static_cast<unsigned>(s)});
            break;
        }
        case 0x1d: { auto s = pop(), v = pop(); push(sar(s, v)); break; }
        case 0x20:
        {
            auto off = pop(), len = pop();
            push(keccak256_word(read_memory(off, len)));
            break;
        }
        case 0x30: push(msg_.address); break;
        case 0x31: push(world_.accounts[pop() & ((word{1} << 160) - 1)].balance); break;
        case 0x32: push(world_.origin); break;
        case 0x33: push(msg_.caller); break;
        case 0x34: push(msg_.value); break;
        case 0x35:
        {
            const auto off = pop();
            bytes32 buf{};
            for (std::size_t i = 0; i < 32; ++i)
            {
                const word idx = off + i;
                buf[i] = idx < msg_.input.size() ? msg_.input[static_cast<std::size_t>(idx)] : 0;
            }
            push(load_word(buf));
            break;
        }
        case 0x36: push(msg_.input.size()); break;
        case 0x37: { auto m = pop(), s = pop(), l = pop(); copy_padded(m, s, l, msg_.input); break; }
        case 0x38: push(code_.size()); break;
        case 0x39: { auto m = pop(), s = pop(), l = pop(); copy_padded(m, s, l, code_); break; }
        case 0x3a: push(world_.env.gasprice); break;
        case 0x3b:
        {
            const auto a = pop() & ((word{1} << 160) - 1);
            if (const auto it = world_.extcodesize_override.find(a);
                it != world_.extcodesize_override.end())
                push(it->second);
            else
            {
                const auto acc = world_.accounts.find(a);
                push(acc == world_.accounts.end() ? 0 : acc->second.code.size());
            }
            break;
        }
        case 0x3c:
        {
            const auto a = pop() & ((word{1} << 160) - 1);
            auto m = pop(), s = pop(), l = pop();
            copy_padded(m, s, l, world_.accounts[a].code);
            break;
        }
        case 0x3d: push(returndata_.size()); break;
        case 0x3e:
        {
            auto m = pop(), s = pop(), l = pop();
            if (s + l > returndata_.size())
                throw Fault{};
            copy_padded(m, s, l, returndata_);
            break;
        }
        case 0x3f:
        {
            const auto a = pop() & ((word{1} << 160) - 1);
            const auto acc = world_.accounts.find(a);
            push(acc == world_.accounts.end() ? word{0} : keccak256_word(acc->second.code));
            break;
        }
        case 0x40: pop(); push(0); break;
        case 0x41: push(world_.env.coinbase); break;
        case 0x42: push(world_.env.timestamp); break;
        case 0x43: push(world_.env.number); break;
        case 0x44: push(world_.env.prevrandao); break;
        case 0x45: push(world_.env.gaslimit); break;
        case 0x46: push(world_.env.chainid); break;
        case 0x47: push(self().balance); break;
        case 0x48: push(world_.env.basefee); break;
        case 0x49: pop(); push(0); break;
        case 0x4a: push(1); break;
        case 0x50: pop(); break;
        case 0x51:
        {
            const auto off = to_size(pop());
            expand(off, 32);
            push(load_word(bytes_view{memory_}.subspan(off, 32)));
            break;
        }
        case 0x52:
        {
            const auto off = to_size(pop());
            const auto v = store_word(pop());
            write_memory(off, v);
            break;
        }
        case 0x53:
        {
            const auto off = to_size(pop());
            const uint8_t b = static_cast<uint8_t>(pop() & 0xff);
            write_memory(off, bytes_view{&b, 1});
            break;
        }
        case 0x54:
        {
            const auto& st = self().storage;
            const auto it = st.find(pop());
            push(it == st.end() ? word{0} : it->second);
            break;
        }
        case 0x55:
        {
            if (msg_.is_static)
                throw Fault{};
            auto k = pop(), v = pop();
            self().storage[k] = v;
            break;
        }
        case 0x56: jump(pop()); next = pc_; break;
        case 0x57:
        {
            auto target = pop(), cond = pop();
            if (cond != 0)
            {
                jump(target);
                next = pc_;
            }
            break;
        }
        case 0x58: push(pc_); break;
        case 0x59: push(memory_.size()); break;
        case 0x5a: push(1'000'000'000); break;
        case 0x5b: break;
        case 0x5c: push(world_.transient_[{msg_.address, pop()}]); break;
        case 0x5d:
        {
            if (msg_.is_static)
                throw Fault{};
            auto k = pop(), v = pop();
            world_.transient_[{msg_.address, k}] = v;
            break;
        }
        case 0x5e:
        {
            auto d = to_size(pop()), s = to_size(pop()), l = to_size(pop());
            if (l != 0)
            {
                expand(std::max(d, s), l);
                const bytes tmp(memory_.begin() + static_cast<std::ptrdiff_t>(s),
                    memory_.begin() + static_cast<std::ptrdiff_t>(s + l));
                write_memory(d, tmp);
            }
            break;
        }
        case 0xa0:
        case 0xa1:
        case 0xa2:
        case 0xa3:
        case 0xa4:
            if (msg_.is_static)
                throw Fault{};
            pop();
            pop();
            for (int i = 0; i < op - 0xa0; ++i)
                pop();
            break;
        case 0xf1:
        case 0xf2:
        case 0xf4:
        case 0xfa:
            do_call(op);
            break;
        case 0xf3:
        {
            auto off = pop(), len = pop();
            throw Halt{true, read_memory(off, len)};
        }
        case 0xfd:
        {
            auto off = pop(), len = pop();
            throw Halt{false, read_memory(off, len)};
        }
        case 0xff:
        {
            const auto to = pop() & ((word{1} << 160) - 1);
            auto& me = self();
            world_.accounts[to].balance += me.balance;
            me.balance = 0;
            throw Halt{true, {}};
        }
        default:
            if (op >= 0x5f && op <= 0x7f)
            {
                const std::size_t n = op - 0x5f;
                word v = 0;
                for (std::size_t i = 0; i < n; ++i)
                {
                    const auto idx = pc_ + 1 + i;
                    v = (v << 8) | (idx < code_.size() ? code_[idx] : 0);
                }
                push(v);
                next = pc_ + 1 + n;
            }
            else if (op >= 0x80 && op <= 0x8f)
            {
                const std::size_t n = op - 0x7f;
                if (stack_.size() < n)
                    throw Fault{};
                push(stack_[stack_.size() - n]);
            }
            else if (op >= 0x90 && op <= 0x9f)
            {
                const std::size_t n = op - 0x8f;
                if (stack_.size() < n + 1)
                    throw Fault{};
                std::swap(stack_.back(), stack_[stack_.size() - 1 - n]);
            }
            else
                throw Fault{};
        }
        pc_ = next;
    }

    World& world_;
    const Message& msg_;
    const bytes& code_;
    std::set<std::size_t> jumpdests_;
    std::vector<word> stack_;
    bytes memory_;
    bytes returndata_;
    std::size_t pc_ = 0;
};

CallResult World::call_with_code(const Message& msg, const bytes& code)
{
    auto snapshot = accounts;
    auto transient_snapshot = transient_;
    auto& from = accounts[msg.caller];
    auto& to = accounts[msg.address];
    if (msg.value != 0 && msg.caller != msg.address)
    {
        if (from.balance < msg.value)
            return {false, {}};
        from.balance -= msg.value;
        to.balance += msg.value;
    }

    CallResult r;
    if (code.empty())
    {
        r = {true, {}};
        if (on_codeless_call)
            if (auto hooked = on_codeless_call(*this, msg))
                r = std::move(*hooked);
    }
    else
    {
        const bytes code_copy = code;
        Frame frame{*this, msg, code_copy};
        auto h = frame.run();
        r = {h.success, std::move(h.output)};
    }
    if (!r.success)
    {
        accounts = std::move(snapshot);
        transient_ = std::move(transient_snapshot);
    }
    return r;
}

CallResult World::call(const Message& msg)
{
    const auto it = accounts.find(msg.address);
    static const bytes none;
    const bytes code = it == accounts.end() ? none : it->second.code;
    return call_with_code(msg, code);
}

CallResult World::transact(const Message& msg)
{
    origin = msg.caller;
    transient_.clear();
    return call(msg);
}

bytes abi_call(uint32_t selector, const std::vector<word>& args)
{
    bytes out{static_cast<uint8_t>(selector >> 24), static_cast<uint8_t>(selector >> 16),
        static_cast<uint8_t>(selector >> 8), static_cast<uint8_t>(selector)};
    for (const auto& a : args)
    {
        const auto w = store_word(a);
        out.insert(out.end(), w.begin(), w.end());
    }
    return out;
}

}  // namespace rescan::test

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/symexec/term.hpp>

#include <rescan/evm/keccak.hpp>

#include <sstream>
#include <unordered_map>

namespace rescan::symexec
{
namespace
{
using wide = boost::multiprecision::uint512_t;

bool commutative(Op op)
{
    return op == Op::add || op == Op::mul || op == Op::and_ || op == Op::or_ || op == Op::xor_ ||
           op == Op::eq;
}

word low_mask(unsigned bits)
{
    return bits >= 256 ? max_word() : (word{1} << bits) - 1;
}

word sdiv(const word& a, const word& b)
{
    if (b == 0)
        return 0;
    const auto ua = is_negative(a) ? negate(a) : a;
    const auto ub = is_negative(b) ? negate(b) : b;
    const word q = ua / ub;
    return is_negative(a) != is_negative(b) ? negate(q) : q;
}

word smod(const word& a, const word& b)
{
    if (b == 0)
        return 0;
    const auto ua = is_negative(a) ? negate(a) : a;
    const auto ub = is_negative(b) ? negate(b) : b;
    const word r = ua % ub;
    return is_negative(a) ? negate(r) : r;
}

bool slt(const word& a, const word& b)
{
    if (is_negative(a) != is_negative(b))
        return is_negative(a);
    return a < b;
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
}  // namespace

std::string_view to_string(Op op) noexcept
{
    switch (op)
    {
    case Op::constant: return "const";
    case Op::var: return "var";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::sdiv: return "sdiv";
    case Op::mod: return "mod";
    case Op::smod: return "smod";
    case Op::addmod: return "addmod";
    case Op::mulmod: return "mulmod";
    case Op::exp: return "exp";
    case Op::signextend: return "signextend";
    case Op::lt: return "lt";
    case Op::gt: return "gt";
    case Op::slt: return "slt";
    case Op::sgt: return "sgt";
    case Op::eq: return "eq";
    case Op::iszero: return "iszero";
    case Op::and_: return "and";
    case Op::or_: return "or";
    case Op::xor_: return "xor";
    case Op::not_: return "not";
    case Op::byte_at: return "byte";
    case Op::shl: return "shl";
    case Op::shr: return "shr";
    case Op::sar: return "sar";
    case Op::concat: return "concat";
    case Op::keccak: return "keccak";
    case Op::ite: return "ite";
    }
    return "?";
}

word fold(Op op, const std::vector<word>& a, std::size_t length)
{
    switch (op)
    {
    case Op::constant:
    case Op::var:
        break;
    case Op::add: return a[0] + a[1];
    case Op::sub: return a[0] - a[1];
    case Op::mul: return a[0] * a[1];
    case Op::div: return a[1] == 0 ? word{0} : a[0] / a[1];
    case Op::sdiv: return sdiv(a[0], a[1]);
    case Op::mod: return a[1] == 0 ? word{0} : a[0] % a[1];
    case Op::smod: return smod(a[0], a[1]);
    case Op::addmod:
        return a[2] == 0 ? word{0} : static_cast<word>((wide{a[0]} + wide{a[1]}) % wide{a[2]});
    case Op::mulmod:
        return a[2] == 0 ? word{0} : static_cast<word>((wide{a[0]} * wide{a[1]}) % wide{a[2]});
    case Op::exp: return power(a[0], a[1]);
    case Op::signextend:
    {
        if (a[0] >= 31)
            return a[1];
        const auto bit = static_cast<unsigned>(a[0]) * 8 + 7;
        const word mask = (word{1} << bit) - 1;
        return bit_test(a[1], bit) ? (a[1] | ~mask) : (a[1] & mask);
    }
    case Op::lt: return a[0] < a[1] ? 1 : 0;
    case Op::gt: return a[0] > a[1] ? 1 : 0;
    case Op::slt: return slt(a[0], a[1]) ? 1 : 0;
    case Op::sgt: return slt(a[1], a[0]) ? 1 : 0;
    case Op::eq: return a[0] == a[1] ? 1 : 0;
    case Op::iszero: return a[0] == 0 ? 1 : 0;
    case Op::and_: return a[0] & a[1];
    case Op::or_: return a[0] | a[1];
    case Op::xor_: return a[0] ^ a[1];
    case Op::not_: return ~a[0];
    case Op::byte_at:
        return a[0] >= 32 ? word{0} : (a[1] >> (8 * (31 - static_cast<unsigned>(a[0])))) & 0xff;
    case Op::shl: return a[0] >= 256 ? word{0} : a[1] << static_cast<unsigned>(a[0]);
    case Op::shr: return a[0] >= 256 ? word{0} : a[1] >> static_cast<unsigned>(a[0]);
    case Op::sar:
    {
        const bool n = is_negative(a[1]);
        if (a[0] >= 256)
            return n ? max_word() : word{0};
        const auto s = static_cast<unsigned>(a[0]);
        word r = a[1] >> s;
        if (n && s > 0)
            r |= max_word() << (256 - s);
        return r;
    }
    case Op::concat:
    {
        word r = 0;
        for (const auto& b : a)
            r = (r << 8) | (b & 0xff);
        return r;
    }
    case Op::keccak:
    {
        bytes data;
        for (const auto& w : a)
        {
            const auto b = store_word(w);
            data.insert(data.end(), b.begin(), b.end());
        }
        data.resize(length);
        return keccak256_word(data);
    }
    case Op::ite: return a[0] != 0 ? a[1] : a[2];
    }
    return 0;
}

Term TermArena::constant(const word& v)
{
    TermNode n;
    n.op = Op::constant;
    n.value = v;
    return intern(std::move(n));
}

Term TermArena::var(const std::string& name, unsigned bits)
{
    TermNode n;
    n.op = Op::var;
    n.name = name;
    n.bits = bits;
    return intern(std::move(n));
}

Term TermArena::keccak(std::vector<Term> words, std::size_t length)
{
    if (std::all_of(words.begin(), words.end(), [](Term t) { return t->is_const(); }))
    {
        std::vector<word> v;
        for (const auto t : words)
            v.push_back(t->value);
        return constant(fold(Op::keccak, v, length));
    }
    TermNode n;
    n.op = Op::keccak;
    n.length = length;
    n.args = std::move(words);
    return intern(std::move(n));
}

Term TermArena::apply(Op op, std::vector<Term> args)
{
    if (const auto t = simplify(op, args))
        return t;
    TermNode n;
    n.op = op;
    n.args = std::move(args);
    return intern(std::move(n));
}

std::size_t TermArena::size() const
{
    std::lock_guard lock{mutex_};
    return nodes_.size();
}

Term TermArena::intern(TermNode node)
{
    std::vector<std::size_t> ids;
    for (const auto a : node.args)
        ids.push_back(a->id);
    auto key = std::make_tuple(node.op, node.value, node.name, node.bits, node.length, std::move(ids));
    std::lock_guard lock{mutex_};
    if (const auto it = index_.find(key); it != index_.end())
        return it->second;
    node.id = nodes_.size();
    nodes_.push_back(std::move(node));
    const Term t = &nodes_.back();
    index_.emplace(std::move(key), t);
    return t;
}

Term TermArena::simplify(Op op, std::vector<Term>& args)
{
    if (std::all_of(args.begin(), args.end(), [](Term t) { return t->is_const(); }))
    {
        std::vector<word> v;
        for (const auto t : args)
            v.push_back(t->value);
        return constant(fold(op, v));
    }
    if (commutative(op) && args[0]->is_const())
        std::swap(args[0], args[1]);
    const auto is = [](Term t, const word& v) { return t->is_const() && t->value == v; };
    const Term a = args[0];
    const Term b = args.size() > 1 ? args[1] : nullptr;

    switch (op)
    {
    case Op::add:
        if (is(b, 0))
            return a;
        if (b->is_const() && a->op == Op::add && a->args[1]->is_const())
            return add(a->args[0], constant(a->args[1]->value + b->value));
        break;
    case Op::sub:
        if (is(b, 0))
            return a;
        if (a == b)
            return constant(0);
        break;
    case Op::mul:
        if (is(b, 0))
            return b;
        if (is(b, 1))
            return a;
        break;
    case Op::div:
        if (is(b, 1))
            return a;
        break;
    case Op::mod:
        if (is(b, 1))
            return constant(0);
        break;
    case Op::and_:
    {
        if (is(b, 0))
            return b;
        if (a == b)
            return a;
        if (!b->is_const())
            break;
        const auto& m = b->value;
        if (m == max_word())
            return a;
        if (a->op == Op::and_ && a->args[1]->is_const())
            return and_(a->args[0], constant(a->args[1]->value & m));
        unsigned width = 256;
        if (a->op == Op::var)
            width = a->bits;
        else if (a->is_bool())
            width = 1;
        else if (a->op == Op::byte_at)
            width = 8;
        if (width < 256 && (m & low_mask(width)) == low_mask(width))
            return a;
        break;
    }
    case Op::or_:
    case Op::xor_:
        if (is(b, 0))
            return a;
        if (a == b)
            return op == Op::or_ ? a : constant(0);
        break;
    case Op::not_:
        if (a->op == Op::not_)
            return a->args[0];
        break;
    case Op::eq:
        if (a == b)
            return constant(1);
        if (is(b, 0))
            return iszero(a);
        break;
    case Op::iszero:
        if (a->op == Op::iszero && a->args[0]->is_bool())
            return a->args[0];
        break;
    case Op::lt:
    case Op::gt:
        if (a == b)
            return constant(0);
        break;
    case Op::byte_at:
    {
        if (!a->is_const())
            break;
        if (a->value >= 32)
            return constant(0);
        const auto i = static_cast<unsigned>(a->value);
        if (b->op == Op::concat)
            return b->args[i];
        if (b->op == Op::var && 8 * (32 - i) > b->bits && 8 * (31 - i) >= b->bits)
            return constant(0);
        if (b->op == Op::shl && b->args[0]->is_const() && b->args[0]->value % 8 == 0 && b->args[0]->value < 256)
        {
            const auto s = static_cast<unsigned>(b->args[0]->value / 8);
            return i + s < 32 ? byte_of(b->args[1], i + s) : constant(0);
        }
        if (b->op == Op::shr && b->args[0]->is_const() && b->args[0]->value % 8 == 0 && b->args[0]->value < 256)
        {
            const auto s = static_cast<unsigned>(b->args[0]->value / 8);
            return i >= s ? byte_of(b->args[1], i - s) : constant(0);
        }
        if (b->op == Op::or_)
        {
            const auto x = byte_of(b->args[0], i);
            const auto y = byte_of(b->args[1], i);
            if (is(x, 0))
                return y;
            if (is(y, 0))
                return x;
        }
        break;
    }
    case Op::shl:
    case Op::shr:
    {
        if (is(a, 0))
            return b;
        if (!a->is_const())
            break;
        if (a->value >= 256)
            return constant(0);
        const auto s = static_cast<unsigned>(a->value);
        if (b->op == op && b->args[0]->is_const())
        {
            const word total = b->args[0]->value + s;
            return apply(op, {constant(total), b->args[1]});
        }
        if (op == Op::shr && b->op == Op::shl && b->args[0]->is_const() && b->args[0]->value == s)
            return and_(b->args[1], constant(low_mask(256 - s)));
        if (op == Op::shr && b->op == Op::or_)
            return apply(Op::or_, {apply(Op::shr, {a, b->args[0]}), apply(Op::shr, {a, b->args[1]})});
        if (op == Op::shr && b->op == Op::var && s >= b->bits)
            return constant(0);
        if (b->op == Op::concat && b->args.size() == 32 && s % 8 == 0)
        {
            // Whole-byte shift of assembled bytes: move the bytes.
            const auto k = s / 8;
            std::vector<Term> bs(32, constant(0));
            for (unsigned j = 0; j < 32; ++j)
                if (op == Op::shr && j >= k)
                    bs[j] = b->args[j - k];
                else if (op == Op::shl && j + k < 32)
                    bs[j] = b->args[j + k];
            return apply(Op::concat, std::move(bs));
        }
        break;
    }
    case Op::concat:
    {
        // byte j of X for every j, possibly shifted by whole bytes.
        Term source = nullptr;
        int shift = 0;
        bool ok = true;
        bool seen_source = false;
        for (std::size_t j = 0; j < args.size() && ok; ++j)
        {
            const auto t = args[j];
            if (is(t, 0))
                continue;
            if (t->op != Op::byte_at || !t->args[0]->is_const())
            {
                ok = false;
                break;
            }
            const int idx = static_cast<int>(t->args[0]->value);
            if (!seen_source)
            {
                source = t->args[1];
                shift = idx - static_cast<int>(j);
                seen_source = true;
            }
            ok = t->args[1] == source && idx - static_cast<int>(j) == shift;
        }
        if (!ok || !seen_source || args.size() != 32)
            break;
        // Zero bytes must be exactly those shifted in.
        for (std::size_t j = 0; j < 32; ++j)
        {
            const int idx = static_cast<int>(j) + shift;
            const bool inside = idx >= 0 && idx < 32;
            if (!inside && !is(args[j], 0))
                return nullptr;
            if (inside && is(args[j], 0) && !is(byte_of(source, static_cast<unsigned>(idx)), 0))
                return nullptr;
        }
        if (shift == 0)
            return source;
        if (shift > 0)
            return apply(Op::shl, {constant(8 * shift), source});
        return apply(Op::shr, {constant(-8 * shift), source});
    }
    case Op::ite:
        if (a->is_const())
            return a->value != 0 ? args[1] : args[2];
        if (args[1] == args[2])
            return args[1];
        break;
    default:
        break;
    }
    return nullptr;
}

word evaluate(Term t, const Assignment& a)
{
    std::unordered_map<Term, word> memo;
    const auto go = [&](auto&& self, Term x) -> word {
        if (x->op == Op::constant)
            return x->value;
        if (x->op == Op::var)
        {
            const auto it = a.find(x->name);
            return it == a.end() ? word{0} : it->second & low_mask(x->bits);
        }
        if (const auto it = memo.find(x); it != memo.end())
            return it->second;
        std::vector<word> v;
        for (const auto arg : x->args)
            v.push_back(self(self, arg));
        const auto r = fold(x->op, v, x->length);
        memo.emplace(x, r);
        return r;
    };
    return go(go, t);
}

void collect_vars(Term t, std::map<std::string, Term>& out)
{
    std::set<Term> seen;
    std::vector<Term> work{t};
    while (!work.empty())
    {
        const auto x = work.back();
        work.pop_back();
        if (!seen.insert(x).second)
            continue;
        if (x->op == Op::var)
            out.emplace(x->name, x);
        for (const auto arg : x->args)
            work.push_back(arg);
    }
}

std::string to_string(Term t, std::size_t max_depth)
{
    if (t->op == Op::constant)
        return "0x" + to_hex(t->value);
    if (t->op == Op::var)
        return t->name;
    if (max_depth == 0)
        return "...";
    std::ostringstream os;
    os << to_string(t->op) << "(";
    for (std::size_t i = 0; i < t->args.size(); ++i)
        os << (i ? "," : "") << to_string(t->args[i], max_depth - 1);
    os << ")";
    return os.str();
}

}  // namespace rescan::symexec

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/symexec/solver.hpp>

#include <z3++.h>

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_map>

namespace rescan::symexec
{
namespace
{
class Z3Backend final : public SolverBackend
{
public:
    SatResult check(const std::vector<Term>& conjuncts, std::chrono::milliseconds timeout) override
    {
        ++queries_;
        // A recent model often satisfies a query that extends its path;
        // concrete evaluation with real keccak is a sound witness.
        for (auto it = recent_.rbegin(); it != recent_.rend(); ++it)
            if (std::all_of(conjuncts.begin(), conjuncts.end(),
                    [&](Term t) { return evaluate(t, *it) != 0; }))
                return {SatStatus::satisfiable, *it};
        z3::context ctx;
        Translator tr{ctx};
        z3::solver s{ctx};
        z3::params p{ctx};
        p.set("timeout", static_cast<unsigned>(std::max<long long>(1, timeout.count())));
        s.set(p);
        SatResult r;
        std::set<Term> seen;
        for (const auto t : conjuncts)
        {
            if (t->is_const())
            {
                if (t->value == 0)
                {
                    r.status = SatStatus::unsatisfiable;
                    return r;
                }
                continue;
            }
            if (seen.insert(t).second)
                s.add(tr.bv(t) != ctx.bv_val(0, 256));
        }
        tr.add_injectivity(s);
        try
        {
            switch (s.check())
            {
            case z3::sat:
                r.status = SatStatus::satisfiable;
                break;
            case z3::unsat:
                r.status = SatStatus::unsatisfiable;
                return r;
            case z3::unknown:
                return r;
            }
        }
        catch (const z3::exception&)
        {
            return r;
        }
        const auto m = s.get_model();
        for (const auto& [name, e] : tr.vars)
        {
            const auto v = m.eval(e, true);
            r.model[name] = parse_word(v.get_decimal_string(0));
        }
        remember(r.model);
        return r;
    }

    [[nodiscard]] std::size_t queries() const override { return queries_; }

private:
    void remember(const Assignment& m)
    {
        recent_.push_back(m);
        if (recent_.size() > 8)
            recent_.pop_front();
    }

    struct Translator
    {
        explicit Translator(z3::context& c) : ctx{c} {}

        z3::context& ctx;
        std::unordered_map<Term, z3::expr> memo;
        std::map<std::string, z3::expr> vars;
        std::map<std::size_t, z3::func_decl> hashes;
        std::vector<Term> keccaks;  ///< Hash applications, in translation order.

        /// Equal hashes of equal-length inputs imply equal inputs.
        void add_injectivity(z3::solver& s)
        {
            for (std::size_t i = 0; i < keccaks.size(); ++i)
                for (std::size_t j = i + 1; j < keccaks.size(); ++j)
                {
                    const auto a = keccaks[i];
                    const auto b = keccaks[j];
                    if (a->length != b->length || a->args.size() != b->args.size())
                        continue;
                    z3::expr same = ctx.bool_val(true);
                    for (std::size_t k = 0; k < a->args.size(); ++k)
                        same = same && bv(a->args[k]) == bv(b->args[k]);
                    s.add(z3::implies(bv(a) == bv(b), same));
                }
        }

        z3::expr word_val(const word& w) { return ctx.bv_val(to_decimal(w).c_str(), 256); }

        static std::string to_decimal(const word& w) { return w.str(); }

        z3::expr flag(const z3::expr& b) { return z3::ite(b, ctx.bv_val(1, 256), ctx.bv_val(0, 256)); }

        z3::expr bv(Term t)
        {
            if (const auto it = memo.find(t); it != memo.end())
                return it->second;
            auto e = build(t);
            memo.emplace(t, e);
            return e;
        }

        z3::expr build(Term t)
        {
            const auto arg = [&](std::size_t i) { return bv(t->args[i]); };
            const auto zero = ctx.bv_val(0, 256);
            switch (t->op)
            {
            case Op::constant:
                return word_val(t->value);
            case Op::var:
            {
                if (const auto it = vars.find(t->name); it != vars.end())
                    return it->second;
                z3::expr v = t->bits >= 256 ?
                    ctx.bv_const(t->name.c_str(), 256) :
                    z3::zext(ctx.bv_const(t->name.c_str(), t->bits), 256 - t->bits);
                vars.emplace(t->name, v);
                return v;
            }
            case Op::add: return arg(0) + arg(1);
            case Op::sub: return arg(0) - arg(1);
            case Op::mul: return arg(0) * arg(1);
            case Op::div: return z3::ite(arg(1) == zero, zero, z3::udiv(arg(0), arg(1)));
            case Op::sdiv: return z3::ite(arg(1) == zero, zero, arg(0) / arg(1));
            case Op::mod: return z3::ite(arg(1) == zero, zero, z3::urem(arg(0), arg(1)));
            case Op::smod: return z3::ite(arg(1) == zero, zero, z3::srem(arg(0), arg(1)));
            case Op::addmod:
            case Op::mulmod:
            {
                const auto a = z3::zext(arg(0), 256);
                const auto b = z3::zext(arg(1), 256);
                const auto n = z3::zext(arg(2), 256);
                const auto r = z3::urem(t->op == Op::addmod ? a + b : a * b, n);
                return z3::ite(arg(2) == zero, zero, r.extract(255, 0));
            }
            case Op::exp:
            {
                if (t->args[1]->is_const() && t->args[1]->value <= 64)
                {
                    z3::expr r = ctx.bv_val(1, 256);
                    for (unsigned i = 0; i < static_cast<unsigned>(t->args[1]->value); ++i)
                        r = r * arg(0);
                    return r;
                }
                return opaque(t);
            }
            case Op::signextend:
                if (t->args[0]->is_const() && t->args[0]->value < 31)
                {
                    const auto bits = 8 * (static_cast<unsigned>(t->args[0]->value) + 1);
                    return z3::sext(arg(1).extract(bits - 1, 0), 256 - bits);
                }
                return t->args[0]->is_const() ? arg(1) : opaque(t);
            case Op::lt: return flag(z3::ult(arg(0), arg(1)));
            case Op::gt: return flag(z3::ugt(arg(0), arg(1)));
            case Op::slt: return flag(arg(0) < arg(1));
            case Op::sgt: return flag(arg(0) > arg(1));
            case Op::eq: return flag(arg(0) == arg(1));
            case Op::iszero: return flag(arg(0) == zero);
            case Op::and_: return arg(0) & arg(1);
            case Op::or_: return arg(0) | arg(1);
            case Op::xor_: return arg(0) ^ arg(1);
            case Op::not_: return ~arg(0);
            case Op::byte_at:
            {
                const auto i = arg(0);
                const auto shift = (ctx.bv_val(31, 256) - i) * ctx.bv_val(8, 256);
                return z3::ite(z3::uge(i, ctx.bv_val(32, 256)), zero,
                    z3::lshr(arg(1), shift) & ctx.bv_val(0xff, 256));
            }
            case Op::shl: return z3::shl(arg(1), arg(0));
            case Op::shr: return z3::lshr(arg(1), arg(0));
            case Op::sar: return z3::ashr(arg(1), arg(0));
            case Op::concat:
            {
                z3::expr r = arg(0).extract(7, 0);
                for (std::size_t i = 1; i < t->args.size(); ++i)
                    r = z3::concat(r, arg(i).extract(7, 0));
                const auto width = 8 * t->args.size();
                return width < 256 ? z3::zext(r, 256 - static_cast<unsigned>(width)) :
                                     r.extract(255, 0);
            }
            case Op::keccak:
            {
                const auto n = t->args.size();
                auto it = hashes.find(t->length);
                if (it == hashes.end())
                {
                    z3::sort_vector domain{ctx};
                    for (std::size_t i = 0; i < n; ++i)
                        domain.push_back(ctx.bv_sort(256));
                    const auto name = "keccak" + std::to_string(t->length);
                    it = hashes.emplace(t->length, z3::function(name.c_str(), domain, ctx.bv_sort(256))).first;
                }
                z3::expr_vector xs{ctx};
                for (std::size_t i = 0; i < n; ++i)
                    xs.push_back(arg(i));
                keccaks.push_back(t);
                return it->second(xs);
            }
            case Op::ite:
                return z3::ite(arg(0) != zero, arg(1), arg(2));
            }
            return opaque(t);
        }

        /// Fresh unconstrained value for operators without a precise encoding.
        z3::expr opaque(Term t)
        {
            const auto name = "opaque!" + std::to_string(t->id);
            return ctx.bv_const(name.c_str(), 256);
        }
    };

    std::size_t queries_ = 0;
    std::deque<Assignment> recent_;
};
}  // namespace

std::string_view to_string(SatStatus s) noexcept
{
    switch (s)
    {
    case SatStatus::satisfiable:
        return "sat";
    case SatStatus::unsatisfiable:
        return "unsat";
    case SatStatus::unknown:
        return "unknown";
    }
    return "?";
}

std::unique_ptr<SolverBackend> make_z3_backend()
{
    return std::make_unique<Z3Backend>();
}

}  // namespace rescan::symexec

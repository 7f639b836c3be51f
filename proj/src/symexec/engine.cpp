// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/symexec/engine.hpp>

#include <deque>
#include <functional>
#include <limits>

namespace rescan::symexec
{
namespace
{
using Clock = std::chrono::steady_clock;
using Key = std::pair<std::size_t, Term>;  ///< (account index, slot term)

const word address_mask = (word{1} << 160) - 1;
const word lowest_attacker = 0xffff;
/// Top-level calldata: selector followed by this many symbolic words.
constexpr std::size_t calldata_words = 16;

struct Memory
{
    std::map<std::size_t, Term> bytes;
    bool havoc = false;
    std::size_t size = 0;
};

struct Calldata
{
    bool symbolic_words = false;
    uint32_t selector = 0;
    std::string prefix;
    std::vector<Term> bytes;
};

struct Frame
{
    std::size_t account = 0;
    std::size_t pos = 0;  ///< Instruction position.
    std::vector<Term> stack;
    Memory memory;
    Calldata calldata;
    Term caller = nullptr;
    Term value = nullptr;
    std::vector<Term> returndata;
    std::size_t ret_offset = 0;
    std::size_t ret_size = 0;
    std::map<Key, Term> saved_storage;
    std::map<std::size_t, Term> saved_balance;
};

struct State
{
    std::vector<Frame> frames;
    std::map<Key, Term> storage;
    std::map<Key, Term> transient;
    std::map<std::size_t, Term> balance;
    std::vector<Term> constraints;
    std::vector<Term> branch_conds;  ///< Conditions of this leg's branches.
    std::set<Key> written;           ///< Slots stored during this leg.
    std::map<std::vector<word>, std::size_t> visits;
    std::size_t blocks = 0;
    std::vector<bytecode::BlockId> trace;
    std::vector<Term> attacker_returns;
    std::vector<std::pair<Term, Term>> extcodesize;
    std::size_t fresh = 0;
    int leg = 1;
    Term origin = nullptr;
    /// Set when stopped at a target call: the callee address.
    Term target_address = nullptr;
    Term target_value = nullptr;
};

enum class Stop
{
    fork,
    dead,
    target,
    budget,
    orphan,
    timeout,
};

struct Stats
{
    std::size_t paths = 0;
    bool budget = false;
    bool timeout = false;
    std::string reason;
};

/// Storage variables created for unwritten slots, shared by all paths.
struct StorageVars
{
    std::map<std::string, Key> by_name;
};

class Explorer
{
public:
    Explorer(const Program& program, SolverBackend& solver, const Budget& budget, TermArena& arena,
        StorageVars& vars, Clock::time_point deadline, const Targets& targets, Stats& stats)
      : p_{program}, solver_{solver}, budget_{budget}, t_{arena}, vars_{vars}, deadline_{deadline},
        targets_{targets}, stats_{stats}
    {
        for (std::size_t i = 0; i < p_.accounts().size(); ++i)
            if (p_.accounts()[i].contract == targets_.contract)
                distance_[i] = distances(p_.accounts()[i]);
    }

    /// Depth-first search; `accept` decides whether a state stopped at a
    /// target completes the search.
    bool search(State init, const std::function<bool(State&)>& accept)
    {
        std::vector<State> work;
        work.push_back(std::move(init));
        while (!work.empty())
        {
            if (Clock::now() > deadline_ || stats_.paths >= budget_.max_paths)
            {
                stats_.budget = true;
                stats_.reason = Clock::now() > deadline_ ? "time budget" : "path budget";
                return false;
            }
            State s = std::move(work.back());
            work.pop_back();
            std::vector<State> forks;
            const auto stop = run(s, forks);
            switch (stop)
            {
            case Stop::fork:
                for (auto& f : forks)
                    work.push_back(std::move(f));
                continue;
            case Stop::target:
                ++stats_.paths;
                if (accept(s))
                    return true;
                continue;
            case Stop::budget:
                stats_.budget = true;
                if (stats_.reason.empty())
                    stats_.reason = "block budget";
                break;
            case Stop::orphan:
                stats_.budget = true;
                if (stats_.reason.empty())
                    stats_.reason = "unresolved jump";
                break;
            case Stop::timeout:
                stats_.timeout = true;
                break;
            case Stop::dead:
                break;
            }
            ++stats_.paths;
        }
        return false;
    }

    SatResult check(const std::vector<Term>& cs)
    {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline_ - Clock::now());
        return solver_.check(cs, std::max(std::chrono::milliseconds{1}, std::min(budget_.solver_timeout, left)));
    }

    Term fresh(State& s, const std::string& what, unsigned bits = 256)
    {
        return t_.var(what + "!" + std::to_string(s.leg) + "." + std::to_string(s.fresh++), bits);
    }

    /// Initial value of a slot never written on this path.
    Term initial_slot(std::size_t account, Term slot)
    {
        const auto& a = p_.accounts()[account];
        const auto name = "s" + std::to_string(account) + "." + std::to_string(slot->id);
        vars_.by_name.emplace(name, Key{account, slot});
        const Term v = t_.var(name);
        if (!slot->is_const())
            return v;
        const auto it = a.preset_storage.find(slot->value);
        if (it == a.preset_storage.end())
            return v;
        const auto& mask = a.preset_mask.at(slot->value);
        if (mask == max_word())
            return t_.constant(it->second);
        return t_.apply(Op::or_, {t_.constant(it->second), t_.and_(v, t_.constant(~mask))});
    }

    Term balance_of(State& s, std::size_t account)
    {
        auto it = s.balance.find(account);
        if (it == s.balance.end())
            it = s.balance.emplace(account, t_.var("balance!" + to_hex(p_.accounts()[account].address), 128)).first;
        return it->second;
    }

    /// Attacker-address constraints: not a precompile, not a known account.
    void attacker_constraints(State& s, Term addr)
    {
        s.constraints.push_back(t_.apply(Op::gt, {addr, t_.constant(lowest_attacker)}));
        for (const auto& a : p_.accounts())
            s.constraints.push_back(t_.iszero(t_.eq(addr, t_.constant(a.address))));
    }

private:
    std::map<bytecode::BlockId, std::size_t> distances(const Program::Account& a) const
    {
        std::map<bytecode::BlockId, std::size_t> d;
        std::deque<bytecode::BlockId> work;
        for (const auto off : targets_.offsets)
            if (const auto b = a.cfg.block_containing(off))
            {
                d[*b] = 0;
                work.push_back(*b);
            }
        while (!work.empty())
        {
            const auto b = work.front();
            work.pop_front();
            for (const auto pred : a.cfg.predecessors(b))
                if (d.emplace(pred, d[b] + 1).second)
                    work.push_back(pred);
        }
        return d;
    }

    std::size_t distance(std::size_t account, std::size_t offset) const
    {
        const auto it = distance_.find(account);
        if (it == distance_.end())
            return std::numeric_limits<std::size_t>::max() / 2;
        const auto b = p_.accounts()[account].cfg.block_containing(offset);
        if (!b)
            return std::numeric_limits<std::size_t>::max();
        const auto d = it->second.find(*b);
        return d == it->second.end() ? std::numeric_limits<std::size_t>::max() : d->second;
    }

    static Term pop(Frame& f)
    {
        if (f.stack.empty())
            throw std::out_of_range{"stack underflow"};
        const auto v = f.stack.back();
        f.stack.pop_back();
        return v;
    }

    static std::optional<std::size_t> small(Term t, std::size_t limit = 1u << 24)
    {
        if (!t->is_const() || t->value > limit)
            return std::nullopt;
        return static_cast<std::size_t>(t->value);
    }

    Term mload(State& s, Frame& f, Term off)
    {
        const auto o = small(off);
        if (!o)
            return fresh(s, "mload");
        std::vector<Term> bs;
        for (std::size_t i = 0; i < 32; ++i)
        {
            const auto it = f.memory.bytes.find(*o + i);
            if (it != f.memory.bytes.end())
                bs.push_back(it->second);
            else if (f.memory.havoc)
                return fresh(s, "mload");
            else
                bs.push_back(t_.constant(0));
        }
        f.memory.size = std::max(f.memory.size, (*o + 32 + 31) / 32 * 32);
        return t_.apply(Op::concat, std::move(bs));
    }

    void mstore_bytes(Frame& f, std::size_t off, const std::vector<Term>& bs)
    {
        for (std::size_t i = 0; i < bs.size(); ++i)
            f.memory.bytes[off + i] = bs[i];
        if (!bs.empty())
            f.memory.size = std::max(f.memory.size, (off + bs.size() + 31) / 32 * 32);
    }

    void havoc(Frame& f)
    {
        f.memory.bytes.clear();
        f.memory.havoc = true;
    }

    std::vector<Term> word_bytes(Term w)
    {
        std::vector<Term> bs;
        for (unsigned i = 0; i < 32; ++i)
            bs.push_back(t_.byte_of(w, i));
        return bs;
    }

    std::optional<std::vector<Term>> read_bytes(Frame& f, Term off, Term len)
    {
        const auto n = small(len);
        if (!n)
            return std::nullopt;
        if (*n == 0)
            return std::vector<Term>{};
        const auto o = small(off);
        if (!o)
            return std::nullopt;
        std::vector<Term> bs;
        for (std::size_t i = 0; i < *n; ++i)
        {
            const auto it = f.memory.bytes.find(*o + i);
            if (it != f.memory.bytes.end())
                bs.push_back(it->second);
            else if (f.memory.havoc)
                return std::nullopt;
            else
                bs.push_back(t_.constant(0));
        }
        return bs;
    }

    Term calldata_word_var(const Calldata& cd, std::size_t k)
    {
        if (k >= calldata_words)
            return t_.constant(0);
        return t_.var(cd.prefix + std::to_string(k));
    }

    Term calldata_byte(const Calldata& cd, std::size_t pos)
    {
        if (!cd.symbolic_words)
            return pos < cd.bytes.size() ? cd.bytes[pos] : t_.constant(0);
        if (pos < 4)
            return t_.constant((cd.selector >> (8 * (3 - pos))) & 0xff);
        const auto k = (pos - 4) / 32;
        return t_.byte_of(calldata_word_var(cd, k), static_cast<unsigned>((pos - 4) % 32));
    }

    Term calldataload(State& s, const Frame& f, Term off)
    {
        const auto o = small(off);
        if (!o)
            return fresh(s, "calldata");
        const auto& cd = f.calldata;
        if (cd.symbolic_words && *o >= 4 && (*o - 4) % 32 == 0)
            return calldata_word_var(cd, (*o - 4) / 32);
        std::vector<Term> bs;
        for (std::size_t i = 0; i < 32; ++i)
            bs.push_back(calldata_byte(cd, *o + i));
        return t_.apply(Op::concat, std::move(bs));
    }

    std::size_t calldatasize(const Calldata& cd) const
    {
        return cd.symbolic_words ? 4 + 32 * calldata_words : cd.bytes.size();
    }

    Term keccak(State& s, Frame& f, Term off, Term len)
    {
        const auto bs = read_bytes(f, off, len);
        if (!bs)
            return fresh(s, "hash");
        std::vector<Term> words;
        for (std::size_t i = 0; i < bs->size(); i += 32)
        {
            std::vector<Term> w;
            for (std::size_t j = 0; j < 32; ++j)
                w.push_back(i + j < bs->size() ? (*bs)[i + j] : t_.constant(0));
            words.push_back(t_.apply(Op::concat, std::move(w)));
        }
        return t_.keccak(std::move(words), bs->size());
    }

    Term sload(State& s, std::size_t account, Term slot)
    {
        const Key k{account, slot};
        if (const auto it = s.storage.find(k); it != s.storage.end())
            return it->second;
        return initial_slot(account, slot);
    }

    /// Ends a callee frame and resumes its caller.
    void leave(State& s, bool success, std::vector<Term> output)
    {
        Frame done = std::move(s.frames.back());
        s.frames.pop_back();
        if (!success)
        {
            s.storage = std::move(done.saved_storage);
            s.balance = std::move(done.saved_balance);
        }
        auto& caller = s.frames.back();
        const auto n = std::min(done.ret_size, output.size());
        mstore_bytes(caller, done.ret_offset, std::vector<Term>(output.begin(), output.begin() + static_cast<std::ptrdiff_t>(n)));
        caller.returndata = std::move(output);
        caller.stack.push_back(t_.constant(success ? 1 : 0));
    }

    /// Result of a call whose callee is not executed.
    void opaque_call(State& s, Frame& f, std::size_t out_off, std::size_t out_size, bool attacker)
    {
        const auto ret = fresh(s, attacker ? "ret" : "opaque");
        if (attacker)
            s.attacker_returns.push_back(ret);
        auto bs = word_bytes(ret);
        mstore_bytes(f, out_off, std::vector<Term>(bs.begin(), bs.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(out_size, 32))));
        f.returndata = bs;
        f.stack.push_back(attacker ? t_.constant(1) : fresh(s, "ok", 1));
    }

    bool feasible(State& s, Term extra, Stop& stop)
    {
        if (extra->is_const())
            return extra->value != 0;
        auto cs = s.constraints;
        cs.push_back(extra);
        const auto r = check(cs);
        if (r.status == SatStatus::unknown)
            stop = Stop::timeout;
        return r.status == SatStatus::satisfiable;
    }

    /// Executes a CALL-family instruction. Returns false to stop the path.
    bool do_call(State& s, uint8_t op, Stop& stop)
    {
        auto& f = s.frames.back();
        const auto& acct = p_.accounts()[f.account];
        const auto offset = acct.instructions[f.pos]->offset;
        pop(f);  // gas
        const Term addr = t_.and_(pop(f), t_.constant(address_mask));
        const Term value = (op == evm::OP_CALL || op == evm::OP_CALLCODE) ? pop(f) : t_.constant(0);
        const Term in_off = pop(f), in_len = pop(f), out_off = pop(f), out_len = pop(f);
        const auto oo = small(out_off);
        const auto ol = small(out_len);
        if (!oo || !ol)
            havoc(f);
        const std::size_t out_o = oo.value_or(0), out_n = ol && oo ? *ol : 0;

        // Known callee: concrete address of an account, or a typed call the
        // model bound to an instance.
        std::optional<std::size_t> callee;
        if (addr->is_const())
            callee = p_.index_of(addr->value);
        else if (const auto it = acct.bound_calls.find(offset); it != acct.bound_calls.end())
            if (const auto* inst = p_.primary(it->second))
            {
                s.constraints.push_back(t_.eq(addr, t_.constant(inst->address)));
                callee = p_.index_of(inst->address);
            }

        const bool is_target = !callee && acct.contract == targets_.contract && targets_.offsets.contains(offset) &&
                               (op == evm::OP_CALL || op == evm::OP_STATICCALL || op == evm::OP_CALLCODE);
        if (is_target)
        {
            if (addr->is_const() && addr->value <= lowest_attacker)
            {
                stop = Stop::dead;
                return false;
            }
            attacker_constraints(s, addr);
            if (!value->is_const() || value->value != 0)
            {
                const auto bal = balance_of(s, f.account);
                s.constraints.push_back(t_.iszero(t_.apply(Op::gt, {value, bal})));
                s.balance[f.account] = t_.sub(bal, value);
            }
            const auto r = check(s.constraints);
            if (r.status != SatStatus::satisfiable)
            {
                stop = r.status == SatStatus::unknown ? Stop::timeout : Stop::dead;
                return false;
            }
            s.target_address = addr;
            s.target_value = value;
            stop = Stop::target;
            return false;
        }

        if (callee && op != evm::OP_DELEGATECALL && op != evm::OP_CALLCODE && s.frames.size() <= budget_.max_call_depth)
        {
            const auto input = read_bytes(f, in_off, in_len);
            if (input)
            {
                if (!value->is_const() || value->value != 0)
                {
                    const auto bal = balance_of(s, f.account);
                    s.constraints.push_back(t_.iszero(t_.apply(Op::gt, {value, bal})));
                    s.balance[f.account] = t_.sub(bal, value);
                    s.balance[*callee] = t_.add(balance_of(s, *callee), value);
                }
                Frame next;
                next.account = *callee;
                next.calldata.bytes = *input;
                next.caller = t_.constant(acct.address);
                next.value = value;
                next.ret_offset = out_o;
                next.ret_size = out_n;
                next.saved_storage = s.storage;
                next.saved_balance = s.balance;
                ++f.pos;
                s.frames.push_back(std::move(next));
                return true;
            }
        }

        if (!callee)
        {
            if (addr->is_const() && addr->value <= lowest_attacker)
            {
                // Precompiles and empty low addresses: opaque result.
                opaque_call(s, f, out_o, out_n, false);
                ++f.pos;
                return true;
            }
            attacker_constraints(s, addr);
            if (!value->is_const() || value->value != 0)
            {
                const auto bal = balance_of(s, f.account);
                s.constraints.push_back(t_.iszero(t_.apply(Op::gt, {value, bal})));
                s.balance[f.account] = t_.sub(bal, value);
            }
            opaque_call(s, f, out_o, out_n, true);
            ++f.pos;
            return true;
        }
        opaque_call(s, f, out_o, out_n, false);
        ++f.pos;
        return true;
    }

    /// Runs one path until it forks, halts, or reaches a target.
    Stop run(State& s, std::vector<State>& forks)
    {
        try
        {
            return run_inner(s, forks);
        }
        catch (const std::out_of_range&)
        {
            return Stop::dead;
        }
    }

    bool enter_block(State& s, std::size_t offset, Stop& stop)
    {
        auto& f = s.frames.back();
        const auto& acct = p_.accounts()[f.account];
        const auto b = acct.cfg.block_containing(offset);
        if (!b)
        {
            stop = Stop::dead;
            return false;
        }
        if (++s.blocks > budget_.max_blocks_per_path)
        {
            stop = Stop::budget;
            return false;
        }
        if (acct.contract == targets_.contract && s.leg == 1)
            s.trace.push_back(*b);
        // Loop bound keyed by the block and the return addresses on the stack,
        // so shared helpers called from different sites are not mistaken for loops.
        std::vector<word> key{s.frames.size(), f.account, *b};
        for (const auto t : f.stack)
            if (t->is_const() && acct.cfg.is_valid_jump_target(t->value))
                key.push_back(t->value);
        if (++s.visits[key] > budget_.loop_unroll + 1)
        {
            stop = Stop::dead;
            return false;
        }
        return true;
    }

    bool jump_to(State& s, Term target, Stop& stop)
    {
        auto& f = s.frames.back();
        const auto& acct = p_.accounts()[f.account];
        if (!target->is_const())
        {
            stop = Stop::orphan;
            return false;
        }
        if (!acct.cfg.is_valid_jump_target(target->value))
        {
            stop = Stop::dead;
            return false;
        }
        const auto off = static_cast<std::size_t>(target->value);
        f.pos = acct.index.at(off);
        return enter_block(s, off, stop);
    }

    Stop run_inner(State& s, std::vector<State>& forks)
    {
        Stop stop = Stop::dead;
        for (;;)
        {
            if (Clock::now() > deadline_)
            {
                stats_.reason = "time budget";
                return Stop::budget;
            }
            auto& f = s.frames.back();
            const auto& acct = p_.accounts()[f.account];
            if (f.pos >= acct.instructions.size())
            {
                if (s.frames.size() == 1)
                    return Stop::dead;
                leave(s, true, {});
                continue;
            }
            const auto& ins = *acct.instructions[f.pos];
            const auto op = ins.opcode;
            if (f.pos > 0 && op == evm::OP_JUMPDEST && !enter_block(s, ins.offset, stop))
                return stop;
            if (f.stack.size() > 1024)
                return Stop::dead;

            const auto binary = [&](Op o) {
                const auto a = pop(f);
                const auto b = pop(f);
                f.stack.push_back(t_.apply(o, {a, b}));
            };

            if (evm::is_push(op))
            {
                f.stack.push_back(t_.constant(ins.push_value()));
                ++f.pos;
                continue;
            }
            if (evm::is_dup(op))
            {
                const auto n = static_cast<std::size_t>(op - evm::OP_DUP1 + 1);
                if (f.stack.size() < n)
                    return Stop::dead;
                f.stack.push_back(f.stack[f.stack.size() - n]);
                ++f.pos;
                continue;
            }
            if (evm::is_swap(op))
            {
                const auto n = static_cast<std::size_t>(op - evm::OP_SWAP1 + 1);
                if (f.stack.size() < n + 1)
                    return Stop::dead;
                std::swap(f.stack.back(), f.stack[f.stack.size() - 1 - n]);
                ++f.pos;
                continue;
            }
            if (op >= evm::OP_LOG0 && op <= evm::OP_LOG4)
            {
                for (int i = 0; i < 2 + (op - evm::OP_LOG0); ++i)
                    pop(f);
                ++f.pos;
                continue;
            }

            switch (op)
            {
            case evm::OP_STOP:
                if (s.frames.size() == 1)
                    return Stop::dead;
                leave(s, true, {});
                continue;
            case evm::OP_ADD: binary(Op::add); break;
            case evm::OP_MUL: binary(Op::mul); break;
            case evm::OP_SUB: binary(Op::sub); break;
            case evm::OP_DIV: binary(Op::div); break;
            case evm::OP_SDIV: binary(Op::sdiv); break;
            case evm::OP_MOD: binary(Op::mod); break;
            case evm::OP_SMOD: binary(Op::smod); break;
            case evm::OP_ADDMOD:
            case evm::OP_MULMOD:
            {
                const auto a = pop(f), b = pop(f), n = pop(f);
                f.stack.push_back(t_.apply(op == evm::OP_ADDMOD ? Op::addmod : Op::mulmod, {a, b, n}));
                break;
            }
            case evm::OP_EXP: binary(Op::exp); break;
            case evm::OP_SIGNEXTEND: binary(Op::signextend); break;
            case evm::OP_LT: binary(Op::lt); break;
            case evm::OP_GT: binary(Op::gt); break;
            case evm::OP_SLT: binary(Op::slt); break;
            case evm::OP_SGT: binary(Op::sgt); break;
            case evm::OP_EQ: binary(Op::eq); break;
            case evm::OP_ISZERO: f.stack.push_back(t_.iszero(pop(f))); break;
            case evm::OP_AND: binary(Op::and_); break;
            case evm::OP_OR: binary(Op::or_); break;
            case evm::OP_XOR: binary(Op::xor_); break;
            case evm::OP_NOT: f.stack.push_back(t_.apply(Op::not_, {pop(f)})); break;
            case evm::OP_BYTE: binary(Op::byte_at); break;
            case evm::OP_SHL: binary(Op::shl); break;
            case evm::OP_SHR: binary(Op::shr); break;
            case evm::OP_SAR: binary(Op::sar); break;
            case evm::OP_KECCAK256:
            {
                const auto off = pop(f), len = pop(f);
                f.stack.push_back(keccak(s, f, off, len));
                break;
            }
            case evm::OP_ADDRESS: f.stack.push_back(t_.constant(acct.address)); break;
            case evm::OP_BALANCE:
            {
                const auto a = t_.and_(pop(f), t_.constant(address_mask));
                const auto idx = a->is_const() ? p_.index_of(a->value) : std::nullopt;
                f.stack.push_back(idx ? balance_of(s, *idx) : fresh(s, "balance"));
                break;
            }
            case evm::OP_ORIGIN: f.stack.push_back(s.origin); break;
            case evm::OP_CALLER: f.stack.push_back(f.caller); break;
            case evm::OP_CALLVALUE: f.stack.push_back(f.value); break;
            case evm::OP_CALLDATALOAD: f.stack.push_back(calldataload(s, f, pop(f))); break;
            case evm::OP_CALLDATASIZE: f.stack.push_back(t_.constant(calldatasize(f.calldata))); break;
            case evm::OP_CALLDATACOPY:
            {
                const auto mo = pop(f), o = pop(f), n = pop(f);
                const auto m = small(mo), src = small(o), len = small(n);
                if (!m || !src || !len)
                {
                    havoc(f);
                    break;
                }
                std::vector<Term> bs;
                for (std::size_t i = 0; i < *len; ++i)
                    bs.push_back(calldata_byte(f.calldata, *src + i));
                mstore_bytes(f, *m, bs);
                break;
            }
            case evm::OP_CODESIZE: f.stack.push_back(t_.constant(acct.code.size())); break;
            case evm::OP_CODECOPY:
            {
                const auto mo = pop(f), o = pop(f), n = pop(f);
                const auto m = small(mo), src = small(o), len = small(n);
                if (!m || !src || !len)
                {
                    havoc(f);
                    break;
                }
                std::vector<Term> bs;
                for (std::size_t i = 0; i < *len; ++i)
                    bs.push_back(t_.constant(*src + i < acct.code.size() ? acct.code[*src + i] : 0));
                mstore_bytes(f, *m, bs);
                break;
            }
            case evm::OP_GASPRICE: f.stack.push_back(t_.var("env.gasprice")); break;
            case evm::OP_EXTCODESIZE:
            {
                const auto a = t_.and_(pop(f), t_.constant(address_mask));
                const auto idx = a->is_const() ? p_.index_of(a->value) : std::nullopt;
                if (idx)
                    f.stack.push_back(t_.constant(p_.accounts()[*idx].code.size()));
                else
                {
                    const auto v = fresh(s, "extcodesize", 32);
                    s.extcodesize.emplace_back(a, v);
                    f.stack.push_back(v);
                }
                break;
            }
            case evm::OP_EXTCODECOPY:
                pop(f), pop(f), pop(f), pop(f);
                havoc(f);
                break;
            case evm::OP_RETURNDATASIZE: f.stack.push_back(t_.constant(f.returndata.size())); break;
            case evm::OP_RETURNDATACOPY:
            {
                const auto mo = pop(f), o = pop(f), n = pop(f);
                const auto m = small(mo), src = small(o), len = small(n);
                if (!m || !src || !len)
                {
                    havoc(f);
                    break;
                }
                if (*src + *len > f.returndata.size())
                    return Stop::dead;
                mstore_bytes(f, *m, std::vector<Term>(f.returndata.begin() + static_cast<std::ptrdiff_t>(*src),
                                        f.returndata.begin() + static_cast<std::ptrdiff_t>(*src + *len)));
                break;
            }
            case evm::OP_EXTCODEHASH: pop(f); f.stack.push_back(fresh(s, "codehash")); break;
            case evm::OP_BLOCKHASH: pop(f); f.stack.push_back(fresh(s, "blockhash")); break;
            case evm::OP_COINBASE: f.stack.push_back(t_.var("env.coinbase", 160)); break;
            case evm::OP_TIMESTAMP: f.stack.push_back(t_.var("env.timestamp", 64)); break;
            case evm::OP_NUMBER: f.stack.push_back(t_.var("env.number", 64)); break;
            case evm::OP_PREVRANDAO: f.stack.push_back(t_.var("env.prevrandao")); break;
            case evm::OP_GASLIMIT: f.stack.push_back(t_.var("env.gaslimit", 64)); break;
            case evm::OP_CHAINID: f.stack.push_back(t_.var("env.chainid", 64)); break;
            case evm::OP_SELFBALANCE: f.stack.push_back(balance_of(s, f.account)); break;
            case evm::OP_BASEFEE: f.stack.push_back(t_.var("env.basefee", 64)); break;
            case evm::OP_BLOBHASH: pop(f); f.stack.push_back(t_.constant(0)); break;
            case evm::OP_BLOBBASEFEE: f.stack.push_back(t_.var("env.blobbasefee", 64)); break;
            case evm::OP_POP: pop(f); break;
            case evm::OP_MLOAD: f.stack.push_back(mload(s, f, pop(f))); break;
            case evm::OP_MSTORE:
            {
                const auto off = pop(f), v = pop(f);
                if (const auto o = small(off))
                    mstore_bytes(f, *o, word_bytes(v));
                else
                    havoc(f);
                break;
            }
            case evm::OP_MSTORE8:
            {
                const auto off = pop(f), v = pop(f);
                if (const auto o = small(off))
                    mstore_bytes(f, *o, {t_.byte_of(v, 31)});
                else
                    havoc(f);
                break;
            }
            case evm::OP_SLOAD: f.stack.push_back(sload(s, f.account, pop(f))); break;
            case evm::OP_SSTORE:
            {
                const auto k = pop(f), v = pop(f);
                s.storage[{f.account, k}] = v;
                s.written.insert({f.account, k});
                break;
            }
            case evm::OP_TLOAD:
            {
                const Key k{f.account, pop(f)};
                const auto it = s.transient.find(k);
                f.stack.push_back(it == s.transient.end() ? t_.constant(0) : it->second);
                break;
            }
            case evm::OP_TSTORE:
            {
                const auto k = pop(f), v = pop(f);
                s.transient[{f.account, k}] = v;
                break;
            }
            case evm::OP_MCOPY:
            {
                const auto dst = pop(f), src = pop(f), n = pop(f);
                const auto d = small(dst);
                const auto bs = read_bytes(f, src, n);
                if (!d || !bs)
                    havoc(f);
                else
                    mstore_bytes(f, *d, *bs);
                break;
            }
            case evm::OP_JUMP:
                if (!jump_to(s, pop(f), stop))
                    return stop;
                continue;
            case evm::OP_JUMPI:
            {
                const auto target = pop(f);
                const auto cond = pop(f);
                const auto yes = t_.truthy(cond);
                const auto no = t_.iszero(cond);
                const auto next_off = ins.next_offset();
                if (yes->is_const())
                {
                    if (yes->value != 0)
                    {
                        if (!jump_to(s, target, stop))
                            return stop;
                    }
                    else
                    {
                        ++f.pos;
                        if (!enter_block(s, next_off, stop))
                            return stop;
                    }
                    continue;
                }
                if (!target->is_const())
                    return Stop::orphan;
                const auto jump_off = static_cast<std::size_t>(target->value);
                // Preferred arm first: the one closer to a target.
                const bool prefer_jump = distance(f.account, jump_off) <= distance(f.account, next_off);
                Stop arm_stop = Stop::dead;
                const bool jump_ok = feasible(s, yes, arm_stop);
                const bool timed_out = arm_stop == Stop::timeout;
                arm_stop = Stop::dead;
                const bool fall_ok = feasible(s, no, arm_stop);
                if (timed_out || arm_stop == Stop::timeout)
                    stats_.timeout = true;
                std::vector<State> arms;
                if (fall_ok)
                {
                    State n = s;
                    n.constraints.push_back(no);
                    n.branch_conds.push_back(no);
                    auto& nf = n.frames.back();
                    ++nf.pos;
                    Stop st = Stop::dead;
                    if (enter_block(n, next_off, st))
                        arms.push_back(std::move(n));
                    else if (st == Stop::budget)
                        stats_.budget = true;
                }
                if (jump_ok)
                {
                    State j = std::move(s);
                    j.constraints.push_back(yes);
                    j.branch_conds.push_back(yes);
                    Stop st = Stop::dead;
                    if (jump_to(j, target, st))
                        arms.push_back(std::move(j));
                    else if (st == Stop::budget)
                        stats_.budget = true;
                }
                if (arms.size() == 2 && !prefer_jump)
                    std::swap(arms[0], arms[1]);
                // The work list is a stack: the preferred arm goes last.
                for (auto& a : arms)
                    forks.push_back(std::move(a));
                return Stop::fork;
            }
            case evm::OP_PC: f.stack.push_back(t_.constant(ins.offset)); break;
            case evm::OP_MSIZE: f.stack.push_back(t_.constant(f.memory.size)); break;
            case evm::OP_GAS: f.stack.push_back(fresh(s, "gas", 64)); break;
            case evm::OP_JUMPDEST: break;
            case evm::OP_CREATE:
            case evm::OP_CREATE2:
                pop(f), pop(f), pop(f);
                if (op == evm::OP_CREATE2)
                    pop(f);
                f.stack.push_back(fresh(s, "created", 160));
                break;
            case evm::OP_CALL:
            case evm::OP_CALLCODE:
            case evm::OP_DELEGATECALL:
            case evm::OP_STATICCALL:
                if (!do_call(s, op, stop))
                    return stop;
                continue;
            case evm::OP_RETURN:
            case evm::OP_REVERT:
            {
                const auto off = pop(f), len = pop(f);
                if (s.frames.size() == 1)
                    return Stop::dead;
                auto out = read_bytes(f, off, len).value_or(std::vector<Term>{});
                leave(s, op == evm::OP_RETURN, std::move(out));
                continue;
            }
            case evm::OP_SELFDESTRUCT:
                return Stop::dead;
            default:
                // INVALID and undefined opcodes.
                if (s.frames.size() == 1)
                    return Stop::dead;
                leave(s, false, {});
                continue;
            }
            ++f.pos;
        }
    }

    const Program& p_;
    SolverBackend& solver_;
    const Budget& budget_;
    TermArena& t_;
    StorageVars& vars_;
    Clock::time_point deadline_;
    const Targets& targets_;
    Stats& stats_;
    std::map<std::size_t, std::map<bytecode::BlockId, std::size_t>> distance_;
};
/// Selector that reaches a function, or one no function claims for fallbacks.
std::optional<uint32_t> selector_of(const ast::ContractModel& model, const ast::Function& f)
{
    if (f.selector)
        return static_cast<uint32_t>(std::stoul(*f.selector, nullptr, 16));
    if (f.kind != "fallback" && f.kind != "receive")
        return std::nullopt;
    std::set<uint32_t> used;
    if (const auto* c = model.contract(f.contract))
        for (const auto& [sig, sel] : c->method_identifiers)
            used.insert(static_cast<uint32_t>(std::stoul(sel, nullptr, 16)));
    uint32_t s = 0;
    while (used.contains(s))
        ++s;
    return s;
}

bytes encode_calldata(uint32_t selector, const std::string& prefix, const Assignment& m)
{
    bytes out;
    for (int i = 3; i >= 0; --i)
        out.push_back(static_cast<uint8_t>((selector >> (8 * i)) & 0xff));
    for (std::size_t k = 0; k < calldata_words; ++k)
    {
        const auto it = m.find(prefix + std::to_string(k));
        const word w = it == m.end() ? word{0} : it->second;
        for (int i = 31; i >= 0; --i)
            out.push_back(static_cast<uint8_t>((w >> (8 * i)) & 0xff));
    }
    return out;
}

word value_of(const Assignment& m, const std::string& name)
{
    const auto it = m.find(name);
    return it == m.end() ? word{0} : it->second;
}

struct Leg
{
    std::size_t account = 0;
    uint32_t selector = 0;
};

/// Fresh top-level transaction frame.
void begin_transaction(State& s, TermArena& t, const Program& p, const Leg& leg, Term caller, int number)
{
    const auto n = std::to_string(number);
    Frame f;
    f.account = leg.account;
    f.calldata.symbolic_words = true;
    f.calldata.selector = leg.selector;
    f.calldata.prefix = "cd" + n + "_";
    f.caller = caller;
    f.value = t.var("callvalue" + n, 128);
    s.frames.clear();
    s.frames.push_back(std::move(f));
    s.leg = number;
    s.branch_conds.clear();
    s.written.clear();
    s.visits.clear();
    s.blocks = 0;
    s.target_address = nullptr;
    s.target_value = nullptr;
    const auto& a = p.accounts()[leg.account];
    auto it = s.balance.find(leg.account);
    if (it == s.balance.end())
    {
        const auto b = t.var("balance!" + to_hex(a.address), 128);
        it = s.balance.emplace(leg.account, b).first;
    }
    it->second = t.add(it->second, s.frames.back().value);
}
}  // namespace

Engine::Engine(const Program& program, SolverBackend& solver, Budget budget)
  : program_{program}, solver_{solver}, budget_{budget}
{
}

Verdict Engine::execute(const std::string& entry_contract, uint32_t entry_selector, const Targets& targets,
    bool reentry, const std::vector<std::string>& reentry_entries)
{
    Verdict v;
    const auto* entry = program_.primary(entry_contract);
    if (!entry || targets.offsets.empty())
    {
        v.status = VerdictStatus::unknown_budget;
        v.reason = !entry ? "entry contract has no bytecode" : "interaction has no bytecode location";
        return v;
    }
    const auto start_queries = solver_.queries();
    const auto deadline = Clock::now() + budget_.time_budget;
    TermArena arena;
    StorageVars vars;
    Stats stats;
    Explorer ex{program_, solver_, budget_, arena, vars, deadline, targets, stats};

    // Re-entry legs: each entry function on its primary instance, plus the
    // sibling instance for guards held by another account.
    struct Reentry
    {
        std::string contract;
        uint32_t selector = 0;
    };
    std::vector<Reentry> reentries;
    for (const auto& id : reentry_entries)
        if (const auto* f = program_.model().function(id))
            if (const auto sel = selector_of(program_.model(), *f))
                reentries.push_back({f->contract, *sel});

    State init;
    const auto caller = arena.var("caller1", 160);
    init.origin = caller;
    ex.attacker_constraints(init, caller);
    begin_transaction(init, arena, program_, {*program_.index_of(entry->address), entry_selector}, caller, 1);

    std::optional<State> found;
    std::vector<Key> stale;
    std::optional<uint32_t> reentry_selector;
    std::optional<std::size_t> reentry_account;

    const auto leg_two = [&](State& s2) {
        found = s2;
        return true;
    };
    const auto leg_one = [&](State& s) {
        if (!reentry)
        {
            found = s;
            return true;
        }
        std::map<std::string, Term> used;
        for (const auto c : s.branch_conds)
            collect_vars(c, used);
        std::vector<Key> guards, fresh_guards;
        for (const auto& [name, term] : used)
            if (const auto it = vars.by_name.find(name); it != vars.by_name.end())
            {
                guards.push_back(it->second);
                if (!s.written.contains(it->second))
                    fresh_guards.push_back(it->second);
            }
        if (!guards.empty() && fresh_guards.empty())
            return false;
        const auto& target_acct = s.frames.back().account;
        const bool foreign = std::any_of(fresh_guards.begin(), fresh_guards.end(),
            [&](const Key& k) { return k.first != target_acct; });
        for (const auto& r : reentries)
        {
            std::vector<const Program::Account*> instances{program_.primary(r.contract)};
            if (foreign)
                instances.push_back(program_.sibling(r.contract));
            for (const auto* inst : instances)
            {
                if (!inst)
                    continue;
                State s2 = s;
                const auto idx = *program_.index_of(inst->address);
                begin_transaction(s2, arena, program_, {idx, r.selector}, s.target_address, 2);
                // Balance left after the first transaction's transfer.
                if (ex.search(std::move(s2), leg_two))
                {
                    stale = fresh_guards;
                    reentry_selector = r.selector;
                    reentry_account = idx;
                    return true;
                }
                if (stats.budget && Clock::now() > deadline)
                    return false;
            }
        }
        return false;
    };
    // The leg-one state at the target is needed for the witness.
    std::optional<State> first;
    const auto leg_one_keep = [&](State& s) {
        if (!leg_one(s))
            return false;
        first = s;
        return true;
    };
    ex.search(std::move(init), leg_one_keep);

    v.paths = stats.paths;
    v.solver_queries = solver_.queries() - start_queries;
    if (!found)
    {
        v.status = stats.budget ? VerdictStatus::unknown_budget :
                   stats.timeout ? VerdictStatus::unknown_timeout :
                                   VerdictStatus::unreachable;
        v.reason = stats.budget ? stats.reason : stats.timeout ? "solver timeout" : "no feasible path";
        return v;
    }

    const auto r = ex.check(found->constraints);
    if (r.status != SatStatus::satisfiable)
    {
        v.status = VerdictStatus::unknown_timeout;
        v.reason = "final model query failed";
        return v;
    }
    const auto& m = r.model;
    v.status = VerdictStatus::confirmed;
    v.model = m;
    v.path = (first ? *first : *found).trace;

    Witness w;
    w.target_contract = targets.contract;
    w.target_offsets = targets.offsets;
    for (std::size_t i = 0; i < program_.accounts().size(); ++i)
    {
        const auto& a = program_.accounts()[i];
        Witness::Account wa;
        wa.address = a.address;
        wa.contract = a.contract;
        wa.code = a.code;
        wa.storage = a.preset_storage;
        wa.balance = value_of(m, "balance!" + to_hex(a.address));
        w.accounts.push_back(std::move(wa));
    }
    for (const auto& [name, key] : vars.by_name)
    {
        const auto slot = evaluate(key.second, m);
        const auto value = evaluate(ex.initial_slot(key.first, key.second), m);
        if (value != 0)
            w.accounts[key.first].storage[slot] = value;
        else
            w.accounts[key.first].storage.erase(slot);
    }
    w.first = {value_of(m, "caller1"), entry->address, value_of(m, "callvalue1"),
        encode_calldata(entry_selector, "cd1_", m)};
    if (reentry && first)
    {
        w.reentry = Witness::Transaction{evaluate(first->target_address, m),
            program_.accounts()[*reentry_account].address, value_of(m, "callvalue2"),
            encode_calldata(*reentry_selector, "cd2_", m)};
        w.attacker = evaluate(first->target_address, m);
        for (const auto& k : stale)
            w.stale_slots.emplace_back(program_.accounts()[k.first].address, evaluate(k.second, m));
    }
    else
        w.attacker = evaluate(found->target_address, m);
    for (const auto t : found->attacker_returns)
        w.attacker_returns.push_back(evaluate(t, m));
    for (const auto& [addr, size] : found->extcodesize)
        w.extcodesize.emplace(evaluate(addr, m), evaluate(size, m));
    for (const auto& [name, value] : m)
        if (name.rfind("env.", 0) == 0)
            w.env[name.substr(4)] = value;
    v.witness = std::move(w);
    return v;
}

Verdict Engine::verify(const slicer::Warning& warning)
{
    const auto targets = program_.locate_warning_targets(warning);
    Verdict best;
    best.status = VerdictStatus::unreachable;
    best.reason = "no feasible path";
    if (targets.offsets.empty())
    {
        best.status = VerdictStatus::unknown_budget;
        best.reason = "interaction has no bytecode location";
        return best;
    }
    const auto rank = [](VerdictStatus s) {
        switch (s)
        {
        case VerdictStatus::confirmed: return 3;
        case VerdictStatus::unknown_budget: return 2;
        case VerdictStatus::unknown_timeout: return 1;
        case VerdictStatus::unreachable: return 0;
        }
        return 0;
    };
    const auto started = Clock::now();
    const auto total = budget_.time_budget;
    std::size_t paths = 0, queries = 0;
    for (const auto& id : warning.entry_functions)
    {
        const auto* f = program_.model().function(id);
        const auto sel = f ? selector_of(program_.model(), *f) : std::nullopt;
        if (!sel)
            continue;
        const auto spent = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
        if (spent >= total)
        {
            best.status = VerdictStatus::unknown_budget;
            best.reason = "time budget";
            break;
        }
        Engine sub{program_, solver_, budget_};
        sub.budget_.time_budget = total - spent;
        auto v = sub.execute(f->contract, *sel, targets, true, warning.entry_functions);
        paths += v.paths;
        queries += v.solver_queries;
        if (rank(v.status) > rank(best.status))
            best = std::move(v);
        if (best.status == VerdictStatus::confirmed)
            break;
    }
    best.paths = paths;
    best.solver_queries = queries;
    return best;
}

}  // namespace rescan::symexec

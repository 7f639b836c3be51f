// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/symexec/solver.hpp>

#include <csignal>
#include <cstdlib>
#include <poll.h>
#include <regex>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>
#include <unordered_map>

namespace rescan::symexec
{
namespace
{
std::string quote(const std::string& name)
{
    return "|" + name + "|";
}

std::string bv(const word& w)
{
    return "(_ bv" + w.str() + " 256)";
}

/// Prints a query as an SMT-LIB 2 script with one definition per shared node.
class Printer
{
public:
    std::string script(const std::vector<Term>& conjuncts)
    {
        std::vector<std::string> asserts;
        std::set<Term> seen;
        for (const auto t : conjuncts)
            if (seen.insert(t).second)
                asserts.push_back("(assert (not (= " + ref(t) + " " + bv(0) + ")))");
        // Equal hashes of equal-length inputs imply equal inputs.
        for (std::size_t i = 0; i < keccaks_.size(); ++i)
            for (std::size_t j = i + 1; j < keccaks_.size(); ++j)
            {
                const auto a = keccaks_[i];
                const auto b = keccaks_[j];
                if (a->length != b->length || a->args.size() != b->args.size())
                    continue;
                std::string same = "(and true";
                for (std::size_t k = 0; k < a->args.size(); ++k)
                    same += " (= " + ref(a->args[k]) + " " + ref(b->args[k]) + ")";
                asserts.push_back("(assert (=> (= " + ref(a) + " " + ref(b) + ") " + same + ")))");
            }
        std::ostringstream out;
        out << "(set-logic QF_UFBV)\n(set-option :produce-models true)\n";
        out << decls_.str() << defs_.str();
        for (const auto& a : asserts)
            out << a << "\n";
        out << "(check-sat)\n";
        if (!vars_.empty())
        {
            out << "(get-value (";
            for (const auto& [name, narrow] : vars_)
                out << quote(name) << " ";
            out << "))\n";
        }
        out << "(exit)\n";
        return out.str();
    }

    [[nodiscard]] const std::map<std::string, unsigned>& vars() const { return vars_; }

private:
    std::string ref(Term t)
    {
        if (t->op == Op::constant)
            return bv(t->value);
        if (const auto it = names_.find(t); it != names_.end())
            return it->second;
        std::string e;
        if (t->op == Op::var)
        {
            if (!vars_.contains(t->name))
            {
                vars_.emplace(t->name, t->bits);
                decls_ << "(declare-fun " << quote(t->name) << " () (_ BitVec " << std::min(t->bits, 256u) << "))\n";
            }
            e = t->bits >= 256 ? quote(t->name) :
                                 "((_ zero_extend " + std::to_string(256 - t->bits) + ") " + quote(t->name) + ")";
        }
        else
            e = build(t);
        const auto name = "t" + std::to_string(t->id);
        defs_ << "(define-fun " << name << " () (_ BitVec 256) " << e << ")\n";
        names_.emplace(t, name);
        return name;
    }

    std::string flag(const std::string& b) { return "(ite " + b + " " + bv(1) + " " + bv(0) + ")"; }

    std::string opaque(Term t)
    {
        const auto name = "opaque!" + std::to_string(t->id);
        decls_ << "(declare-fun " << quote(name) << " () (_ BitVec 256))\n";
        return quote(name);
    }

    std::string build(Term t)
    {
        const auto a = [&](std::size_t i) { return ref(t->args[i]); };
        const auto zero = bv(0);
        const auto bin = [&](const char* op) { return std::string{"("} + op + " " + a(0) + " " + a(1) + ")"; };
        const auto guarded = [&](const char* op) {
            return "(ite (= " + a(1) + " " + zero + ") " + zero + " " + bin(op) + ")";
        };
        switch (t->op)
        {
        case Op::add: return bin("bvadd");
        case Op::sub: return bin("bvsub");
        case Op::mul: return bin("bvmul");
        case Op::div: return guarded("bvudiv");
        case Op::sdiv: return guarded("bvsdiv");
        case Op::mod: return guarded("bvurem");
        case Op::smod: return guarded("bvsrem");
        case Op::addmod:
        case Op::mulmod:
        {
            const auto x = "((_ zero_extend 256) " + a(0) + ")";
            const auto y = "((_ zero_extend 256) " + a(1) + ")";
            const auto n = "((_ zero_extend 256) " + a(2) + ")";
            const auto r = std::string{"(bvurem ("} + (t->op == Op::addmod ? "bvadd " : "bvmul ") + x + " " + y + ") " + n + ")";
            return "(ite (= " + a(2) + " " + zero + ") " + zero + " ((_ extract 255 0) " + r + "))";
        }
        case Op::exp:
            if (t->args[1]->is_const() && t->args[1]->value <= 64)
            {
                std::string r = bv(1);
                for (unsigned i = 0; i < static_cast<unsigned>(t->args[1]->value); ++i)
                    r = "(bvmul " + r + " " + a(0) + ")";
                return r;
            }
            return opaque(t);
        case Op::signextend:
            if (t->args[0]->is_const() && t->args[0]->value < 31)
            {
                const auto bits = 8 * (static_cast<unsigned>(t->args[0]->value) + 1);
                return "((_ sign_extend " + std::to_string(256 - bits) + ") ((_ extract " + std::to_string(bits - 1) +
                       " 0) " + a(1) + "))";
            }
            return t->args[0]->is_const() ? a(1) : opaque(t);
        case Op::lt: return flag(bin("bvult"));
        case Op::gt: return flag(bin("bvugt"));
        case Op::slt: return flag(bin("bvslt"));
        case Op::sgt: return flag(bin("bvsgt"));
        case Op::eq: return flag(bin("="));
        case Op::iszero: return flag("(= " + a(0) + " " + zero + ")");
        case Op::and_: return bin("bvand");
        case Op::or_: return bin("bvor");
        case Op::xor_: return bin("bvxor");
        case Op::not_: return "(bvnot " + a(0) + ")";
        case Op::byte_at:
            return "(ite (bvuge " + a(0) + " " + bv(32) + ") " + zero + " (bvand (bvlshr " + a(1) + " (bvmul (bvsub " +
                   bv(31) + " " + a(0) + ") " + bv(8) + ")) " + bv(0xff) + "))";
        case Op::shl: return "(bvshl " + a(1) + " " + a(0) + ")";
        case Op::shr: return "(bvlshr " + a(1) + " " + a(0) + ")";
        case Op::sar: return "(bvashr " + a(1) + " " + a(0) + ")";
        case Op::concat:
        {
            std::string r = "((_ extract 7 0) " + a(0) + ")";
            for (std::size_t i = 1; i < t->args.size(); ++i)
                r = "(concat " + r + " ((_ extract 7 0) " + a(i) + "))";
            const auto width = 8 * t->args.size();
            if (width < 256)
                return "((_ zero_extend " + std::to_string(256 - width) + ") " + r + ")";
            return width == 256 ? r : "((_ extract 255 0) " + r + ")";
        }
        case Op::keccak:
        {
            const auto name = "keccak" + std::to_string(t->length) + "_" + std::to_string(t->args.size());
            if (hashes_.insert(name).second)
            {
                decls_ << "(declare-fun " << name << " (";
                for (std::size_t i = 0; i < t->args.size(); ++i)
                    decls_ << "(_ BitVec 256) ";
                decls_ << ") (_ BitVec 256))\n";
            }
            keccaks_.push_back(t);
            if (t->args.empty())
                return name;
            std::string r = "(" + name;
            for (std::size_t i = 0; i < t->args.size(); ++i)
                r += " " + a(i);
            return r + ")";
        }
        case Op::ite:
            return "(ite (= " + a(0) + " " + zero + ") " + a(2) + " " + a(1) + ")";
        case Op::constant:
        case Op::var:
            break;
        }
        return opaque(t);
    }

    std::unordered_map<Term, std::string> names_;
    std::map<std::string, unsigned> vars_;
    std::set<std::string> hashes_;
    std::vector<Term> keccaks_;
    std::ostringstream decls_;
    std::ostringstream defs_;
};

struct RunResult
{
    bool finished = false;
    std::string out;
};

/// Runs `command` with `input` on stdin, killing it after `timeout`.
RunResult run(const std::string& command, const std::vector<std::string>& args, const std::string& input,
    std::chrono::milliseconds timeout)
{
    int in[2], out[2];
    if (pipe(in) != 0)
        return {};
    if (pipe(out) != 0)
    {
        close(in[0]);
        close(in[1]);
        return {};
    }
    const pid_t pid = fork();
    if (pid < 0)
        return {};
    if (pid == 0)
    {
        dup2(in[0], 0);
        dup2(out[1], 1);
        close(in[1]);
        close(out[0]);
        std::vector<char*> argv;
        argv.push_back(const_cast<char*>(command.c_str()));
        for (const auto& a : args)
            argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        execvp(command.c_str(), argv.data());
        _exit(127);
    }
    close(in[0]);
    close(out[1]);
    std::thread writer{[fd = in[1], &input] {
        std::size_t done = 0;
        while (done < input.size())
        {
            const auto n = write(fd, input.data() + done, input.size() - done);
            if (n <= 0)
                break;
            done += static_cast<std::size_t>(n);
        }
        close(fd);
    }};
    RunResult r;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    char buf[4096];
    for (;;)
    {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0)
            break;
        pollfd p{out[0], POLLIN, 0};
        if (poll(&p, 1, static_cast<int>(left.count())) <= 0)
            break;
        const auto n = read(out[0], buf, sizeof buf);
        if (n <= 0)
        {
            r.finished = true;
            break;
        }
        r.out.append(buf, static_cast<std::size_t>(n));
    }
    if (!r.finished)
        kill(pid, SIGKILL);
    close(out[0]);
    writer.join();
    int status = 0;
    waitpid(pid, &status, 0);
    return r;
}

word parse_value(const std::string& v)
{
    word w = 0;
    if (v.rfind("#x", 0) == 0)
        for (const auto c : v.substr(2))
            w = (w << 4) | static_cast<unsigned>(std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : std::tolower(c) - 'a' + 10);
    else if (v.rfind("#b", 0) == 0)
        for (const auto c : v.substr(2))
            w = (w << 1) | static_cast<unsigned>(c - '0');
    else
    {
        static const std::regex dec{R"(\(_\s+bv(\d+)\s+\d+\))"};
        std::smatch m;
        if (std::regex_match(v, m, dec))
            w = parse_word(m[1].str());
    }
    return w;
}

class SmtlibBackend final : public SolverBackend
{
public:
    SmtlibBackend(std::string command, std::vector<std::string> args)
      : command_{std::move(command)}, args_{std::move(args)}
    {
    }

    SatResult check(const std::vector<Term>& conjuncts, std::chrono::milliseconds timeout) override
    {
        ++queries_;
        SatResult r;
        std::vector<Term> live;
        for (const auto t : conjuncts)
        {
            if (!t->is_const())
                live.push_back(t);
            else if (t->value == 0)
            {
                r.status = SatStatus::unsatisfiable;
                return r;
            }
        }
        Printer p;
        const auto script = p.script(live);
        const auto out = run(command_, args_, script, timeout);
        if (!out.finished)
            return r;
        std::istringstream lines{out.out};
        std::string first;
        lines >> first;
        if (first == "unsat")
            r.status = SatStatus::unsatisfiable;
        if (first != "sat")
            return r;
        r.status = SatStatus::satisfiable;
        static const std::regex pair{R"(\(\s*(\|[^|]*\||[^\s()]+)\s+(#x[0-9a-fA-F]+|#b[01]+|\(_\s+bv\d+\s+\d+\))\s*\))"};
        const std::string rest{std::istreambuf_iterator<char>{lines}, {}};
        for (std::sregex_iterator it{rest.begin(), rest.end(), pair}, end; it != end; ++it)
        {
            auto name = (*it)[1].str();
            if (name.size() >= 2 && name.front() == '|')
                name = name.substr(1, name.size() - 2);
            r.model[name] = parse_value((*it)[2].str());
        }
        return r;
    }

    [[nodiscard]] std::size_t queries() const override { return queries_; }

private:
    std::string command_;
    std::vector<std::string> args_;
    std::size_t queries_ = 0;
};
}  // namespace

std::unique_ptr<SolverBackend> make_smtlib_backend(std::string command, std::vector<std::string> args)
{
    // A solver exiting early must not kill the analyzer through its stdin pipe.
    std::signal(SIGPIPE, SIG_IGN);
    return std::make_unique<SmtlibBackend>(std::move(command), std::move(args));
}

std::unique_ptr<SolverBackend> make_default_backend()
{
    if (const char* path = std::getenv("RESCAN_SOLVER"); path && *path)
    {
        std::vector<std::string> args;
        if (const char* extra = std::getenv("RESCAN_SOLVER_ARGS"))
        {
            std::istringstream in{extra};
            for (std::string a; in >> a;)
                args.push_back(a);
        }
        else
            args = {"-in", "-smt2"};
        return make_smtlib_backend(path, std::move(args));
    }
    return make_z3_backend();
}

}  // namespace rescan::symexec

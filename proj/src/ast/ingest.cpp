// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/ast/ingest.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace fs = std::filesystem;

namespace rescan::ast
{
namespace
{
using json = nlohmann::json;

const json null_json;

const json& field(const json& n, const char* key)
{
    if (!n.is_object())
        return null_json;
    const auto it = n.find(key);
    return it == n.end() ? null_json : *it;
}

std::string str(const json& n, const char* key)
{
    const auto& v = field(n, key);
    return v.is_string() ? v.get<std::string>() : std::string{};
}

bool flag(const json& n, const char* key)
{
    const auto& v = field(n, key);
    return v.is_boolean() && v.get<bool>();
}

int64_t num(const json& n, const char* key, int64_t fallback = 0)
{
    const auto& v = field(n, key);
    return v.is_number_integer() ? v.get<int64_t>() : fallback;
}

std::string type_of(const json& n)
{
    return str(field(n, "typeDescriptions"), "typeString");
}

bool is_node(const json& n, std::string_view type)
{
    return n.is_object() && str(n, "nodeType") == type;
}

bool starts_with(std::string_view s, std::string_view p)
{
    return s.substr(0, p.size()) == p;
}

/// "contract Foo", "contract Foo payable" and "type(contract Foo)" -> "Foo".
std::string contract_type_name(std::string t)
{
    for (const char* p : {"type(contract ", "type(library ", "type(interface "})
        if (starts_with(t, p))
        {
            t = t.substr(std::string_view{p}.size());
            if (!t.empty() && t.back() == ')')
                t.pop_back();
            return t;
        }
    for (const char* p : {"contract ", "library ", "interface "})
        if (starts_with(t, p))
        {
            t = t.substr(std::string_view{p}.size());
            if (const auto sp = t.find(' '); sp != std::string::npos)
                t.resize(sp);
            return t;
        }
    return {};
}

std::string canonical_type(std::string t)
{
    for (const char* suffix : {" storage ref", " storage pointer", " memory", " calldata", " pointer",
             " ref", " payable"})
    {
        std::size_t pos;
        while ((pos = t.find(suffix)) != std::string::npos)
            t.erase(pos, std::string_view{suffix}.size());
    }
    for (const char* prefix : {"contract ", "struct ", "enum ", "interface ", "library "})
    {
        std::size_t pos;
        while ((pos = t.find(prefix)) != std::string::npos)
            t.erase(pos, std::string_view{prefix}.size());
    }
    return t;
}

std::string collapse_ws(std::string_view s, std::size_t cap = 160)
{
    std::string out;
    bool space = false;
    for (const char c : s)
    {
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r')
        {
            space = !out.empty();
            continue;
        }
        if (space)
            out += ' ';
        space = false;
        out += c;
    }
    if (out.size() > cap)
        out = out.substr(0, cap - 3) + "...";
    return out;
}

// Spans

struct FileText
{
    std::string path;
    std::string content;
    std::vector<std::size_t> line_starts;
};

class Spans
{
public:
    void add(std::size_t index, std::string path, std::string content)
    {
        FileText f{std::move(path), std::move(content), {0}};
        for (std::size_t i = 0; i < f.content.size(); ++i)
            if (f.content[i] == '\n')
                f.line_starts.push_back(i + 1);
        files_[index] = std::move(f);
    }

    [[nodiscard]] SourceSpan make(std::size_t start, std::size_t length, std::size_t file) const
    {
        SourceSpan s;
        s.start = start;
        s.length = length;
        const auto it = files_.find(file);
        if (it == files_.end())
            return s;
        s.file = it->second.path;
        const auto& ls = it->second.line_starts;
        auto line_of = [&](std::size_t off) {
            return static_cast<std::size_t>(std::upper_bound(ls.begin(), ls.end(), off) - ls.begin());
        };
        s.line = line_of(start);
        s.column = start - ls[s.line - 1] + 1;
        s.end_line = line_of(length ? start + length - 1 : start);
        return s;
    }

    /// Parses a "start:length:file" attribute.
    [[nodiscard]] SourceSpan of(const json& node) const
    {
        const auto [start, length, file] = parse(str(node, "src"));
        return make(start, length, file);
    }

    [[nodiscard]] static std::tuple<std::size_t, std::size_t, std::size_t> parse(const std::string& src)
    {
        std::size_t a = 0, b = 0, c = 0;
        std::sscanf(src.c_str(), "%zu:%zu:%zu", &a, &b, &c);
        return {a, b, c};
    }

    [[nodiscard]] std::string_view text(std::size_t start, std::size_t length, std::size_t file) const
    {
        const auto it = files_.find(file);
        if (it == files_.end() || start > it->second.content.size())
            return {};
        return std::string_view{it->second.content}.substr(start, length);
    }

    [[nodiscard]] std::string render(const json& node) const
    {
        const auto [start, length, file] = parse(str(node, "src"));
        return collapse_ws(text(start, length, file), 1000);
    }

private:
    std::map<std::size_t, FileText> files_;
};

// Declaration index

struct Index
{
    std::map<int64_t, const json*> decls;
    std::map<int64_t, int64_t> scope_contract;  ///< decl -> enclosing contract
    std::vector<const json*> contracts;         ///< source order

    void add(const json& n, int64_t contract)
    {
        if (n.is_object())
        {
            const auto type = str(n, "nodeType");
            if (n.contains("id") && n["id"].is_number_integer())
            {
                const auto id = n["id"].get<int64_t>();
                if (type == "ContractDefinition")
                {
                    contracts.push_back(&n);
                    contract = id;
                }
                decls[id] = &n;
                scope_contract[id] = contract;
            }
            for (const auto& [k, v] : n.items())
                if (v.is_structured())
                    add(v, contract);
        }
        else if (n.is_array())
        {
            for (const auto& v : n)
                add(v, contract);
        }
    }

    [[nodiscard]] const json* find(int64_t id) const
    {
        const auto it = decls.find(id);
        return it == decls.end() ? nullptr : it->second;
    }

    [[nodiscard]] const json* contract_of(int64_t decl) const
    {
        const auto it = scope_contract.find(decl);
        return it == scope_contract.end() ? nullptr : find(it->second);
    }
};

std::string function_kind(const json& fn, const std::string& contract_name)
{
    if (const auto k = str(fn, "kind"); !k.empty())
        return k == "freeFunction" ? "function" : k;
    if (flag(fn, "isConstructor") || str(fn, "name") == contract_name)
        return "constructor";
    return str(fn, "name").empty() ? "fallback" : "function";
}

std::string function_name(const json& fn, const std::string& contract_name)
{
    const auto kind = function_kind(fn, contract_name);
    return kind == "function" ? str(fn, "name") : kind;
}

std::string signature(const json& fn)
{
    std::string sig;
    for (const auto& p : field(field(fn, "parameters"), "parameters"))
    {
        if (!sig.empty())
            sig += ',';
        sig += canonical_type(type_of(p));
    }
    return sig;
}

std::string mutability(const json& fn)
{
    if (const auto m = str(fn, "stateMutability"); !m.empty())
        return m;
    if (flag(fn, "constant"))
        return "view";
    return flag(fn, "payable") ? "payable" : "nonpayable";
}

std::vector<Param> params_of(const json& list)
{
    std::vector<Param> out;
    for (const auto& p : field(list, "parameters"))
        out.push_back({num(p, "id"), str(p, "name"), canonical_type(type_of(p))});
    return out;
}

// Loader

struct Instance
{
    std::string name;
    const json* node = nullptr;
    std::vector<const json*> linearization;  ///< most derived first
    std::map<int64_t, StateVar> state;
    std::size_t file = 0;
};

struct Pending
{
    NodeId from;
    FlowKind kind;
};
using PendingList = std::vector<Pending>;

class Loader
{
public:
    Loader(ContractModel& model, Spans& spans, Index& index) : m_{model}, spans_{spans}, ix_{index} {}

    void run(const json& output)
    {
        for (const auto* c : ix_.contracts)
            add_contract(*c, output);
        for (auto& inst : instances_)
            instantiate_contract(inst);
        while (!work_.empty())
        {
            auto [inst, decl, id] = work_.back();
            work_.pop_back();
            if (!m_.functions.contains(id))
                build_function(*inst, *ix_.find(decl), id, true);
        }
    }

    [[nodiscard]] const Spans& spans() const { return spans_; }
    [[nodiscard]] const Index& index() const { return ix_; }
    ContractModel& model() { return m_; }

    /// Id of the function `decl` resolves to when called from `inst`.
    /// `after` restricts the search to bases after that contract (super calls).
    std::string resolve_internal(const Instance& inst, int64_t decl, const json* after = nullptr,
        const json* exact = nullptr)
    {
        const auto* fn = ix_.find(decl);
        const auto* owner = ix_.contract_of(decl);
        if (!fn || !is_node(*fn, "FunctionDefinition") || !owner)
            return {};
        if (str(*owner, "contractKind") == "library")
            return str(*owner, "name") + "." + function_name(*fn, str(*owner, "name")) + "(" +
                   signature(*fn) + ")";
        const auto name = function_name(*fn, str(*owner, "name"));
        const auto sig = signature(*fn);
        const auto& lin = inst.linearization;
        auto start = lin.begin();
        if (after)
        {
            start = std::find(lin.begin(), lin.end(), after);
            if (start == lin.end())
                return {};
            ++start;
        }
        if (exact)
        {
            start = std::find(lin.begin(), lin.end(), exact);
            if (start == lin.end())
                return {};
        }
        if (!after && !exact)
            return inst.name + "." + name + "(" + sig + ")";
        for (auto it = start; it != lin.end(); ++it)
            for (const auto& sub : field(**it, "nodes"))
                if (is_node(sub, "FunctionDefinition") &&
                    function_name(sub, str(**it, "name")) == name && signature(sub) == sig &&
                    field(sub, "body").is_object())
                {
                    const auto main_id = inst.name + "." + name + "(" + sig + ")";
                    if (main_decl_[main_id] == num(sub, "id"))
                        return main_id;
                    const auto id = main_id + "@" + str(**it, "name");
                    work_.emplace_back(&inst, num(sub, "id"), id);
                    return id;
                }
        return {};
    }

    const Instance* instance(const std::string& name) const
    {
        for (const auto& i : instances_)
            if (i.name == name)
                return &i;
        return nullptr;
    }

private:
    void add_contract(const json& c, const json& output);
    void instantiate_contract(Instance& inst);
    void build_function(const Instance& inst, const json& fn, const std::string& id, bool super_instance);

    ContractModel& m_;
    Spans& spans_;
    Index& ix_;
    std::vector<Instance> instances_;
    std::map<std::string, int64_t> main_decl_;
    std::vector<std::tuple<const Instance*, int64_t, std::string>> work_;

    friend class FnBuilder;
};

void Loader::add_contract(const json& c, const json& output)
{
    Instance inst;
    inst.name = str(c, "name");
    inst.node = &c;
    inst.file = std::get<2>(Spans::parse(str(c, "src")));
    for (const auto& id : field(c, "linearizedBaseContracts"))
        if (const auto* base = ix_.find(id.get<int64_t>()))
            inst.linearization.push_back(base);
    if (inst.linearization.empty())
        inst.linearization.push_back(&c);

    Contract out;
    out.name = inst.name;
    out.kind = str(c, "contractKind");
    if (out.kind.empty())
        out.kind = flag(c, "isLibrary") ? "library" : "contract";
    out.is_abstract = flag(c, "abstract") ||
                      (field(c, "fullyImplemented").is_boolean() && !flag(c, "fullyImplemented"));
    out.ast_id = num(c, "id");
    out.file = spans_.of(c).file;
    for (const auto* base : inst.linearization)
        out.linearized_bases.push_back(str(*base, "name"));

    // Storage order: most base first.
    for (auto it = inst.linearization.rbegin(); it != inst.linearization.rend(); ++it)
        for (const auto& sub : field(**it, "nodes"))
        {
            if (!is_node(sub, "VariableDeclaration"))
                continue;
            StateVar v;
            v.decl_id = num(sub, "id");
            v.name = str(sub, "name");
            v.type = canonical_type(type_of(sub));
            v.declaring_contract = str(**it, "name");
            const auto mut = str(sub, "mutability");
            v.constant = mut == "constant" || flag(sub, "constant");
            v.immutable = mut == "immutable";
            v.has_initializer = field(sub, "value").is_object();
            inst.state[v.decl_id] = v;
            out.state_vars.push_back(v);
        }
    for (const auto* base : inst.linearization)
        for (const auto& sub : field(*base, "nodes"))
            if (is_node(sub, "ModifierDefinition") &&
                std::find(out.modifiers.begin(), out.modifiers.end(), str(sub, "name")) ==
                    out.modifiers.end())
                out.modifiers.push_back(str(sub, "name"));

    const auto& contracts = field(output, "contracts");
    if (contracts.is_object())
        for (const auto& [file, per_file] : contracts.items())
        {
            if (file != out.file || !per_file.contains(out.name))
                continue;
            const auto& evm = field(per_file[out.name], "evm");
            out.runtime_bytecode = str(field(evm, "deployedBytecode"), "object");
            out.source_map = str(field(evm, "deployedBytecode"), "sourceMap");
            if (const auto& ids = field(evm, "methodIdentifiers"); ids.is_object())
                for (const auto& [sig, sel] : ids.items())
                    out.method_identifiers[sig] = sel.get<std::string>();
            const auto& layout = field(per_file[out.name], "storageLayout");
            const auto& types = field(layout, "types");
            for (const auto& e : field(layout, "storage"))
            {
                ast::StorageSlot slot;
                slot.name = str(e, "label");
                auto decl = str(e, "contract");
                slot.declaring_contract = decl.substr(decl.rfind(':') + 1);
                slot.slot = std::stoull(str(e, "slot"));
                slot.offset = static_cast<std::size_t>(num(e, "offset"));
                if (const auto& t = field(types, str(e, "type").c_str()); t.is_object())
                {
                    slot.type = str(t, "label");
                    slot.size = std::stoull(str(t, "numberOfBytes"));
                }
                out.storage_layout.push_back(std::move(slot));
            }
        }
    m_.contracts.push_back(std::move(out));
    instances_.push_back(std::move(inst));
}

void Loader::instantiate_contract(Instance& inst)
{
    std::set<std::string> seen;
    for (const auto* base : inst.linearization)
        for (const auto& sub : field(*base, "nodes"))
        {
            if (!is_node(sub, "FunctionDefinition"))
                continue;
            const auto kind = function_kind(sub, str(*base, "name"));
            if (kind == "constructor" && base != inst.node)
                continue;
            const auto id = inst.name + "." + function_name(sub, str(*base, "name")) + "(" +
                            signature(sub) + ")";
            if (!seen.insert(id).second)
                continue;
            main_decl_[id] = num(sub, "id");
        }
    seen.clear();
    for (const auto* base : inst.linearization)
        for (const auto& sub : field(*base, "nodes"))
        {
            if (!is_node(sub, "FunctionDefinition"))
                continue;
            const auto kind = function_kind(sub, str(*base, "name"));
            if (kind == "constructor" && base != inst.node)
                continue;
            const auto id = inst.name + "." + function_name(sub, str(*base, "name")) + "(" +
                            signature(sub) + ")";
            if (!seen.insert(id).second)
                continue;
            build_function(inst, sub, id, false);
            for (auto& c : m_.contracts)
                if (c.name == inst.name)
                    c.functions.push_back(id);
        }
}

// Function body builder

class FnBuilder
{
public:
    FnBuilder(Loader& loader, const Instance& inst, Function& f, const json& fn)
      : L_{loader}, sp_{loader.spans_}, ix_{loader.ix_}, inst_{inst}, f_{f}, fn_{fn}
    {
        for (const auto& p : field(field(fn, "parameters"), "parameters"))
            params_.insert(num(p, "id"));
        for (const auto* base : inst.linearization)
            if (base == ix_.contract_of(num(fn, "id")))
                declaring_ = base;
    }

    void build()
    {
        f_.entry = new_node(StatementKind::entry, entry_span(), fn_);
        f_.exit = new_node(StatementKind::exit, exit_span(), fn_);
        node(f_.entry).text = collapse_ws(sp_.text(entry_span().start, entry_span().length,
            std::get<2>(Spans::parse(str(fn_, "src")))));
        node(f_.exit).text = "exit " + f_.name;
        PendingList in{{f_.entry, FlowKind::sequential}};
        const auto& body = field(fn_, "body");
        if (body.is_object())
        {
            collect_modifiers();
            in = modifiers(0, in);
        }
        connect(in, f_.exit);
        std::vector<NodeId> ordered;
        for (const auto id : f_.nodes)
            if (id != f_.exit)
                ordered.push_back(id);
        ordered.push_back(f_.exit);
        f_.nodes = std::move(ordered);
    }

private:
    struct Loop
    {
        PendingList breaks;
        PendingList continues;
    };

    StatementNode& node(NodeId id) { return L_.m_.nodes[id]; }

    std::size_t file_of(const json& n) const { return std::get<2>(Spans::parse(str(n, "src"))); }

    SourceSpan entry_span() const
    {
        const auto [start, len, file] = Spans::parse(str(fn_, "src"));
        const auto& body = field(fn_, "body");
        if (!body.is_object())
            return sp_.make(start, len, file);
        const auto body_start = std::get<0>(Spans::parse(str(body, "src")));
        auto end = body_start;
        const auto text = sp_.text(start, body_start - start, file);
        while (end > start && (text[end - start - 1] == ' ' || text[end - start - 1] == '\n' ||
                                  text[end - start - 1] == '\t' || text[end - start - 1] == '\r'))
            --end;
        return sp_.make(start, end - start, file);
    }

    SourceSpan exit_span() const
    {
        const auto [start, len, file] = Spans::parse(str(fn_, "src"));
        return sp_.make(len ? start + len - 1 : start, len ? 1 : 0, file);
    }

    /// Span from the start of `n` up to (excluding) the start of `until`.
    SourceSpan head_span(const json& n, const json& until) const
    {
        const auto [start, len, file] = Spans::parse(str(n, "src"));
        if (!until.is_object())
            return sp_.make(start, len, file);
        const auto stop = std::get<0>(Spans::parse(str(until, "src")));
        auto end = stop > start ? stop : start + len;
        const auto text = sp_.text(start, end - start, file);
        while (end > start && std::isspace(static_cast<unsigned char>(text[end - start - 1])))
            --end;
        return sp_.make(start, end - start, file);
    }

    NodeId new_node(StatementKind kind, const SourceSpan& span, const json& ast)
    {
        StatementNode n;
        n.id = L_.m_.nodes.size();
        n.function = f_.id;
        n.kind = kind;
        n.span = span;
        n.ast_id = num(ast, "id");
        n.from_modifier = modifier_stack_.empty() ? std::string{} : modifier_stack_.back();
        const auto [start, len, file] = std::tuple{span.start, span.length, file_of(ast)};
        n.text = collapse_ws(sp_.text(start, len, file));
        L_.m_.nodes.push_back(std::move(n));
        f_.nodes.push_back(L_.m_.nodes.back().id);
        return L_.m_.nodes.back().id;
    }

    void connect(const PendingList& in, NodeId to)
    {
        for (const auto& p : in)
        {
            auto& succ = node(p.from).successors;
            const Flow fl{to, p.kind};
            if (std::find(succ.begin(), succ.end(), fl) == succ.end())
                succ.push_back(fl);
        }
    }

    // Modifiers

    void collect_modifiers()
    {
        for (const auto& inv : field(fn_, "modifiers"))
        {
            const auto& name_node = field(inv, "modifierName");
            const auto decl = num(name_node, "referencedDeclaration", -1);
            const auto* d = ix_.find(decl);
            if (!d || !is_node(*d, "ModifierDefinition"))
                continue;  // base constructor arguments
            const auto name = str(*d, "name");
            const json* chosen = d;
            for (const auto* base : inst_.linearization)
            {
                bool found = false;
                for (const auto& sub : field(*base, "nodes"))
                    if (is_node(sub, "ModifierDefinition") && str(sub, "name") == name)
                    {
                        chosen = &sub;
                        found = true;
                        break;
                    }
                if (found)
                    break;
            }
            mods_.emplace_back(&inv, chosen);
            f_.modifiers.push_back(name);
        }
    }

    PendingList modifiers(std::size_t k, PendingList in)
    {
        if (k == mods_.size())
        {
            modifier_stack_.push_back({});
            auto out = stmt(field(fn_, "body"), std::move(in));
            modifier_stack_.pop_back();
            return out;
        }
        const auto& [inv, def] = mods_[k];
        modifier_stack_.push_back(str(*def, "name"));
        const auto& params = field(field(*def, "parameters"), "parameters");
        const auto& args = field(*inv, "arguments");
        for (std::size_t i = 0; i < params.size() && args.is_array() && i < args.size(); ++i)
        {
            if (in.empty())
                break;
            const auto n = new_node(StatementKind::assignment, sp_.of(*inv), *inv);
            connect(in, n);
            VarRef v{VarScope::local, f_.id, num(params[i], "id"), str(params[i], "name"), {}, false};
            node(n).writes.insert(v);
            local_sources_[v] = sources(args[i]);
            visit(args[i], n);
            finalize(n, StatementKind::assignment);
            in = {{n, FlowKind::sequential}};
        }
        placeholders_.push_back(k + 1);
        auto out = stmt(field(*def, "body"), std::move(in));
        placeholders_.pop_back();
        modifier_stack_.pop_back();
        return out;
    }

    // Statements

    static bool unconditionally_reverts(const json& s)
    {
        const auto type = str(s, "nodeType");
        if (type == "RevertStatement" || type == "Throw")
            return true;
        if (type == "ExpressionStatement")
        {
            const auto& e = field(s, "expression");
            return is_node(e, "FunctionCall") && is_node(field(e, "expression"), "Identifier") &&
                   str(field(e, "expression"), "name") == "revert";
        }
        if (type == "Block" || type == "UncheckedBlock")
        {
            for (const auto& st : field(s, "statements"))
            {
                if (unconditionally_reverts(st))
                    return true;
                const auto t = str(st, "nodeType");
                if (t == "Return" || t == "Break" || t == "Continue" || t == "IfStatement" ||
                    t == "ForStatement" || t == "WhileStatement" || t == "DoWhileStatement" ||
                    t == "TryStatement" || t == "PlaceholderStatement" || t == "InlineAssembly")
                    return false;
            }
            return false;
        }
        if (type == "IfStatement")
            return field(s, "falseBody").is_object() && unconditionally_reverts(field(s, "trueBody")) &&
                   unconditionally_reverts(field(s, "falseBody"));
        return false;
    }

    PendingList stmt(const json& s, PendingList in)
    {
        if (!s.is_object() || in.empty())
            return in;
        const auto type = str(s, "nodeType");
        if (type == "Block" || type == "UncheckedBlock")
        {
            for (const auto& st : field(s, "statements"))
                in = stmt(st, std::move(in));
            return in;
        }
        if (type == "PlaceholderStatement")
        {
            if (placeholders_.empty())
                return in;
            const auto next = placeholders_.back();
            placeholders_.pop_back();
            return_sinks_.emplace_back();
            auto out = modifiers(next, std::move(in));
            auto sink = std::move(return_sinks_.back());
            return_sinks_.pop_back();
            placeholders_.push_back(next);
            out.insert(out.end(), sink.begin(), sink.end());
            return out;
        }
        if (type == "IfStatement")
            return if_stmt(s, std::move(in));
        if (type == "WhileStatement" || type == "ForStatement")
            return loop_stmt(s, std::move(in));
        if (type == "DoWhileStatement")
            return do_while_stmt(s, std::move(in));
        if (type == "Break")
        {
            if (!loops_.empty())
                loops_.back().breaks.insert(loops_.back().breaks.end(), in.begin(), in.end());
            return {};
        }
        if (type == "Continue")
        {
            if (!loops_.empty())
                loops_.back().continues.insert(loops_.back().continues.end(), in.begin(), in.end());
            return {};
        }
        if (type == "TryStatement")
            return try_stmt(s, std::move(in));
        return simple_stmt(s, std::move(in));
    }

    PendingList simple_stmt(const json& s, PendingList in)
    {
        const auto type = str(s, "nodeType");
        const auto n = new_node(StatementKind::other, sp_.of(s), s);
        connect(in, n);
        StatementKind base = StatementKind::other;
        if (type == "ExpressionStatement")
        {
            visit(field(s, "expression"), n);
        }
        else if (type == "VariableDeclarationStatement")
        {
            declare(s, n);
        }
        else if (type == "EmitStatement")
        {
            visit(field(s, "eventCall"), n);
        }
        else if (type == "Return")
        {
            visit(field(s, "expression"), n);
            base = StatementKind::return_;
        }
        else if (type == "RevertStatement")
        {
            visit(field(s, "errorCall"), n);
            node(n).reverts = true;
        }
        else if (type == "Throw")
        {
            node(n).reverts = true;
        }
        else if (type == "InlineAssembly")
        {
            node(n).opaque = true;
            for (const auto& [id, v] : inst_.state)
            {
                VarRef r{VarScope::state, inst_.name, id, v.name, {}, false};
                node(n).reads.insert(r);
                node(n).writes.insert(r);
            }
        }
        else
        {
            visit_children(s, n);
        }
        if (check_)
            base = StatementKind::condition_check;
        finalize(n, base);
        const bool was_check = check_;
        check_ = false;

        if (node(n).reverts)
        {
            connect({{n, FlowKind::revert}}, f_.exit);
            return {};
        }
        if (was_check)
        {
            node(n).is_branch = true;
            connect({{n, FlowKind::revert}}, f_.exit);
            return {{n, FlowKind::branch_true}};
        }
        if (type == "Return")
        {
            if (!return_sinks_.empty())
                return_sinks_.back().push_back({n, FlowKind::sequential});
            else
                connect({{n, FlowKind::sequential}}, f_.exit);
            return {};
        }
        return {{n, FlowKind::sequential}};
    }

    PendingList if_stmt(const json& s, PendingList in)
    {
        const auto& t = field(s, "trueBody");
        const auto n = new_node(StatementKind::other, head_span(s, t), s);
        connect(in, n);
        const auto& cond = field(s, "condition");
        visit(cond, n);
        check_ = false;
        node(n).is_branch = true;
        const bool guard = unconditionally_reverts(t);
        if (guard)
            node(n).sender_guard = sender_guard(cond, true);
        finalize(n, guard ? StatementKind::condition_check : StatementKind::other);
        auto out = stmt(t, {{n, FlowKind::branch_true}});
        const auto& f = field(s, "falseBody");
        auto other = f.is_object() ? stmt(f, {{n, FlowKind::branch_false}}) :
                                     PendingList{{n, FlowKind::branch_false}};
        out.insert(out.end(), other.begin(), other.end());
        return out;
    }

    PendingList loop_stmt(const json& s, PendingList in)
    {
        const bool is_for = str(s, "nodeType") == "ForStatement";
        if (is_for)
            in = stmt(field(s, "initializationExpression"), std::move(in));
        if (in.empty())
            return in;
        const auto& body = field(s, "body");
        const auto h = new_node(StatementKind::loop_header, head_span(s, body), s);
        connect(in, h);
        const auto& cond = field(s, "condition");
        visit(cond, h);
        check_ = false;
        node(h).is_branch = cond.is_object();
        finalize(h, StatementKind::loop_header);

        loops_.emplace_back();
        const auto enter = cond.is_object() ? FlowKind::branch_true : FlowKind::sequential;
        auto out = stmt(body, {{h, enter}});
        auto loop = std::move(loops_.back());
        loops_.pop_back();
        out.insert(out.end(), loop.continues.begin(), loop.continues.end());
        if (is_for)
            out = stmt(field(s, "loopExpression"), std::move(out));
        connect(out, h);
        PendingList exit = std::move(loop.breaks);
        if (cond.is_object())
            exit.push_back({h, FlowKind::branch_false});
        return exit;
    }

    PendingList do_while_stmt(const json& s, PendingList in)
    {
        const auto first = L_.m_.nodes.size();
        loops_.emplace_back();
        auto out = stmt(field(s, "body"), std::move(in));
        auto loop = std::move(loops_.back());
        loops_.pop_back();
        out.insert(out.end(), loop.continues.begin(), loop.continues.end());
        if (out.empty())
            return loop.breaks;
        const auto& cond = field(s, "condition");
        const auto h = new_node(StatementKind::loop_header, sp_.of(cond), s);
        connect(out, h);
        visit(cond, h);
        check_ = false;
        node(h).is_branch = true;
        finalize(h, StatementKind::loop_header);
        connect({{h, FlowKind::branch_true}}, first < h ? first : h);
        loop.breaks.push_back({h, FlowKind::branch_false});
        return loop.breaks;
    }

    PendingList try_stmt(const json& s, PendingList in)
    {
        const auto& call = field(s, "externalCall");
        const auto [start, len, file] = Spans::parse(str(s, "src"));
        const auto [cs, cl, cf] = Spans::parse(str(call, "src"));
        const auto n = new_node(StatementKind::other, sp_.make(start, cs + cl - start, file), s);
        connect(in, n);
        visit(call, n);
        check_ = false;
        node(n).is_branch = true;
        finalize(n, StatementKind::other);
        PendingList out;
        bool first = true;
        for (const auto& clause : field(s, "clauses"))
        {
            PendingList arm{{n, first ? FlowKind::branch_true : FlowKind::branch_false}};
            const auto& params = field(field(clause, "parameters"), "parameters");
            if (params.is_array() && !params.empty())
            {
                const auto p = new_node(StatementKind::assignment, sp_.of(field(clause, "parameters")), clause);
                connect(arm, p);
                for (const auto& d : params)
                {
                    VarRef v{VarScope::local, f_.id, num(d, "id"), str(d, "name"), {}, false};
                    node(p).writes.insert(v);
                    local_sources_[v] = {TaintSource{TaintSource::Kind::call, {}}};
                }
                finalize(p, StatementKind::assignment);
                arm = {{p, FlowKind::sequential}};
            }
            auto o = stmt(field(clause, "block"), std::move(arm));
            out.insert(out.end(), o.begin(), o.end());
            first = false;
        }
        return out;
    }

    void finalize(NodeId id, StatementKind base)
    {
        auto& n = node(id);
        const bool message = std::any_of(n.calls.begin(), n.calls.end(),
            [](const CallSite& c) { return c.is_message_call(); });
        const bool internal = !n.calls.empty() && !message;
        const bool state_write = std::any_of(n.writes.begin(), n.writes.end(),
            [](const VarRef& v) { return v.scope == VarScope::state; });
        const bool state_read = std::any_of(n.reads.begin(), n.reads.end(),
            [](const VarRef& v) { return v.scope == VarScope::state; });
        if (base == StatementKind::condition_check)
            n.kind = base;
        else if (message)
            n.kind = StatementKind::external_call;
        else if (internal)
            n.kind = StatementKind::internal_call;
        else if (base == StatementKind::return_ || base == StatementKind::loop_header)
            n.kind = base;
        else if (state_write)
            n.kind = StatementKind::state_write;
        else if (!n.writes.empty())
            n.kind = StatementKind::assignment;
        else if (state_read)
            n.kind = StatementKind::state_read;
        else
            n.kind = base == StatementKind::assignment ? base : StatementKind::other;
    }

    // Expressions

    std::optional<VarRef> var_of(int64_t decl)
    {
        if (const auto it = aliases_.find(decl); it != aliases_.end())
            return it->second;
        if (const auto it = inst_.state.find(decl); it != inst_.state.end())
            return VarRef{VarScope::state, inst_.name, decl, it->second.name, {}, false};
        const auto* d = ix_.find(decl);
        if (!d || !is_node(*d, "VariableDeclaration"))
            return std::nullopt;
        if (flag(*d, "stateVariable"))
        {
            const auto* owner = ix_.contract_of(decl);
            return VarRef{VarScope::state, owner ? str(*owner, "name") : std::string{}, decl,
                str(*d, "name"), {}, false};
        }
        return VarRef{params_.contains(decl) ? VarScope::param : VarScope::local, f_.id, decl,
            str(*d, "name"), {}, false};
    }

    bool is_constant_state(const VarRef& v) const
    {
        if (v.scope != VarScope::state)
            return false;
        const auto* d = ix_.find(v.decl_id);
        if (!d)
            return false;
        const auto mut = str(*d, "mutability");
        return mut == "constant" || mut == "immutable" || flag(*d, "constant");
    }

    static bool is_builtin(const json& id, std::string_view name)
    {
        return is_node(id, "Identifier") && str(id, "name") == name;
    }

    static bool is_msg_sender(const json& e)
    {
        if (is_node(e, "FunctionCall") && str(e, "kind") == "typeConversion")
        {
            const auto& args = field(e, "arguments");
            return args.is_array() && args.size() == 1 && is_msg_sender(args[0]);
        }
        return is_node(e, "MemberAccess") && str(e, "memberName") == "sender" &&
               is_builtin(field(e, "expression"), "msg");
    }

    void append_key(VarRef& v, const std::string& part, bool constant)
    {
        v.key_constant = v.key ? v.key_constant && constant : constant;
        v.key = v.key ? *v.key + "][" + part : part;
    }

    std::optional<VarRef> lvalue(const json& e, std::set<VarRef>& key_reads)
    {
        const auto type = str(e, "nodeType");
        if (type == "Identifier")
            return var_of(num(e, "referencedDeclaration", -1));
        if (type == "IndexAccess")
        {
            auto base = lvalue(field(e, "baseExpression"), key_reads);
            if (!base)
                return std::nullopt;
            const auto& idx = field(e, "indexExpression");
            if (idx.is_object())
            {
                collect_reads(idx, key_reads);
                append_key(*base, sp_.render(idx), flag(idx, "isPure") || is_node(idx, "Literal"));
            }
            else
            {
                append_key(*base, "", false);
            }
            return base;
        }
        if (type == "MemberAccess")
        {
            const auto& inner = field(e, "expression");
            auto base = lvalue(inner, key_reads);
            if (!base)
                return std::nullopt;
            if (starts_with(type_of(inner), "struct "))
                append_key(*base, "." + str(e, "memberName"), true);
            return base;
        }
        if (type == "TupleExpression" && !flag(e, "isInlineArray"))
        {
            const auto& comps = field(e, "components");
            if (comps.is_array() && comps.size() == 1)
                return lvalue(comps[0], key_reads);
        }
        return std::nullopt;
    }

    /// Reads of `e` without recording calls or writes; for key expressions.
    void collect_reads(const json& e, std::set<VarRef>& out)
    {
        if (!e.is_object())
            return;
        const auto type = str(e, "nodeType");
        if (type == "Identifier" || type == "IndexAccess" || type == "MemberAccess")
        {
            std::set<VarRef> keys;
            if (auto v = lvalue(e, keys))
            {
                out.insert(*v);
                out.insert(keys.begin(), keys.end());
                return;
            }
        }
        for (const auto& [k, v] : e.items())
        {
            if (k == "typeDescriptions" || k == "typeName")
                continue;
            if (v.is_object() && v.contains("nodeType"))
                collect_reads(v, out);
            else if (v.is_array())
                for (const auto& c : v)
                    if (c.is_object())
                        collect_reads(c, out);
        }
    }

    std::vector<TaintSource> sources(const json& e)
    {
        using K = TaintSource::Kind;
        std::vector<TaintSource> out;
        if (!e.is_object())
            return out;
        const auto type = str(e, "nodeType");
        auto from_var = [&](const VarRef& v) {
            if (is_constant_state(v))
                return TaintSource{K::constant, {}};
            VarRef whole = v;
            if (v.scope != VarScope::state)
            {
                whole.key.reset();
                whole.key_constant = false;
            }
            return TaintSource{K::variable, whole};
        };
        if (type == "Literal" || type == "ElementaryTypeNameExpression" || type == "NewExpression")
            return {{K::constant, {}}};
        if (type == "Identifier")
        {
            if (str(e, "name") == "this")
                return {{K::constant, {}}};
            if (auto v = var_of(num(e, "referencedDeclaration", -1)))
                return {from_var(*v)};
            return {{K::constant, {}}};
        }
        if (type == "MemberAccess")
        {
            const auto& inner = field(e, "expression");
            if (is_builtin(inner, "msg") || is_builtin(inner, "tx"))
                return {{K::user, {}}};
            if (is_builtin(inner, "block"))
                return {{K::constant, {}}};
        }
        if (type == "MemberAccess" || type == "IndexAccess")
        {
            std::set<VarRef> keys;
            if (auto v = lvalue(e, keys))
                return {from_var(*v)};
        }
        if (type == "FunctionCall")
        {
            const auto kind = str(e, "kind");
            const auto& args = field(e, "arguments");
            if (kind == "typeConversion" || flag(e, "type_conversion"))
                return args.is_array() && !args.empty() ? sources(args[0]) :
                                                          std::vector<TaintSource>{{K::constant, {}}};
            if (kind == "structConstructorCall")
            {
                for (const auto& a : args)
                    for (auto& s : sources(a))
                        out.push_back(s);
                return out;
            }
            return {{K::call, {}}};
        }
        for (const auto& [k, v] : e.items())
        {
            if (k == "typeDescriptions" || k == "typeName")
                continue;
            auto add = [&](const json& c) {
                if (c.is_object() && c.contains("nodeType"))
                    for (auto& s : sources(c))
                        out.push_back(s);
            };
            if (v.is_object())
                add(v);
            else if (v.is_array())
                for (const auto& c : v)
                    add(c);
        }
        if (out.empty())
            out.push_back({K::constant, {}});
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    void record_assignment(const VarRef& v, std::vector<TaintSource> src)
    {
        if (v.scope == VarScope::state)
            return;
        VarRef whole = v;
        whole.key.reset();
        whole.key_constant = false;
        auto& dst = local_sources_[whole];
        dst.insert(dst.end(), src.begin(), src.end());
    }

    void write_lvalue(const json& lhs, NodeId n, bool also_read, const std::vector<TaintSource>& src)
    {
        std::set<VarRef> keys;
        if (auto v = lvalue(lhs, keys))
        {
            node(n).writes.insert(*v);
            if (also_read)
                node(n).reads.insert(*v);
            node(n).reads.insert(keys.begin(), keys.end());
            record_assignment(*v, src);
        }
        else
        {
            visit(lhs, n);
        }
    }

    void declare(const json& s, NodeId n)
    {
        const auto& decls = field(s, "declarations");
        const auto& init = field(s, "initialValue");
        for (std::size_t i = 0; decls.is_array() && i < decls.size(); ++i)
        {
            const auto& d = decls[i];
            if (!d.is_object())
                continue;
            VarRef v{VarScope::local, f_.id, num(d, "id"), str(d, "name"), {}, false};
            node(n).writes.insert(v);
            std::vector<TaintSource> src{{TaintSource::Kind::constant, {}}};
            if (init.is_object())
            {
                if (is_node(init, "TupleExpression") && decls.size() > 1 &&
                    i < field(init, "components").size())
                    src = sources(field(init, "components")[i]);
                else
                    src = sources(init);
            }
            record_assignment(v, src);
            // Storage pointers alias the location they were initialized from.
            if (str(d, "storageLocation") == "storage" && init.is_object() && decls.size() == 1)
            {
                std::set<VarRef> keys;
                if (auto target = lvalue(init, keys))
                    aliases_[v.decl_id] = *target;
            }
        }
        visit(init, n);
    }

    void visit_children(const json& e, NodeId n)
    {
        for (const auto& [k, v] : e.items())
        {
            if (k == "typeDescriptions" || k == "typeName" || k == "argumentTypes")
                continue;
            if (v.is_object() && v.contains("nodeType"))
                visit(v, n);
            else if (v.is_array())
                for (const auto& c : v)
                    if (c.is_object() && c.contains("nodeType"))
                        visit(c, n);
        }
    }

    void visit(const json& e, NodeId n)
    {
        if (!e.is_object())
            return;
        const auto type = str(e, "nodeType");
        if (type == "Literal" || type == "ElementaryTypeNameExpression" || type == "NewExpression")
            return;
        if (type == "Identifier")
        {
            if (auto v = var_of(num(e, "referencedDeclaration", -1)))
                node(n).reads.insert(*v);
            return;
        }
        if (type == "IndexAccess" || type == "MemberAccess")
        {
            if (type == "MemberAccess")
            {
                const auto& inner = field(e, "expression");
                if (is_builtin(inner, "msg") || is_builtin(inner, "tx") || is_builtin(inner, "block"))
                    return;
            }
            std::set<VarRef> keys;
            if (auto v = lvalue(e, keys))
            {
                node(n).reads.insert(*v);
                node(n).reads.insert(keys.begin(), keys.end());
                return;
            }
            visit_children(e, n);
            return;
        }
        if (type == "Assignment")
        {
            const auto& lhs = field(e, "leftHandSide");
            const auto& rhs = field(e, "rightHandSide");
            const bool compound = str(e, "operator") != "=";
            if (is_node(lhs, "TupleExpression"))
            {
                const auto& comps = field(lhs, "components");
                const bool tuple_rhs = is_node(rhs, "TupleExpression");
                for (std::size_t i = 0; i < comps.size(); ++i)
                {
                    if (!comps[i].is_object())
                        continue;
                    auto src = tuple_rhs && i < field(rhs, "components").size() ?
                                   sources(field(rhs, "components")[i]) :
                                   sources(rhs);
                    write_lvalue(comps[i], n, compound, src);
                }
            }
            else
            {
                write_lvalue(lhs, n, compound, sources(rhs));
            }
            visit(rhs, n);
            return;
        }
        if (type == "UnaryOperation")
        {
            const auto op = str(e, "operator");
            const auto& sub = field(e, "subExpression");
            if (op == "++" || op == "--" || op == "delete")
            {
                write_lvalue(sub, n, op != "delete", sources(sub));
                return;
            }
            visit(sub, n);
            return;
        }
        if (type == "FunctionCall")
        {
            call(e, n);
            return;
        }
        visit_children(e, n);
    }

    void visit_args(const json& args, NodeId n)
    {
        if (args.is_array())
            for (const auto& a : args)
                visit(a, n);
    }

    std::optional<VarRef> sender_guard(const json& cond, bool negated)
    {
        const auto type = str(cond, "nodeType");
        if (type == "UnaryOperation" && str(cond, "operator") == "!")
            return sender_guard(field(cond, "subExpression"), !negated);
        if (type == "TupleExpression" && field(cond, "components").size() == 1)
            return sender_guard(field(cond, "components")[0], negated);
        if (type != "BinaryOperation")
            return std::nullopt;
        const auto op = str(cond, "operator");
        const auto& l = field(cond, "leftExpression");
        const auto& r = field(cond, "rightExpression");
        if ((op == "&&" && !negated) || (op == "||" && negated))
        {
            if (auto g = sender_guard(l, negated))
                return g;
            return sender_guard(r, negated);
        }
        if ((op == "==" && !negated) || (op == "!=" && negated))
        {
            const json* other = is_msg_sender(l) ? &r : is_msg_sender(r) ? &l : nullptr;
            if (!other)
                return std::nullopt;
            std::set<VarRef> keys;
            auto v = lvalue(*other, keys);
            if (v && v->scope == VarScope::state && !v->key)
                return v;
        }
        return std::nullopt;
    }

    CallSite make_site(const json& e, CallKind kind, const std::string& member)
    {
        CallSite c;
        c.kind = kind;
        c.member = member;
        c.span = sp_.of(e);
        c.ast_id = num(e, "id");
        for (const auto& a : field(e, "arguments"))
        {
            c.args.push_back(sp_.render(a));
            c.arg_sources.push_back(sources(a));
        }
        return c;
    }

    void set_address(CallSite& c, const json& addr, NodeId n)
    {
        c.address_expr = sp_.render(addr);
        c.address_sources = sources(addr);
        std::set<VarRef> reads;
        collect_reads(addr, reads);
        c.address_reads.assign(reads.begin(), reads.end());
        visit(addr, n);
    }

    void call(const json& e, NodeId n)
    {
        const auto kind = str(e, "kind");
        const auto& args = field(e, "arguments");
        if (kind == "typeConversion" || kind == "structConstructorCall" || flag(e, "type_conversion"))
        {
            visit_args(args, n);
            return;
        }
        const json* callee = &field(e, "expression");
        std::string value;
        for (;;)
        {
            if (is_node(*callee, "FunctionCallOptions"))
            {
                const auto& names = field(*callee, "names");
                const auto& opts = field(*callee, "options");
                for (std::size_t i = 0; i < names.size() && i < opts.size(); ++i)
                {
                    if (names[i] == "value")
                        value = sp_.render(opts[i]);
                    visit(opts[i], n);
                }
                callee = &field(*callee, "expression");
                continue;
            }
            // Legacy `.value(x)` / `.gas(x)` chaining.
            if (is_node(*callee, "FunctionCall") && is_node(field(*callee, "expression"), "MemberAccess"))
            {
                const auto& m = field(*callee, "expression");
                const auto member = str(m, "memberName");
                if ((member == "value" || member == "gas") &&
                    starts_with(type_of(field(m, "expression")), "function"))
                {
                    const auto& a = field(*callee, "arguments");
                    if (member == "value" && a.is_array() && !a.empty())
                        value = sp_.render(a[0]);
                    visit_args(a, n);
                    callee = &field(m, "expression");
                    continue;
                }
            }
            break;
        }

        if (is_node(*callee, "Identifier"))
        {
            const auto decl = num(*callee, "referencedDeclaration", -1);
            const auto* d = ix_.find(decl);
            const auto name = str(*callee, "name");
            if (!d)
            {
                if (name == "require" || name == "assert")
                {
                    check_ = true;
                    if (args.is_array() && !args.empty())
                        node(n).sender_guard = sender_guard(args[0], false);
                }
                else if (name == "revert")
                {
                    node(n).reverts = true;
                }
                visit_args(args, n);
                return;
            }
            if (is_node(*d, "FunctionDefinition"))
            {
                auto site = make_site(e, CallKind::internal, str(*d, "name"));
                site.referenced_decl = decl;
                site.target_hint = L_.resolve_internal(inst_, decl);
                visit_args(args, n);
                node(n).calls.push_back(std::move(site));
                return;
            }
            visit(*callee, n);
            visit_args(args, n);
            return;
        }

        if (is_node(*callee, "MemberAccess"))
        {
            const auto& base = field(*callee, "expression");
            const auto member = str(*callee, "memberName");
            const auto base_type = type_of(base);
            const auto decl = num(*callee, "referencedDeclaration", -1);
            const auto* d = ix_.find(decl);
            const bool fn_decl = d && is_node(*d, "FunctionDefinition");

            if (is_builtin(base, "super") && fn_decl)
            {
                auto site = make_site(e, CallKind::internal, member);
                site.referenced_decl = decl;
                site.target_hint = L_.resolve_internal(inst_, decl, declaring_);
                visit_args(args, n);
                node(n).calls.push_back(std::move(site));
                return;
            }
            if (starts_with(base_type, "address"))
            {
                static const std::map<std::string, CallKind> low_level{{"call", CallKind::low_level},
                    {"callcode", CallKind::delegatecall}, {"delegatecall", CallKind::delegatecall},
                    {"staticcall", CallKind::staticcall}, {"send", CallKind::send},
                    {"transfer", CallKind::transfer}};
                const auto it = low_level.find(member);
                if (it == low_level.end())
                {
                    visit(base, n);
                    visit_args(args, n);
                    return;
                }
                auto site = make_site(e, it->second, member);
                set_address(site, base, n);
                if (it->second == CallKind::send || it->second == CallKind::transfer)
                {
                    site.gas_limited = true;
                    site.eth_transfer = true;
                    if (args.is_array() && !args.empty())
                        site.value_expr = sp_.render(args[0]);
                }
                else if (!value.empty())
                {
                    site.eth_transfer = true;
                    site.value_expr = value;
                }
                visit_args(args, n);
                node(n).calls.push_back(std::move(site));
                return;
            }
            if (starts_with(base_type, "type(") && fn_decl)
            {
                const auto* owner = ix_.contract_of(decl);
                auto site = make_site(e, CallKind::internal, member);
                site.referenced_decl = decl;
                if (owner && str(*owner, "contractKind") == "library")
                    site.target_hint = L_.resolve_internal(inst_, decl);
                else
                    site.target_hint = L_.resolve_internal(inst_, decl, nullptr,
                        ix_.find(num(base, "referencedDeclaration", -1)));
                visit_args(args, n);
                node(n).calls.push_back(std::move(site));
                return;
            }
            if (const auto target = contract_type_name(base_type);
                !target.empty() && !starts_with(base_type, "type("))
            {
                if (is_builtin(base, "this") && fn_decl)
                {
                    auto site = make_site(e, CallKind::internal, member);
                    site.referenced_decl = decl;
                    site.target_hint = L_.resolve_internal(inst_, decl);
                    visit_args(args, n);
                    node(n).calls.push_back(std::move(site));
                    return;
                }
                auto site = make_site(e, CallKind::external_typed, member);
                site.referenced_decl = decl;
                site.declared_contract = target;
                if (fn_decl)
                {
                    const auto* owner = ix_.contract_of(decl);
                    site.target_hint = target + "." +
                                       function_name(*d, owner ? str(*owner, "name") : target) +
                                       "(" + signature(*d) + ")";
                }
                if (!value.empty())
                {
                    site.eth_transfer = true;
                    site.value_expr = value;
                }
                set_address(site, base, n);
                visit_args(args, n);
                node(n).calls.push_back(std::move(site));
                return;
            }
            if (fn_decl)
            {
                const auto* owner = ix_.contract_of(decl);
                if (owner && str(*owner, "contractKind") == "library")
                {
                    // Attached library function: the base is the first argument.
                    auto site = make_site(e, CallKind::internal, member);
                    site.referenced_decl = decl;
                    site.target_hint = L_.resolve_internal(inst_, decl);
                    site.args.insert(site.args.begin(), sp_.render(base));
                    site.arg_sources.insert(site.arg_sources.begin(), sources(base));
                    visit(base, n);
                    visit_args(args, n);
                    node(n).calls.push_back(std::move(site));
                    return;
                }
            }
            if ((member == "push" || member == "pop") &&
                (base_type.find("[]") != std::string::npos || starts_with(base_type, "bytes")))
            {
                write_lvalue(base, n, true, {});
                visit_args(args, n);
                return;
            }
            visit(base, n);
            visit_args(args, n);
            return;
        }

        visit(*callee, n);
        visit_args(args, n);
    }

    Loader& L_;
    const Spans& sp_;
    const Index& ix_;
    const Instance& inst_;
    Function& f_;
    const json& fn_;
    const json* declaring_ = nullptr;
    std::set<int64_t> params_;
    std::vector<std::pair<const json*, const json*>> mods_;
    std::vector<std::size_t> placeholders_;
    std::vector<PendingList> return_sinks_;
    std::vector<std::string> modifier_stack_;
    std::vector<Loop> loops_;
    std::map<int64_t, VarRef> aliases_;
    bool check_ = false;

public:
    std::map<VarRef, std::vector<TaintSource>> local_sources_;
};

void Loader::build_function(const Instance& inst, const json& fn, const std::string& id, bool super_instance)
{
    const auto* owner = ix_.contract_of(num(fn, "id"));
    Function f;
    f.id = id;
    f.contract = inst.name;
    f.declaring_contract = owner ? str(*owner, "name") : inst.name;
    f.kind = function_kind(fn, f.declaring_contract);
    f.name = function_name(fn, f.declaring_contract);
    f.visibility = super_instance ? "internal" : str(fn, "visibility");
    if (f.visibility.empty())
        f.visibility = "public";
    f.mutability = mutability(fn);
    f.params = params_of(field(fn, "parameters"));
    f.returns = params_of(field(fn, "returnParameters"));
    f.implemented = field(fn, "body").is_object();
    f.span = spans_.of(fn);
    f.ast_id = num(fn, "id");
    if (!super_instance && f.kind == "function" && (f.visibility == "public" || f.visibility == "external"))
    {
        if (const auto sel = str(fn, "functionSelector"); !sel.empty())
        {
            f.selector = sel;
        }
        else if (const auto* c = m_.contract(inst.name))
        {
            // Older compilers omit the selector; match the method identifier by name and arity.
            std::optional<std::string> match;
            int hits = 0;
            for (const auto& [sig, sel2] : c->method_identifiers)
            {
                const auto paren = sig.find('(');
                if (sig.substr(0, paren) != f.name)
                    continue;
                const auto inner = sig.substr(paren + 1, sig.size() - paren - 2);
                const auto arity = inner.empty() ? 0 : std::count(inner.begin(), inner.end(), ',') + 1;
                if (static_cast<std::size_t>(arity) == f.params.size())
                {
                    match = sel2;
                    ++hits;
                }
            }
            if (hits == 1)
                f.selector = match;
        }
    }
    auto [it, inserted] = m_.functions.emplace(id, std::move(f));
    FnBuilder b{*this, inst, it->second, fn};
    b.build();
    it->second.local_sources = std::move(b.local_sources_);
}

}  // namespace

}  // namespace rescan::ast

namespace rescan::ast
{
std::vector<SourceInput> read_sources(const std::vector<std::string>& paths)
{
    std::vector<SourceInput> out;
    auto read = [&](const fs::path& p, const std::string& key) {
        std::ifstream in{p, std::ios::binary};
        if (!in)
            throw std::runtime_error{"cannot read " + p.string()};
        std::ostringstream ss;
        ss << in.rdbuf();
        out.push_back({key, ss.str()});
    };
    for (const auto& path : paths)
    {
        const fs::path p{path};
        if (fs::is_directory(p))
        {
            std::vector<fs::path> files;
            for (const auto& e : fs::recursive_directory_iterator{p})
                if (e.is_regular_file() && e.path().extension() == ".sol")
                    files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files)
                read(f, f.generic_string());
        }
        else
        {
            read(p, p.generic_string());
        }
    }
    return out;
}

nlohmann::json normalize_ast(const nlohmann::json& ast)
{
    if (ast.is_object() && str(ast, "nodeType") == "SourceUnit")
        return ast;
    if (ast.is_object() && str(ast, "name") == "SourceUnit")
        throw UnsupportedAstError{"unsupported AST schema: legacy (pre-0.4.12) AST, use a compiler that emits the compact AST"};
    throw UnsupportedAstError{"unsupported AST schema: no SourceUnit root"};
}

ContractModel load_model(
    const nlohmann::json& solc_output, const std::vector<SourceInput>& sources, const std::string& compiler_version)
{
    ContractModel model;
    model.compiler_version = compiler_version;
    Spans spans;
    Index index;

    std::vector<std::pair<std::size_t, std::string>> order;
    const auto& out_sources = field(solc_output, "sources");
    if (out_sources.is_object())
        for (const auto& [path, entry] : out_sources.items())
            order.emplace_back(static_cast<std::size_t>(num(entry, "id")), path);
    std::sort(order.begin(), order.end());

    std::vector<json> asts;
    asts.reserve(order.size());
    for (const auto& [id, path] : order)
    {
        const auto& entry = out_sources[path];
        const auto& raw = entry.contains("ast") ? entry["ast"] : field(entry, "legacyAST");
        asts.push_back(normalize_ast(raw));
        std::string content;
        for (const auto& s : sources)
            if (s.path == path)
                content = s.content;
        spans.add(id, path, content);
        model.sources.push_back({path, content, id});
    }
    for (const auto& a : asts)
        index.add(a, 0);

    Loader loader{model, spans, index};
    loader.run(solc_output);
    return model;
}

ContractModel compile_and_load(
    const std::vector<SourceInput>& sources, const SolcOptions& options, std::vector<std::string>* warnings)
{
    if (sources.empty())
        return {};
    auto out = run_solc(sources, options);
    if (warnings)
        *warnings = out.warnings;
    return load_model(out.output, sources, out.compiler_version);
}

}  // namespace rescan::ast

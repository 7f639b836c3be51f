// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/symexec/engine.hpp>

#include <rescan/recovery/recover.hpp>

namespace rescan::symexec
{
namespace
{
const word primary_base = 0x10000;
const word sibling_base = 0x20000;
const word account_stride = 0x100;

std::optional<std::size_t> source_index(const ast::ContractModel& model, const std::string& path)
{
    for (const auto& s : model.sources)
        if (s.path == path)
            return s.index;
    return std::nullopt;
}

bool inside(const SourceMapEntry& e, std::size_t file, const ast::SourceSpan& span)
{
    return e.file == static_cast<int>(file) && e.start >= 0 &&
           static_cast<std::size_t>(e.start) >= span.start &&
           static_cast<std::size_t>(e.start + e.length) <= span.start + span.length;
}

Targets locate(const ast::ContractModel& model, const slicer::Warning& warning, const bytecode::Cfg& cfg,
    const std::vector<SourceMapEntry>& map)
{
    Targets t;
    const auto* f = model.function(warning.function);
    if (!f)
        return t;
    t.contract = f->contract;
    const auto file = source_index(model, warning.span.file);
    if (!file)
        return t;
    std::size_t pos = 0;
    for (const auto& b : cfg.blocks())
        for (const auto& ins : b.instructions)
        {
            const auto i = pos++;
            if (!evm::is_call_family(ins.opcode) || i >= map.size())
                continue;
            if (inside(map[i], *file, warning.span))
            {
                t.offsets.insert(ins.offset);
                t.blocks.insert(b.id);
            }
        }
    return t;
}
}  // namespace

std::string_view to_string(VerdictStatus s) noexcept
{
    switch (s)
    {
    case VerdictStatus::confirmed:
        return "confirmed";
    case VerdictStatus::unreachable:
        return "unreachable";
    case VerdictStatus::unknown_timeout:
        return "unknown-timeout";
    case VerdictStatus::unknown_budget:
        return "unknown-budget";
    }
    return "?";
}

std::vector<SourceMapEntry> decode_source_map(std::string_view map)
{
    std::vector<SourceMapEntry> out;
    if (map.empty())
        return out;
    SourceMapEntry cur;
    std::size_t pos = 0;
    while (pos <= map.size())
    {
        const auto end = std::min(map.find(';', pos), map.size());
        const auto item = map.substr(pos, end - pos);
        std::size_t field = 0;
        std::size_t fpos = 0;
        while (fpos <= item.size() && field < 5)
        {
            const auto fend = std::min(item.find(':', fpos), item.size());
            const auto text = item.substr(fpos, fend - fpos);
            if (!text.empty())
            {
                switch (field)
                {
                case 0:
                    cur.start = std::stol(std::string{text});
                    break;
                case 1:
                    cur.length = std::stol(std::string{text});
                    break;
                case 2:
                    cur.file = std::stoi(std::string{text});
                    break;
                case 3:
                    cur.jump = text.front();
                    break;
                default:
                    break;
                }
            }
            ++field;
            fpos = fend + 1;
        }
        out.push_back(cur);
        pos = end + 1;
    }
    return out;
}

nlohmann::json to_json(const Witness& w)
{
    const auto hex = [](const word& v) { return "0x" + to_hex(v); };
    const auto tx = [&](const Witness::Transaction& t) {
        return nlohmann::json{{"caller", hex(t.caller)}, {"address", hex(t.address)}, {"value", hex(t.value)},
            {"calldata", "0x" + to_hex(t.calldata)}};
    };
    auto accounts = nlohmann::json::array();
    for (const auto& a : w.accounts)
    {
        auto storage = nlohmann::json::object();
        for (const auto& [k, v] : a.storage)
            storage[hex(k)] = hex(v);
        accounts.push_back({{"address", hex(a.address)}, {"contract", a.contract}, {"balance", hex(a.balance)},
            {"storage", storage}});
    }
    auto sizes = nlohmann::json::object();
    for (const auto& [a, n] : w.extcodesize)
        sizes[hex(a)] = hex(n);
    auto returns = nlohmann::json::array();
    for (const auto& r : w.attacker_returns)
        returns.push_back(hex(r));
    auto env = nlohmann::json::object();
    for (const auto& [k, v] : w.env)
        env[k] = hex(v);
    auto stale = nlohmann::json::array();
    for (const auto& [a, slot] : w.stale_slots)
        stale.push_back({{"address", hex(a)}, {"slot", hex(slot)}});
    return {
        {"attacker", hex(w.attacker)},
        {"target_contract", w.target_contract},
        {"target_offsets", w.target_offsets},
        {"accounts", accounts},
        {"first", tx(w.first)},
        {"reentry", w.reentry ? tx(*w.reentry) : nlohmann::json(nullptr)},
        {"extcodesize", sizes},
        {"attacker_returns", returns},
        {"env", env},
        {"stale_slots", stale},
    };
}

Targets locate_warning_targets(
    const slicer::Warning& warning, const ast::ContractModel& model, const bytecode::Cfg& cfg)
{
    const auto* f = model.function(warning.function);
    const auto* c = f ? model.contract(f->contract) : nullptr;
    if (!c)
        return {};
    return locate(model, warning, cfg, decode_source_map(c->source_map));
}

Program::Program(const ast::ContractModel& model) : model_{&model}
{
    std::vector<const ast::Contract*> deployable;
    for (const auto& c : model.contracts)
        if (c.deployable() && !c.runtime_bytecode.empty())
            deployable.push_back(&c);

    std::map<std::string, word> primary_address;
    for (std::size_t k = 0; k < deployable.size(); ++k)
        primary_address[deployable[k]->name] = primary_base + account_stride * k;

    // Spans of typed calls the model resolved to a known contract.
    std::map<std::tuple<long, long, int>, std::string> bound_spans;
    for (const auto& n : model.nodes)
        for (const auto& call : n.calls)
        {
            if (call.kind != ast::CallKind::external_typed || !call.callee)
                continue;
            const auto* callee = model.function(*call.callee);
            const auto file = source_index(model, call.span.file);
            if (!callee || !file)
                continue;
            bound_spans[{static_cast<long>(call.span.start), static_cast<long>(call.span.length),
                static_cast<int>(*file)}] = callee->contract;
        }

    for (const auto sibling : {false, true})
        for (std::size_t k = 0; k < deployable.size(); ++k)
        {
            const auto& c = *deployable[k];
            Account a;
            a.address = (sibling ? sibling_base : primary_base) + account_stride * k;
            a.contract = c.name;
            a.sibling = sibling;
            a.code = from_hex(c.runtime_bytecode);
            a.cfg = recovery::recover_cfg(bytecode::build_partial_cfg(a.code));
            a.source_map = decode_source_map(c.source_map);
            for (const auto& slot : c.storage_layout)
            {
                if (slot.type.rfind("contract ", 0) != 0)
                    continue;
                const auto it = primary_address.find(slot.type.substr(9));
                if (it == primary_address.end())
                    continue;
                const auto shift = static_cast<unsigned>(8 * slot.offset);
                const word mask = (slot.size >= 32 ? max_word() : (word{1} << (8 * slot.size)) - 1) << shift;
                a.preset_storage[slot.slot] |= it->second << shift;
                a.preset_mask[slot.slot] |= mask;
            }
            accounts_.push_back(std::move(a));
        }

    // Instruction tables are built once the accounts no longer move.
    for (auto& a : accounts_)
    {
        for (const auto& b : a.cfg.blocks())
            for (const auto& ins : b.instructions)
            {
                a.index[ins.offset] = a.instructions.size();
                a.instructions.push_back(&ins);
            }
        for (std::size_t i = 0; i < a.instructions.size() && i < a.source_map.size(); ++i)
        {
            if (!evm::is_call_family(a.instructions[i]->opcode))
                continue;
            const auto& e = a.source_map[i];
            if (const auto it = bound_spans.find({e.start, e.length, e.file}); it != bound_spans.end())
                a.bound_calls[a.instructions[i]->offset] = it->second;
        }
    }
}

const Program::Account* Program::primary(std::string_view contract) const
{
    for (const auto& a : accounts_)
        if (!a.sibling && a.contract == contract)
            return &a;
    return nullptr;
}

const Program::Account* Program::sibling(std::string_view contract) const
{
    for (const auto& a : accounts_)
        if (a.sibling && a.contract == contract)
            return &a;
    return nullptr;
}

const Program::Account* Program::at(const word& address) const
{
    const auto i = index_of(address);
    return i ? &accounts_[*i] : nullptr;
}

std::optional<std::size_t> Program::index_of(const word& address) const
{
    for (std::size_t i = 0; i < accounts_.size(); ++i)
        if (accounts_[i].address == address)
            return i;
    return std::nullopt;
}

Targets Program::locate_warning_targets(const slicer::Warning& warning) const
{
    const auto* f = model_->function(warning.function);
    const auto* a = f ? primary(f->contract) : nullptr;
    if (!a)
        return {};
    return locate(*model_, warning, a->cfg, a->source_map);
}

}  // namespace rescan::symexec

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/bytecode/cfg.hpp>
#include <rescan/slicer/slicer.hpp>
#include <rescan/symexec/solver.hpp>

#include <chrono>
#include <memory>

namespace rescan::symexec
{
/// One decompressed source-map entry, per instruction.
struct SourceMapEntry
{
    long start = -1;
    long length = -1;
    int file = -1;
    char jump = '-';
};

std::vector<SourceMapEntry> decode_source_map(std::string_view map);

struct Budget
{
    std::size_t max_blocks_per_path = 512;
    std::size_t max_paths = 2000;
    std::chrono::milliseconds solver_timeout{10'000};
    std::size_t loop_unroll = 2;
    std::size_t max_call_depth = 3;
    /// Wall-clock limit for one verification.
    std::chrono::milliseconds time_budget{300'000};
};

enum class VerdictStatus
{
    confirmed,
    unreachable,
    unknown_timeout,
    unknown_budget,
};

std::string_view to_string(VerdictStatus s) noexcept;

/// Bytecode location of a warning's interaction.
struct Targets
{
    std::string contract;
    std::set<bytecode::BlockId> blocks;
    std::set<std::size_t> offsets;  ///< CALL-family instruction offsets.
};

/// Concrete inputs that reproduce a confirmed verdict.
struct Witness
{
    struct Account
    {
        word address = 0;
        std::string contract;
        bytes code;
        std::map<word, word> storage;
        word balance = 0;
    };
    struct Transaction
    {
        word caller = 0;
        word address = 0;
        word value = 0;
        bytes calldata;
    };
    std::vector<Account> accounts;
    Transaction first;
    /// Re-entrant call made by the attacker when the first transaction reaches
    /// the interaction.
    std::optional<Transaction> reentry;
    word attacker = 0;
    std::map<word, word> extcodesize;      ///< Attacker-side code sizes.
    std::vector<word> attacker_returns;    ///< Return words of earlier attacker calls, in order.
    std::map<std::string, word> env;       ///< timestamp, number, ...
    std::string target_contract;
    std::set<std::size_t> target_offsets;
    /// Guard slots that must still hold their initial value at the interaction.
    std::vector<std::pair<word, word>> stale_slots;
};

/// Witness without account code; words as 0x-prefixed hex.
nlohmann::json to_json(const Witness& w);

struct Verdict
{
    VerdictStatus status = VerdictStatus::unreachable;
    std::optional<Assignment> model;
    std::vector<bytecode::BlockId> path;  ///< Blocks of the first transaction, target account only.
    std::optional<Witness> witness;
    std::string reason;
    std::size_t paths = 0;
    std::size_t solver_queries = 0;
};

enum class PptDecision
{
    keep,
    drop,
};

struct PptResult
{
    PptDecision decision = PptDecision::keep;
    std::string reason;  ///< permission-check, storage-mutex, builtin-guard
};

/// Syntactic path-protection pre-filter.
PptResult ppt_filter(const slicer::Warning& warning, const slicer::Slice& slice,
    const ast::ContractModel& model, const ipdg::Icfg& icfg);

/// Deployed contracts with recovered CFGs and the analysis world layout:
/// one account per deployable contract plus one sibling account each.
class Program
{
public:
    struct Account
    {
        word address = 0;
        std::string contract;
        bool sibling = false;
        bytes code;
        bytecode::Cfg cfg;
        std::map<std::size_t, std::size_t> index;  ///< offset -> instruction position
        std::vector<const bytecode::Instruction*> instructions;
        std::vector<SourceMapEntry> source_map;  ///< Per instruction position.
        /// CALL offsets bound to a known instance by the model's call resolution.
        std::map<std::size_t, std::string> bound_calls;
        /// Initial storage fixed by the layout: contract-typed slots hold instances.
        std::map<word, word> preset_storage;
        std::map<word, word> preset_mask;  ///< Bits of each preset slot that are fixed.
    };

    explicit Program(const ast::ContractModel& model);
    Program(const Program&) = delete;
    Program& operator=(const Program&) = delete;

    [[nodiscard]] const ast::ContractModel& model() const { return *model_; }
    [[nodiscard]] const std::vector<Account>& accounts() const { return accounts_; }
    [[nodiscard]] const Account* primary(std::string_view contract) const;
    [[nodiscard]] const Account* sibling(std::string_view contract) const;
    [[nodiscard]] const Account* at(const word& address) const;
    [[nodiscard]] std::optional<std::size_t> index_of(const word& address) const;

    [[nodiscard]] Targets locate_warning_targets(const slicer::Warning& warning) const;

private:
    const ast::ContractModel* model_;
    std::vector<Account> accounts_;
};

/// Maps a warning's span through the source map to the blocks holding its
/// CALL-family instructions.
Targets locate_warning_targets(
    const slicer::Warning& warning, const ast::ContractModel& model, const bytecode::Cfg& cfg);

class Engine
{
public:
    Engine(const Program& program, SolverBackend& solver, Budget budget = {});

    /// Explores from `entry_selector` on the primary instance of
    /// `entry_contract` towards `targets`. A target counts only when the call
    /// goes to an attacker-controlled address; with `reentry` set, the attacker
    /// must then re-enter through one of `reentry_entries` and reach a target
    /// again before the guard storage read on the way is updated.
    Verdict execute(const std::string& entry_contract, uint32_t entry_selector, const Targets& targets,
        bool reentry = true, const std::vector<std::string>& reentry_entries = {});

    /// Runs `execute` for every entry function of the warning.
    Verdict verify(const slicer::Warning& warning);

private:
    const Program& program_;
    SolverBackend& solver_;
    Budget budget_;
};

}  // namespace rescan::symexec

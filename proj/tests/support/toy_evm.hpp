// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

// Concrete reference interpreter used as a test oracle. Written independently
// of the analyzer: it shares only the word type and keccak.

#include <rescan/evm/word.hpp>

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace rescan::test
{
struct Account
{
    bytes code;
    std::map<word, word> storage;
    word balance = 0;
};

struct BlockEnv
{
    word timestamp = 1'700'000'000;
    word number = 19'000'000;
    word coinbase = 0xc0;
    word prevrandao = 0;
    word gaslimit = 30'000'000;
    word chainid = 1;
    word basefee = 7;
    word gasprice = 7;
};

struct Message
{
    word caller = 0;
    word address = 0;
    word value = 0;
    bytes input;
    int depth = 0;
    bool is_static = false;
};

struct CallResult
{
    bool success = false;
    bytes output;
};

struct Step
{
    int depth;
    const word& address;
    std::size_t pc;
    uint8_t opcode;
    const std::vector<word>& stack;  ///< Bottom first.
};

class World
{
public:
    std::map<word, Account> accounts;
    BlockEnv env;
    word origin = 0;
    std::size_t step_limit = 2'000'000;

    /// Observes every instruction before it executes.
    std::function<void(const Step&)> on_step;
    /// Handles CALL-family messages into accounts without code. Returning
    /// nullopt means plain success with empty output.
    std::function<std::optional<CallResult>(World&, const Message&)> on_codeless_call;
    /// Overrides EXTCODESIZE for selected addresses.
    std::map<word, word> extcodesize_override;

    /// Executes a message call, applying or reverting its state changes.
    CallResult call(const Message& msg);

    /// Like call() but runs `code` in the context of `msg.address`.
    CallResult call_with_code(const Message& msg, const bytes& code);

    /// Top-level transaction: sets origin and clears transient storage.
    CallResult transact(const Message& msg);

    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }

private:
    friend class Frame;
    std::map<std::pair<word, word>, word> transient_;
    std::size_t steps_ = 0;
};

/// Four-byte selector followed by 32-byte ABI words.
bytes abi_call(uint32_t selector, const std::vector<word>& args = {});

}  // namespace rescan::test

// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/evm/opcodes.hpp>

#include <string>

namespace rescan::evm
{
namespace
{
constexpr std::string_view push_names[] = {"PUSH0", "PUSH1", "PUSH2", "PUSH3", "PUSH4", "PUSH5",
    "PUSH6", "PUSH7", "PUSH8", "PUSH9", "PUSH10", "PUSH11", "PUSH12", "PUSH13", "PUSH14", "PUSH15",
    "PUSH16", "PUSH17", "PUSH18", "PUSH19", "PUSH20", "PUSH21", "PUSH22", "PUSH23", "PUSH24",
    "PUSH25", "PUSH26", "PUSH27", "PUSH28", "PUSH29", "PUSH30", "PUSH31", "PUSH32"};
constexpr std::string_view dup_names[] = {"DUP1", "DUP2", "DUP3", "DUP4", "DUP5", "DUP6", "DUP7",
    "DUP8", "DUP9", "DUP10", "DUP11", "DUP12", "DUP13", "DUP14", "DUP15", "DUP16"};
constexpr std::string_view swap_names[] = {"SWAP1", "SWAP2", "SWAP3", "SWAP4", "SWAP5", "SWAP6",
    "SWAP7", "SWAP8", "SWAP9", "SWAP10", "SWAP11", "SWAP12", "SWAP13", "SWAP14", "SWAP15",
    "SWAP16"};
constexpr std::string_view log_names[] = {"LOG0", "LOG1", "LOG2", "LOG3", "LOG4"};

std::array<OpcodeInfo, 256> make_table() noexcept
{
    std::array<OpcodeInfo, 256> t{};
    auto set = [&t](uint8_t op, std::string_view name, uint8_t in, uint8_t out) {
        t[op] = {name, in, out, 0};
    };

    set(OP_STOP, "STOP", 0, 0);
    set(OP_ADD, "ADD", 2, 1);
    set(OP_MUL, "MUL", 2, 1);
    set(OP_SUB, "SUB", 2, 1);
    set(OP_DIV, "DIV", 2, 1);
    set(OP_SDIV, "SDIV", 2, 1);
    set(OP_MOD, "MOD", 2, 1);
    set(OP_SMOD, "SMOD", 2, 1);
    set(OP_ADDMOD, "ADDMOD", 3, 1);
    set(OP_MULMOD, "MULMOD", 3, 1);
    set(OP_EXP, "EXP", 2, 1);
    set(OP_SIGNEXTEND, "SIGNEXTEND", 2, 1);

    set(OP_LT, "LT", 2, 1);
    set(OP_GT, "GT", 2, 1);
    set(OP_SLT, "SLT", 2, 1);
    set(OP_SGT, "SGT", 2, 1);
    set(OP_EQ, "EQ", 2, 1);
    set(OP_ISZERO, "ISZERO", 1, 1);
    set(OP_AND, "AND", 2, 1);
    set(OP_OR, "OR", 2, 1);
    set(OP_XOR, "XOR", 2, 1);
    set(OP_NOT, "NOT", 1, 1);
    set(OP_BYTE, "BYTE", 2, 1);
    set(OP_SHL, "SHL", 2, 1);
    set(OP_SHR, "SHR", 2, 1);
    set(OP_SAR, "SAR", 2, 1);

    set(OP_KECCAK256, "KECCAK256", 2, 1);

    set(OP_ADDRESS, "ADDRESS", 0, 1);
    set(OP_BALANCE, "BALANCE", 1, 1);
    set(OP_ORIGIN, "ORIGIN", 0, 1);
    set(OP_CALLER, "CALLER", 0, 1);
    set(OP_CALLVALUE, "CALLVALUE", 0, 1);
    set(OP_CALLDATALOAD, "CALLDATALOAD", 1, 1);
    set(OP_CALLDATASIZE, "CALLDATASIZE", 0, 1);
    set(OP_CALLDATACOPY, "CALLDATACOPY", 3, 0);
    set(OP_CODESIZE, "CODESIZE", 0, 1);
    set(OP_CODECOPY, "CODECOPY", 3, 0);
    set(OP_GASPRICE, "GASPRICE", 0, 1);
    set(OP_EXTCODESIZE, "EXTCODESIZE", 1, 1);
    set(OP_EXTCODECOPY, "EXTCODECOPY", 4, 0);
    set(OP_RETURNDATASIZE, "RETURNDATASIZE", 0, 1);
    set(OP_RETURNDATACOPY, "RETURNDATACOPY", 3, 0);
    set(OP_EXTCODEHASH, "EXTCODEHASH", 1, 1);

    set(OP_BLOCKHASH, "BLOCKHASH", 1, 1);
    set(OP_COINBASE, "COINBASE", 0, 1);
    set(OP_TIMESTAMP, "TIMESTAMP", 0, 1);
    set(OP_NUMBER, "NUMBER", 0, 1);
    set(OP_PREVRANDAO, "PREVRANDAO", 0, 1);
    set(OP_GASLIMIT, "GASLIMIT", 0, 1);
    set(OP_CHAINID, "CHAINID", 0, 1);
    set(OP_SELFBALANCE, "SELFBALANCE", 0, 1);
    set(OP_BASEFEE, "BASEFEE", 0, 1);
    set(OP_BLOBHASH, "BLOBHASH", 1, 1);
    set(OP_BLOBBASEFEE, "BLOBBASEFEE", 0, 1);

    set(OP_POP, "POP", 1, 0);
    set(OP_MLOAD, "MLOAD", 1, 1);
    set(OP_MSTORE, "MSTORE", 2, 0);
    set(OP_MSTORE8, "MSTORE8", 2, 0);
    set(OP_SLOAD, "SLOAD", 1, 1);
    set(OP_SSTORE, "SSTORE", 2, 0);
    set(OP_JUMP, "JUMP", 1, 0);
    set(OP_JUMPI, "JUMPI", 2, 0);
    set(OP_PC, "PC", 0, 1);
    set(OP_MSIZE, "MSIZE", 0, 1);
    set(OP_GAS, "GAS", 0, 1);
    set(OP_JUMPDEST, "JUMPDEST", 0, 0);
    set(OP_TLOAD, "TLOAD", 1, 1);
    set(OP_TSTORE, "TSTORE", 2, 0);
    set(OP_MCOPY, "MCOPY", 3, 0);

    for (unsigned i = 0; i <= 32; ++i)
        t[OP_PUSH0 + i] = {push_names[i], 0, 1, static_cast<uint8_t>(i)};
    for (unsigned i = 0; i < 16; ++i)
    {
        t[OP_DUP1 + i] = {dup_names[i], static_cast<uint8_t>(i + 1), static_cast<uint8_t>(i + 2), 0};
        t[OP_SWAP1 + i] = {swap_names[i], static_cast<uint8_t>(i + 2), static_cast<uint8_t>(i + 2), 0};
    }
    for (unsigned i = 0; i <= 4; ++i)
        t[OP_LOG0 + i] = {log_names[i], static_cast<uint8_t>(i + 2), 0, 0};

    set(OP_CREATE, "CREATE", 3, 1);
    set(OP_CALL, "CALL", 7, 1);
    set(OP_CALLCODE, "CALLCODE", 7, 1);
    set(OP_RETURN, "RETURN", 2, 0);
    set(OP_DELEGATECALL, "DELEGATECALL", 6, 1);
    set(OP_CREATE2, "CREATE2", 4, 1);
    set(OP_STATICCALL, "STATICCALL", 6, 1);
    set(OP_REVERT, "REVERT", 2, 0);
    set(OP_INVALID, "INVALID", 0, 0);
    set(OP_SELFDESTRUCT, "SELFDESTRUCT", 1, 0);
    return t;
}
}  // namespace

const std::array<OpcodeInfo, 256>& opcode_table() noexcept
{
    static const auto table = make_table();
    return table;
}

std::optional<uint8_t> opcode_from_name(std::string_view name) noexcept
{
    if (name == "SHA3")
        return OP_KECCAK256;
    const auto& t = opcode_table();
    for (unsigned op = 0; op < 256; ++op)
        if (t[op].name == name)
            return static_cast<uint8_t>(op);
    return std::nullopt;
}
}  // namespace rescan::evm

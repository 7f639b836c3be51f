// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/evm/word.hpp>

namespace rescan
{
/// Ethereum Keccak-256 (original Keccak padding, not FIPS-202 SHA3).
bytes32 keccak256(bytes_view data) noexcept;

inline word keccak256_word(bytes_view data) noexcept
{
    const auto h = keccak256(data);
    return load_word(h);
}
}  // namespace rescan

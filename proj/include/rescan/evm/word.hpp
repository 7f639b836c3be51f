// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rescan
{
/// 256-bit unsigned EVM word with modular (wrapping) arithmetic.
using word = boost::multiprecision::uint256_t;

using bytes = std::vector<uint8_t>;
using bytes_view = std::span<const uint8_t>;
using bytes32 = std::array<uint8_t, 32>;

/// Big-endian load of up to 32 bytes.
word load_word(bytes_view data) noexcept;

bytes32 store_word(const word& w) noexcept;

/// Lower-case hex without prefix, no leading zeros ("0" for zero).
std::string to_hex(const word& w);

std::string to_hex(bytes_view data);

/// Parses hex with optional 0x prefix and surrounding whitespace.
/// Throws std::invalid_argument on odd length or a non-hex character.
bytes from_hex(std::string_view hex);

word parse_word(std::string_view text);

inline const word& max_word() noexcept
{
    static const word m = ~word{0};
    return m;
}

/// Two's-complement view helpers.
bool is_negative(const word& w) noexcept;
word negate(const word& w) noexcept;

}  // namespace rescan

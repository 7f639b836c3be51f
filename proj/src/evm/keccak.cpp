// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/evm/keccak.hpp>

#include <bit>
#include <cstring>

namespace rescan
{
namespace
{
constexpr uint64_t round_constants[24] = {
    0x0000000000000001, 0x0000000000008082, 0x800000000000808a, 0x8000000080008000,
    0x000000000000808b, 0x0000000080000001, 0x8000000080008081, 0x8000000000008009,
    0x000000000000008a, 0x0000000000000088, 0x0000000080008009, 0x000000008000000a,
    0x000000008000808b, 0x800000000000008b, 0x8000000000008089, 0x8000000000008003,
    0x8000000000008002, 0x8000000000000080, 0x000000000000800a, 0x800000008000000a,
    0x8000000080008081, 0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
};

constexpr int rotations[25] = {
    0, 1, 62, 28, 27, 36, 44, 6, 55, 20, 3, 10, 43, 25, 39, 41, 45, 15, 21, 8, 18, 2, 61, 56, 14,
};

void keccak_f1600(uint64_t st[25]) noexcept
{
    for (const auto rc : round_constants)
    {
        uint64_t c[5];
        for (int x = 0; x < 5; ++x)
            c[x] = st[x] ^ st[x + 5] ^ st[x + 10] ^ st[x + 15] ^ st[x + 20];
        for (int x = 0; x < 5; ++x)
        {
            const uint64_t d = c[(x + 4) % 5] ^ std::rotl(c[(x + 1) % 5], 1);
            for (int y = 0; y < 25; y += 5)
                st[y + x] ^= d;
        }

        uint64_t b[25];
        for (int x = 0; x < 5; ++x)
            for (int y = 0; y < 5; ++y)
                b[y + 5 * ((2 * x + 3 * y) % 5)] = std::rotl(st[x + 5 * y], rotations[x + 5 * y]);

        for (int y = 0; y < 25; y += 5)
            for (int x = 0; x < 5; ++x)
                st[y + x] = b[y + x] ^ (~b[y + (x + 1) % 5] & b[y + (x + 2) % 5]);

        st[0] ^= rc;
    }
}
}  // namespace

bytes32 keccak256(bytes_view data) noexcept
{
    constexpr std::size_t rate = 136;
    uint64_t st[25] = {};

    auto absorb = [&st](const uint8_t* block) noexcept {
        for (std::size_t i = 0; i < rate / 8; ++i)
        {
            uint64_t lane = 0;
            for (int j = 7; j >= 0; --j)
                lane = (lane << 8) | block[i * 8 + static_cast<std::size_t>(j)];
            st[i] ^= lane;
        }
        keccak_f1600(st);
    };

    std::size_t pos = 0;
    for (; pos + rate <= data.size(); pos += rate)
        absorb(data.data() + pos);

    uint8_t last[rate] = {};
    const auto tail = data.size() - pos;
    if (tail != 0)
        std::memcpy(last, data.data() + pos, tail);
    last[tail] ^= 0x01;
    last[rate - 1] ^= 0x80;
    absorb(last);

    bytes32 out{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            out[i * 8 + j] = static_cast<uint8_t>(st[i] >> (8 * j));
    return out;
}
}  // namespace rescan

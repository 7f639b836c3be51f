// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/evm/word.hpp>

#include <stdexcept>

namespace rescan
{
word load_word(bytes_view data) noexcept
{
    word w = 0;
    for (const auto b : data.first(std::min<std::size_t>(data.size(), 32)))
        w = (w << 8) | b;
    return w;
}

bytes32 store_word(const word& w) noexcept
{
    bytes32 out{};
    word v = w;
    for (int i = 31; i >= 0; --i)
    {
        out[static_cast<std::size_t>(i)] = static_cast<uint8_t>(v & 0xff);
        v >>= 8;
    }
    return out;
}

std::string to_hex(const word& w)
{
    if (w == 0)
        return "0";
    std::string s;
    word v = w;
    static constexpr char digits[] = "0123456789abcdef";
    while (v != 0)
    {
        s.push_back(digits[static_cast<unsigned>(v & 0xf)]);
        v >>= 4;
    }
    return {s.rbegin(), s.rend()};
}

std::string to_hex(bytes_view data)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (const auto b : data)
    {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

namespace
{
int hex_digit(char c) noexcept
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

std::string_view trim(std::string_view s) noexcept
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}
}  // namespace

bytes from_hex(std::string_view hex)
{
    hex = trim(hex);
    if (hex.starts_with("0x") || hex.starts_with("0X"))
        hex.remove_prefix(2);
    if (hex.size() % 2 != 0)
        throw std::invalid_argument("hex string has odd length");
    bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2)
    {
        const int hi = hex_digit(hex[i]);
        const int lo = hex_digit(hex[i + 1]);
        if (hi < 0 || lo < 0)
            throw std::invalid_argument("invalid hex character at position " + std::to_string(i));
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

word parse_word(std::string_view text)
{
    text = trim(text);
    if (text.starts_with("0x") || text.starts_with("0X"))
    {
        text.remove_prefix(2);
        if (text.empty() || text.size() > 64)
            throw std::invalid_argument("invalid hex word");
        word w = 0;
        for (const char c : text)
        {
            const int d = hex_digit(c);
            if (d < 0)
                throw std::invalid_argument("invalid hex word");
            w = (w << 4) | static_cast<unsigned>(d);
        }
        return w;
    }
    if (text.empty())
        throw std::invalid_argument("empty word");
    word w = 0;
    for (const char c : text)
    {
        if (c < '0' || c > '9')
            throw std::invalid_argument("invalid decimal word");
        w = w * 10 + static_cast<unsigned>(c - '0');
    }
    return w;
}

bool is_negative(const word& w) noexcept
{
    return bit_test(w, 255);
}

word negate(const word& w) noexcept
{
    return ~w + 1;
}

}  // namespace rescan

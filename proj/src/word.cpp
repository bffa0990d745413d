// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/word.hpp>

namespace opdiff
{
Word word_from_be(std::span<const uint8_t> bytes) noexcept
{
    Word w = 0;
    for (const auto b : bytes.last(std::min<size_t>(bytes.size(), 32)))
        w = (w << 8) | b;
    return w;
}

std::array<uint8_t, 32> word_to_be(const Word& w) noexcept
{
    std::array<uint8_t, 32> out{};
    Word v = w;
    for (int i = 31; i >= 0; --i)
    {
        out[static_cast<size_t>(i)] = static_cast<uint8_t>(v & 0xff);
        v >>= 8;
    }
    return out;
}

std::string to_quantity(const Word& w)
{
    if (w == 0)
        return "0x0";
    const auto be = word_to_be(w);
    auto hex = to_hex(be);
    const auto first = hex.find_first_not_of('0');
    return "0x" + hex.substr(first);
}

std::optional<Word> parse_quantity(std::string_view text)
{
    if (!text.starts_with("0x") && !text.starts_with("0X"))
        return std::nullopt;
    text.remove_prefix(2);
    if (text.empty() || text.size() > 64)
        return std::nullopt;
    std::string padded(text.size() % 2, '0');
    padded += text;
    const auto bytes = from_hex(padded);
    if (!bytes)
        return std::nullopt;
    return word_from_be(*bytes);
}

unsigned byte_length(const Word& w) noexcept
{
    if (w == 0)
        return 0;
    return static_cast<unsigned>(boost::multiprecision::msb(w) / 8 + 1);
}

std::optional<uint64_t> to_u64(const Word& w) noexcept
{
    if (w > std::numeric_limits<uint64_t>::max())
        return std::nullopt;
    return static_cast<uint64_t>(w);
}

bool is_negative(const Word& w) noexcept
{
    return boost::multiprecision::bit_test(w, 255);
}

const Word& Address::mask() noexcept
{
    static const Word m = (Word{1} << 160) - 1;
    return m;
}

std::string Address::hex() const
{
    const auto be = word_to_be(value_);
    return "0x" + to_hex(std::span{be}.last(20));
}

std::optional<Address> Address::parse(std::string_view text)
{
    const auto w = parse_quantity(text);
    if (!w || *w > mask())
        return std::nullopt;
    return Address{*w};
}
}  // namespace opdiff

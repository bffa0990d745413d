// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/hex.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace opdiff
{
/// 256-bit EVM word. Arithmetic wraps modulo 2^256.
using Word = boost::multiprecision::uint256_t;

Word word_from_be(std::span<const uint8_t> bytes) noexcept;
std::array<uint8_t, 32> word_to_be(const Word& w) noexcept;

/// Minimal "0x"-prefixed hex ("0x0" for zero), the trace quantity encoding.
std::string to_quantity(const Word& w);
std::optional<Word> parse_quantity(std::string_view text);

/// Number of significant bytes (0 for zero).
unsigned byte_length(const Word& w) noexcept;

/// Value if it fits in 64 bits.
std::optional<uint64_t> to_u64(const Word& w) noexcept;

bool is_negative(const Word& w) noexcept;
inline Word negate(const Word& w) noexcept { return Word{0} - w; }

/// 160-bit account address.
class Address
{
public:
    Address() = default;
    explicit Address(const Word& w) : value_{w & mask()} {}

    const Word& word() const noexcept { return value_; }
    std::string hex() const;  ///< "0x" + 40 lowercase hex chars.
    static std::optional<Address> parse(std::string_view text);

    friend bool operator==(const Address&, const Address&) = default;
    friend bool operator<(const Address& a, const Address& b) noexcept { return a.value_ < b.value_; }

private:
    static const Word& mask() noexcept;
    Word value_{0};
};
}  // namespace opdiff

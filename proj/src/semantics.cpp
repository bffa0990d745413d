// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/semantics.hpp>

namespace opdiff
{
namespace
{
using boost::multiprecision::uint512_t;

const Word& min_signed()
{
    static const Word v = Word{1} << 255;
    return v;
}

Word abs_signed(const Word& w) noexcept
{
    return is_negative(w) ? negate(w) : w;
}

Word sdiv(const Word& a, const Word& b) noexcept
{
    if (b == 0)
        return 0;
    if (a == min_signed() && b == negate(1))
        return a;
    const Word q = abs_signed(a) / abs_signed(b);
    return is_negative(a) != is_negative(b) ? negate(q) : q;
}

Word smod(const Word& a, const Word& b) noexcept
{
    if (b == 0)
        return 0;
    const Word r = abs_signed(a) % abs_signed(b);
    return is_negative(a) ? negate(r) : r;
}

bool slt(const Word& a, const Word& b) noexcept
{
    const bool na = is_negative(a);
    const bool nb = is_negative(b);
    if (na != nb)
        return na;
    return a < b;
}

Word signextend(const Word& index, const Word& x) noexcept
{
    if (index >= 31)
        return x;
    const unsigned bit = index.convert_to<unsigned>() * 8 + 7;
    const Word mask = (Word{1} << (bit + 1)) - 1;
    return boost::multiprecision::bit_test(x, bit) ? (x | ~mask) : (x & mask);
}

Word sar(const Word& shift, const Word& value) noexcept
{
    const bool neg = is_negative(value);
    if (shift >= 256)
        return neg ? ~Word{0} : Word{0};
    const unsigned s = shift.convert_to<unsigned>();
    Word r = value >> s;
    if (neg && s > 0)
        r |= ~(~Word{0} >> s);
    return r;
}
}  // namespace

Word exp_mod(Word base, Word exponent) noexcept
{
    Word result = 1;
    while (exponent != 0)
    {
        if (boost::multiprecision::bit_test(exponent, 0))
            result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

std::optional<Word> evaluate_pure(uint8_t opcode, std::span<const Word> args) noexcept
{
    const auto arg = [&](size_t i) -> const Word& { return args[i]; };
    switch (opcode)
    {
    case 0x01:
        return arg(0) + arg(1);
    case 0x02:
        return arg(0) * arg(1);
    case 0x03:
        return arg(0) - arg(1);
    case 0x04:
        return arg(1) == 0 ? Word{0} : Word{arg(0) / arg(1)};
    case 0x05:
        return sdiv(arg(0), arg(1));
    case 0x06:
        return arg(1) == 0 ? Word{0} : Word{arg(0) % arg(1)};
    case 0x07:
        return smod(arg(0), arg(1));
    case 0x08:
        if (arg(2) == 0)
            return Word{0};
        return static_cast<Word>((uint512_t{arg(0)} + arg(1)) % arg(2));
    case 0x09:
        if (arg(2) == 0)
            return Word{0};
        return static_cast<Word>((uint512_t{arg(0)} * arg(1)) % arg(2));
    case 0x0a:
        return exp_mod(arg(0), arg(1));
    case 0x0b:
        return signextend(arg(0), arg(1));
    case 0x10:
        return Word{arg(0) < arg(1)};
    case 0x11:
        return Word{arg(0) > arg(1)};
    case 0x12:
        return Word{slt(arg(0), arg(1))};
    case 0x13:
        return Word{slt(arg(1), arg(0))};
    case 0x14:
        return Word{arg(0) == arg(1)};
    case 0x15:
        return Word{arg(0) == 0};
    case 0x16:
        return arg(0) & arg(1);
    case 0x17:
        return arg(0) | arg(1);
    case 0x18:
        return arg(0) ^ arg(1);
    case 0x19:
        return ~arg(0);
    case 0x1a:
        if (arg(0) >= 32)
            return Word{0};
        return (arg(1) >> (8 * (31 - arg(0).convert_to<unsigned>()))) & 0xff;
    case 0x1b:
        return arg(0) >= 256 ? Word{0} : Word{arg(1) << arg(0).convert_to<unsigned>()};
    case 0x1c:
        return arg(0) >= 256 ? Word{0} : Word{arg(1) >> arg(0).convert_to<unsigned>()};
    case 0x1d:
        return sar(arg(0), arg(1));
    default:
        return std::nullopt;
    }
}
}  // namespace opdiff

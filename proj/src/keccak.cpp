// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/hex.hpp>
#include <opdiff/keccak.hpp>

#include <bit>
#include <cstring>

namespace opdiff
{
namespace
{
constexpr std::array<uint64_t, 24> round_constants = {
    0x0000000000000001, 0x0000000000008082, 0x800000000000808a, 0x8000000080008000,
    0x000000000000808b, 0x0000000080000001, 0x8000000080008081, 0x8000000000008009,
    0x000000000000008a, 0x0000000000000088, 0x0000000080008009, 0x000000008000000a,
    0x000000008000808b, 0x800000000000008b, 0x8000000000008089, 0x8000000000008003,
    0x8000000000008002, 0x8000000000000080, 0x000000000000800a, 0x800000008000000a,
    0x8000000080008081, 0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
};

constexpr std::array<int, 25> rotations = {
    0, 1, 62, 28, 27, 36, 44, 6, 55, 20, 3, 10, 43, 25, 39, 41, 45, 15, 21, 8, 18, 2, 61, 56, 14,
};

void keccak_f1600(std::array<uint64_t, 25>& a) noexcept
{
    for (const auto rc : round_constants)
    {
        // theta
        uint64_t c[5];
        for (int x = 0; x < 5; ++x)
            c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
        for (int x = 0; x < 5; ++x)
        {
            const uint64_t d = c[(x + 4) % 5] ^ std::rotl(c[(x + 1) % 5], 1);
            for (int y = 0; y < 25; y += 5)
                a[y + x] ^= d;
        }
        // rho + pi
        std::array<uint64_t, 25> b{};
        for (int x = 0; x < 5; ++x)
            for (int y = 0; y < 5; ++y)
                b[y + 5 * ((2 * x + 3 * y) % 5)] = std::rotl(a[x + 5 * y], rotations[x + 5 * y]);
        // chi
        for (int y = 0; y < 25; y += 5)
            for (int x = 0; x < 5; ++x)
                a[y + x] = b[y + x] ^ (~b[y + (x + 1) % 5] & b[y + (x + 2) % 5]);
        // iota
        a[0] ^= rc;
    }
}

uint64_t load_le64(const uint8_t* p) noexcept
{
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = v << 8 | p[i];
    return v;
}
}  // namespace

Hash256 keccak256(std::span<const uint8_t> data) noexcept
{
    constexpr size_t rate = 136;
    std::array<uint64_t, 25> state{};

    while (data.size() >= rate)
    {
        for (size_t i = 0; i < rate / 8; ++i)
            state[i] ^= load_le64(data.data() + i * 8);
        keccak_f1600(state);
        data = data.subspan(rate);
    }

    uint8_t block[rate]{};
    std::memcpy(block, data.data(), data.size());
    block[data.size()] ^= 0x01;
    block[rate - 1] ^= 0x80;
    for (size_t i = 0; i < rate / 8; ++i)
        state[i] ^= load_le64(block + i * 8);
    keccak_f1600(state);

    Hash256 out;
    for (size_t i = 0; i < 32; ++i)
        out[i] = static_cast<uint8_t>(state[i / 8] >> (8 * (i % 8)));
    return out;
}

std::string keccak256_hex(std::span<const uint8_t> data)
{
    return to_hex(keccak256(data));
}
}  // namespace opdiff

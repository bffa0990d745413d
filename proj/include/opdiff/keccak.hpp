// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace opdiff
{
using Hash256 = std::array<uint8_t, 32>;

/// Original Keccak-256 (0x01 padding), as used by the EVM.
Hash256 keccak256(std::span<const uint8_t> data) noexcept;

/// Hex digest, used for content-addressed keys.
std::string keccak256_hex(std::span<const uint8_t> data);
}  // namespace opdiff

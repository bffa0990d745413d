// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace opdiff
{
using Bytes = std::vector<uint8_t>;

/// Lowercase hex, no prefix.
std::string to_hex(std::span<const uint8_t> bytes);

/// Accepts an optional 0x prefix; returns nullopt on odd length or non-hex characters.
std::optional<Bytes> from_hex(std::string_view hex);
}  // namespace opdiff

// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/word.hpp>

#include <cstdint>
#include <optional>
#include <span>

namespace opdiff
{
/// Pure stack semantics of the arithmetic, comparison and bitwise opcodes.
/// `args[0]` is the first popped operand (stack top). Returns nullopt for
/// opcodes outside that group.
std::optional<Word> evaluate_pure(uint8_t opcode, std::span<const Word> args) noexcept;

/// base^exponent mod 2^256.
Word exp_mod(Word base, Word exponent) noexcept;
}  // namespace opdiff

// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/bytecode.hpp>
#include <opdiff/word.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace opdiff
{
using Gas = uint64_t;

/// Saturation value for gas amounts that cannot be paid by any transaction.
inline constexpr Gas gas_infinite = std::numeric_limits<Gas>::max();

enum class PathId : uint8_t
{
    Success,
    StackUnderflow,
    StackOverflow,
    OutOfGas,
    InvalidJumpdest,
    WriteInStatic,
    InvalidOpcode,
};

std::string_view path_name(PathId id) noexcept;
std::optional<PathId> parse_path(std::string_view name) noexcept;

struct SpecPath
{
    PathId id = PathId::Success;
    std::string trigger;  ///< Machine-readable condition, e.g. "stack.size < 2".
    bool terminal = false;  ///< Halts execution exceptionally.

    friend bool operator==(const SpecPath&, const SpecPath&) = default;
};

enum class GasRule : uint8_t
{
    None,
    ExpBytes,       ///< 50 per significant exponent byte.
    AccountAccess,  ///< 100 warm / 2600 cold.
    Memory,         ///< Memory expansion only.
    Copy,           ///< 3 per copied word + memory expansion.
    Keccak,         ///< 6 per hashed word + memory expansion.
    Log,            ///< 8 per data byte + memory expansion.
    Sload,          ///< 100 warm / 2100 cold.
    Sstore,
    Call,
    Create,
    Create2,
    Selfdestruct,
};

std::string_view gas_rule_name(GasRule rule) noexcept;

struct OpSpec
{
    OpInfo op;
    Gas static_gas = 0;
    GasRule dynamic_gas = GasRule::None;
    std::vector<SpecPath> paths;
};

/// Registry lookup; the same object is returned for repeated calls. Throws UndefinedOpcode.
const OpSpec& spec_for(uint8_t opcode, Fork fork = latest_fork);

/// Paths in stable order (the coverage denominator for the opcode).
const std::vector<SpecPath>& enumerate_paths(const OpSpec& spec) noexcept;

bool has_path(const OpSpec& spec, PathId id) noexcept;

namespace gas
{
inline constexpr Gas warm_access = 100;
inline constexpr Gas cold_account_access = 2600;
inline constexpr Gas cold_sload = 2100;
inline constexpr Gas exp_per_byte = 50;
inline constexpr Gas memory_per_word = 3;
inline constexpr Gas memory_quad_divisor = 512;
inline constexpr Gas copy_per_word = 3;
inline constexpr Gas keccak_per_word = 6;
inline constexpr Gas log_per_byte = 8;
inline constexpr Gas initcode_per_word = 2;
inline constexpr Gas sstore_set = 20000;
inline constexpr Gas sstore_reset = 2900;
inline constexpr Gas sstore_sentry = 2300;
inline constexpr Gas call_value = 9000;
inline constexpr Gas new_account = 25000;
inline constexpr Gas selfdestruct_new_account = 25000;
inline constexpr size_t max_initcode_size = 49152;
}  // namespace gas

/// Memory words needed to cover [offset, offset + size); nullopt when the range
/// is beyond any payable expansion.
std::optional<uint64_t> words_for_range(const Word& offset, const Word& size) noexcept;

/// Quadratic memory cost of `words` words.
Gas memory_cost(uint64_t words) noexcept;

struct MemoryExpansion
{
    uint64_t current_words = 0;
    std::optional<uint64_t> new_words;  ///< nullopt: unpayable expansion.
};

struct SstoreInputs
{
    Word original;
    Word current;
    Word new_value;
};

/// Observed inputs for the dynamic part of an opcode's cost. Each rule reads
/// only the fields it needs.
struct DynamicInputs
{
    std::optional<Word> exponent;
    std::optional<bool> warm;
    std::optional<MemoryExpansion> memory;
    std::optional<Word> data_size;
    std::optional<SstoreInputs> sstore;
    std::optional<bool> value_transfer;
    std::optional<bool> target_empty;
};

/// static_gas + dynamic component, saturating at gas_infinite. Throws MissingDynamicInput.
Gas gas_cost(const OpSpec& spec, const DynamicInputs& inputs);
}  // namespace opdiff

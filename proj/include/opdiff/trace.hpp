// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/bytecode.hpp>
#include <opdiff/opspec.hpp>
#include <opdiff/word.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace opdiff
{
enum class HaltReason : uint8_t
{
    Success,
    Revert,
    OutOfGas,
    StackUnderflow,
    StackOverflow,
    InvalidJumpdest,
    InvalidOpcode,
    WriteInStatic,
    EngineError,  ///< Engine-internal fault; never a spec-defined halt.
};

std::string_view halt_name(HaltReason r) noexcept;
std::optional<HaltReason> parse_halt(std::string_view name) noexcept;
/// Exceptional halts consume all remaining gas.
bool is_exceptional(HaltReason r) noexcept;

/// Spec path corresponding to an exceptional halt (Success for normal halts).
PathId path_of(HaltReason r) noexcept;

/// Storage-affecting state changes keyed "slot:0x..", "transient:0x..",
/// "balance:0x<addr>", "nonce:0x<addr>"; values are the post-step values.
using StorageDelta = std::map<std::string, Word>;

/// Engine state captured before an opcode executes; gas_cost and
/// storage_delta are filled once the opcode has run.
struct StepRecord
{
    uint64_t pc = 0;
    uint8_t op = 0;
    std::string op_name;
    Gas gas = 0;
    Gas gas_cost = 0;
    std::vector<Word> stack;  ///< bottom-to-top
    uint64_t mem_size = 0;
    /// "0x<hex>" up to max_traced_memory bytes, else "keccak256:0x<digest>".
    std::optional<std::string> memory;
    uint32_t depth = 1;
    std::optional<StorageDelta> storage_delta;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

inline constexpr size_t max_traced_memory = 4096;

bool is_memory_digest(const std::string& memory) noexcept;

struct FinalState
{
    HaltReason halt = HaltReason::Success;
    Bytes return_data;
    Gas gas_used = 0;
    std::map<Word, Word> storage_after;
    std::string error_detail;  ///< Diagnostics; never compared.

    friend bool operator==(const FinalState&, const FinalState&) = default;
};

struct Trace
{
    std::string engine_id;
    std::string program_key;
    std::string context_key;
    Fork fork = latest_fork;
    std::vector<StepRecord> steps;
    FinalState final;

    friend bool operator==(const Trace&, const Trace&) = default;
};

/// True when the six storage-affecting opcodes record storage deltas.
bool affects_storage(uint8_t op) noexcept;

/// 16-hex-char content address of a program.
std::string program_key(const Bytes& code);
}  // namespace opdiff

// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/bytecode.hpp>
#include <opdiff/context.hpp>
#include <opdiff/opspec.hpp>

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace opdiff
{
using Rng = std::mt19937_64;

/// A per-opcode test program. SUCCESS seeds push exactly the operands the
/// target pops, then run the target, then STOP (unless the target halts).
struct Seed
{
    uint8_t opcode = 0;
    BytecodeProgram program;
    PathId intended_path = PathId::Success;
    uint64_t rng_seed = 0;
    /// Byte offset of the first operand push (after any memory setup).
    size_t operand_offset = 0;
    /// Byte offset of the target opcode.
    size_t target_offset = 0;
};

/// Throws UnsupportedOpcode for bytes outside the implemented subset.
Seed build_seed(uint8_t opcode, Fork fork, uint64_t rng_seed);

struct MutationConfig
{
    double p = 0.3;
    uint64_t t = 64;
    uint64_t rng_seed = 0;

    /// Throws ConfigError when p is outside [0, 1].
    void validate() const;
};

/// A program aimed at one spec path of the target opcode.
struct Candidate
{
    BytecodeProgram program;
    PathId target = PathId::Success;
    /// Distinguishes several candidates for the same path, e.g. the number of
    /// operands kept for a stack-underflow variant. -1 when unused.
    int parameter = -1;
    Gas gas_limit = ample_gas;
    bool static_flag = false;
    std::string provenance = "fallback";
};

/// Deterministic path-targeting constructions, at least one per reachable
/// SpecPath. `pricing` is the context used to compute the out-of-gas
/// boundary; candidates inherit everything but gas limit and static flag from
/// whatever context they are later run under. Unreachable paths are skipped
/// and described in `notes`.
std::vector<Candidate> mutate_control_flow(
    const Seed& seed, const OpSpec& spec, const ExecContext& pricing, std::vector<std::string>* notes = nullptr);

/// Variant of a SUCCESS seed that stores every result word to memory and
/// returns it, so results surface in return data. nullopt when the target
/// pushes nothing or halts by itself.
std::optional<BytecodeProgram> observable_variant(const Seed& seed, const OpSpec& spec);

/// Argument-oriented mutation over PUSH immediates. Each of `t` iterations
/// rewrites every immediate of the original program: with r ~ U[0,1),
/// r < p/2 gives all 0x00, r < p gives all 0xFF, otherwise fresh random bytes.
std::set<Bytes> mutate_arguments(const BytecodeProgram& program, const MutationConfig& config);
std::set<Bytes> mutate_arguments(const Seed& seed, const MutationConfig& config);

/// Opcodes `build_seed` supports at `fork`, ascending.
std::vector<uint8_t> implemented_opcodes(Fork fork = latest_fork);

/// Per-program sidecar written next to each corpus file.
struct CorpusEntryMeta
{
    std::string opcode;
    std::string intended_path;
    std::string provenance;
    uint64_t rng_seed = 0;
};

/// Writes <dir>/<key>.hex and <dir>/<key>.json; returns the key. Appending the
/// same program twice is idempotent.
std::string write_corpus_entry(const std::filesystem::path& dir, const Bytes& program, const CorpusEntryMeta& meta);

/// Derives an independent stream seed from a parent seed and labels.
uint64_t derive_seed(uint64_t parent, uint64_t a, uint64_t b = 0, uint64_t c = 0) noexcept;
}  // namespace opdiff

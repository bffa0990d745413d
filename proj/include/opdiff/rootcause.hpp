// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/differ.hpp>
#include <opdiff/engine.hpp>

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace opdiff
{
inline constexpr std::string_view unknown_function = "UNKNOWN";

enum class FuncMapProvenance : uint8_t
{
    Static,
    Llm,
    Fixture,
};

std::string_view provenance_name(FuncMapProvenance p) noexcept;

/// Opcode -> implementing function of one engine.
struct FuncMap
{
    std::string engine_id;
    std::map<uint8_t, std::string> entries;
    FuncMapProvenance provenance = FuncMapProvenance::Static;

    /// The mapped identifier, or UNKNOWN.
    std::string lookup(uint8_t opcode) const;
};

struct FuncMapAdapter
{
    FuncMapProvenance kind = FuncMapProvenance::Static;
    /// FIXTURE: directory holding <engine_id>.json objects {"0x0a": "fn", ...}.
    std::filesystem::path fixture_dir = "fixtures/funcmap";
    /// LLM: shell command; {engine} and {opcodes} are substituted. It must print
    /// the same JSON object shape.
    std::string command;
};

/// Never throws AdapterUnavailable: an unavailable adapter yields a map with
/// every requested opcode UNKNOWN.
FuncMap extract_func_map(const Engine& engine, const std::vector<uint8_t>& opcodes, const FuncMapAdapter& adapter);

struct RootCause
{
    uint8_t opcode = 0;
    std::string op_name;
    std::string func{unknown_function};
    std::set<Phase> cause;
    /// Set when the first difference is not attributable to an executed step.
    bool non_execution_stage = false;
    std::optional<size_t> evidence_step;  ///< step index of the blamed instruction
    std::vector<std::string> evidence_fields;

    friend bool operator==(const RootCause&, const RootCause&) = default;
};

/// Blame the first divergent step of `suspect` relative to `baseline`.
/// Throws NoDivergence when the traces agree.
RootCause localize(const Trace& baseline, const Trace& suspect, const FuncMap& suspect_map);

/// Executes both engines on the input, then localizes.
RootCause localize(const BytecodeProgram& program, const ExecContext& ctx, const Engine& baseline,
    const Engine& suspect, const FuncMap& suspect_map);

/// Phase blamed for a halt reason; nullopt for normal halts.
std::optional<Phase> phase_for_halt(HaltReason r) noexcept;
}  // namespace opdiff

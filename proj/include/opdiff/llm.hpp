// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/generator.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace opdiff
{
/// The fields of a path-targeting generation request.
struct LlmRequest
{
    std::string op_name;
    std::string seed;            ///< program hex
    std::string seed_mnemonics;  ///< one instruction per line
    std::string icfg;            ///< JSON array of the opcode's spec paths

    friend bool operator==(const LlmRequest&, const LlmRequest&) = default;
};

LlmRequest make_request(const Seed& seed, const OpSpec& spec);

/// Canonical JSON of a request; its digest names fixture files.
std::string request_json(const LlmRequest& request);
std::string request_hash(const LlmRequest& request);

enum class LlmAdapterKind : uint8_t
{
    Fixture,   ///< replay <fixture_dir>/<request_hash>.txt
    Fallback,  ///< deterministic: mutate_control_flow
    External,  ///< run `command`; {request_file} is replaced by a JSON request path
};

std::string_view adapter_name(LlmAdapterKind kind) noexcept;
/// Accepts "fixture", "fallback", "external"; throws ConfigError.
LlmAdapterKind parse_adapter(std::string_view name);

struct LlmAdapter
{
    LlmAdapterKind kind = LlmAdapterKind::Fallback;
    std::filesystem::path fixture_dir = "fixtures/llm";
    std::string command;
};

struct LlmResult
{
    std::vector<Candidate> candidates;
    size_t invalid = 0;  ///< response entries dropped by validation
};

/// Splits a "[hex, hex, ...]" response. Entries that are not hex, do not
/// decode cleanly or fail the stack sanity check are counted, not returned.
LlmResult parse_response(std::string_view response, std::string_view provenance, Fork fork);

/// Static stack check over a straight-line decode: no truncated immediate and
/// the depth never exceeds one past the stack limit.
bool passes_sanity_check(const BytecodeProgram& program);

/// Runs the adapter. Throws AdapterUnavailable when a fixture is missing or
/// the external command fails; the fallback adapter never throws.
LlmResult llm_generate(const Seed& seed, const OpSpec& spec, const ExecContext& pricing, const LlmAdapter& adapter);
}  // namespace opdiff

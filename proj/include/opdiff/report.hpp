// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/differ.hpp>
#include <opdiff/rootcause.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace opdiff
{
struct BugReport
{
    Divergence divergence;
    RootCause root_cause;
    std::string program_hex;
    uint64_t context_seed = 0;
    std::string context_key;
    std::vector<std::string> engines;  ///< engine ids, baseline first
    std::string dedup_key;
    uint64_t duplicates = 0;  ///< further confirmed divergences with the same key

    friend bool operator==(const BugReport&, const BugReport&) = default;
};

/// "<opcode>|<phase>+<phase>|<engine_a>~<engine_b>"
std::string dedup_key(const RootCause& rc, const std::string& engine_a, const std::string& engine_b);

struct OpcodeCoverage
{
    std::map<PathId, uint64_t> hits;               ///< only paths in the opcode's spec
    std::map<std::string, uint64_t> parameter_hits;  ///< "STACK_UNDERFLOW/1" style keys
    size_t total_paths = 0;

    size_t covered() const noexcept;
    friend bool operator==(const OpcodeCoverage&, const OpcodeCoverage&) = default;
};

struct CoverageStats
{
    std::map<uint8_t, OpcodeCoverage> per_opcode;
    std::vector<std::string> misses;  ///< one line per unhit (opcode, path), with reason

    size_t total_pairs() const noexcept;
    size_t covered_pairs() const noexcept;
    double fraction() const noexcept;
    friend bool operator==(const CoverageStats&, const CoverageStats&) = default;
};

std::string phase_set_name(const std::set<Phase>& phases);
std::optional<Phase> parse_phase(std::string_view name) noexcept;

std::string reports_to_json(const std::vector<BugReport>& reports);
/// Throws Error on malformed input.
std::vector<BugReport> reports_from_json(std::string_view text);
std::string coverage_to_json(const CoverageStats& stats);
CoverageStats coverage_from_json(std::string_view text);
std::string render_markdown(const std::vector<BugReport>& reports, const CoverageStats& stats);

enum class ReportFormat : uint8_t
{
    Json,
    Markdown,
    Both,
};

/// Writes reports.json, coverage.json and/or reports.md under `dir`.
/// Throws IoFailure.
void emit_report(const std::vector<BugReport>& reports, const CoverageStats& stats, ReportFormat format,
    const std::filesystem::path& dir);
}  // namespace opdiff

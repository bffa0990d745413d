// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/external.hpp>
#include <opdiff/generator.hpp>
#include <opdiff/llm.hpp>
#include <opdiff/report.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace opdiff
{
struct CampaignConfig
{
    /// Built-in ids ("reference", "mutant-F<n>") or names of `external` adapters.
    std::vector<std::string> engines;
    std::map<std::string, std::string> external;  ///< adapter name -> command template
    std::string baseline = "reference";
    std::vector<uint8_t> opcodes;  ///< empty means every implemented opcode
    uint64_t seeds_per_opcode = 4;
    uint64_t control_flow_rounds = 1;
    MutationConfig mutation;  ///< rng_seed is ignored; streams derive from master_seed
    uint64_t master_seed = 0;
    size_t parallelism = 1;
    std::filesystem::path out_dir;  ///< empty: nothing persisted
    Fork fork = latest_fork;
    LlmAdapter llm;
    FuncMapAdapter funcmap;

    /// reference plus every cataloged mutant.
    static CampaignConfig catalog_default();

    /// Throws ConfigError.
    void validate() const;
};

/// Reads `key = value` lines ('#' starts a comment) over `base`.
/// Keys: engines, baseline, opcodes, seeds, control_flow_rounds, p, t, seed,
/// parallelism, out, fork, llm_adapter, llm_fixture_dir, llm_command,
/// funcmap_adapter, funcmap_fixture_dir, funcmap_command, external.<name>.
/// Throws ConfigError.
CampaignConfig load_config(const std::filesystem::path& file, CampaignConfig base = CampaignConfig::catalog_default());

/// "all" or a comma list of mnemonics / 0x bytes. Throws ConfigError.
std::vector<uint8_t> parse_opcode_list(std::string_view text, Fork fork);
std::vector<std::string> split_list(std::string_view text);

struct CampaignSummary
{
    uint64_t programs = 0;
    uint64_t executions = 0;
    uint64_t raw_divergences = 0;
    uint64_t confirmed = 0;
    uint64_t quarantined = 0;
    uint64_t duplicates = 0;
    uint64_t targeted = 0;         ///< path-targeted fallback emissions
    uint64_t targeted_matched = 0;  ///< ... whose reference halt matched the target
    uint64_t llm_invalid = 0;
    std::vector<std::string> notes;  ///< skipped paths, adapter degradation, targeting misses
};

struct CampaignResult
{
    std::vector<BugReport> reports;
    CoverageStats coverage;
    CampaignSummary summary;
};

/// Resolves engine ids; duplicates are aliased as "<id>#2", "<id>#3", ...
/// Throws UnknownEngine.
std::map<std::string, EnginePtr> resolve_engines(const CampaignConfig& config, std::vector<std::string>* ordered_ids = nullptr);

/// Full pipeline. Throws ConfigError or EngineUnhealthy before any work.
CampaignResult run_campaign(const CampaignConfig& config);

/// One executed program with the opcode it targeted.
struct ExecutedProgram
{
    uint8_t target = 0;
    std::optional<PathId> intended;
    int parameter = -1;
    Trace reference;
};

/// Spec-path coverage over reference traces. An executed step that did not
/// halt exceptionally counts as SUCCESS for its opcode; an exceptional halt
/// counts its path for the halting opcode.
CoverageStats path_coverage(const std::vector<ExecutedProgram>& corpus, const std::vector<uint8_t>& opcodes, Fork fork);

struct ScanResult
{
    uint64_t total_opcodes = 0;
    uint64_t buggy_opcodes = 0;
    double rate = 0.0;
    std::map<std::string, bool> affected;  ///< contract name -> contains a buggy opcode
    std::vector<std::string> skipped;      ///< undecodable entries
};

/// Counts instructions (PUSH immediates excluded) over hex programs.
ScanResult scan_corpus_impact(const std::map<std::string, std::string>& corpus_hex, const std::set<uint8_t>& buggy);
/// Reads every *.hex file in `dir`.
ScanResult scan_corpus_impact(const std::filesystem::path& dir, const std::set<uint8_t>& buggy);

/// Writes generated programs (seeds, control-flow and argument mutants) to
/// `dir` without executing them. Returns the number of distinct programs.
size_t generate_corpus(const CampaignConfig& config, const std::filesystem::path& dir);
}  // namespace opdiff

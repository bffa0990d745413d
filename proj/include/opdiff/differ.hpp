// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/engine.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace opdiff
{
enum class Metric : uint8_t
{
    ReturnData,
    GasUsage,
    Storage,
};

std::string_view metric_name(Metric m) noexcept;
std::optional<Metric> parse_metric(std::string_view name) noexcept;

struct FieldDetail
{
    std::string field;
    std::string value_a;
    std::string value_b;

    friend bool operator==(const FieldDetail&, const FieldDetail&) = default;
};

struct Divergence
{
    Metric metric = Metric::ReturnData;
    std::string engine_a;  ///< the baseline
    std::string engine_b;
    std::optional<size_t> step_index;  ///< nullopt means FINAL
    FieldDetail detail;
    std::string program_ref;
    std::string context_ref;
    uint64_t context_seed = 0;

    friend bool operator==(const Divergence&, const Divergence&) = default;
};

/// Compares every trace against `baseline`, at most one Divergence per metric
/// per engine pair. Throws MismatchedInputs when traces come from different
/// programs or contexts and ConfigError when fork tags differ.
std::vector<Divergence> compare(const std::map<std::string, Trace>& traces, const std::string& baseline);

/// Result of the lockstep scan over two traces.
struct StepDivergence
{
    enum class Kind : uint8_t
    {
        None,
        Step,        ///< field differences at `index`
        Truncation,  ///< one trace has no record at `index`
        Final,       ///< steps equal; final summaries differ
    };
    Kind kind = Kind::None;
    size_t index = 0;
    /// Differing fields at `index`, in scan order. Pre-state fields are
    /// pc, op, gas, stack, mem_size, memory; post-step fields are HALT,
    /// gas_cost, storage_delta. Final fields are halt, return_data, gas_used,
    /// storage_after.
    std::vector<std::string> fields;

    friend bool operator==(const StepDivergence&, const StepDivergence&) = default;
};

bool is_pre_state_field(std::string_view field) noexcept;

StepDivergence first_divergent_step(const Trace& a, const Trace& b);

/// Where reproduction inputs live.
class ArtifactStore
{
public:
    virtual ~ArtifactStore() = default;
    virtual std::optional<Bytes> program(const std::string& key) const = 0;
    virtual std::optional<ExecContext> context(const std::string& key) const = 0;
};

class MemoryStore final : public ArtifactStore
{
public:
    std::string put(const Bytes& program);
    std::string put(const ExecContext& ctx);
    void erase_program(const std::string& key) { programs_.erase(key); }
    std::optional<Bytes> program(const std::string& key) const override;
    std::optional<ExecContext> context(const std::string& key) const override;

private:
    std::map<std::string, Bytes> programs_;
    std::map<std::string, ExecContext> contexts_;
};

/// <root>/programs/<key>.hex and <root>/contexts/<key>.json.
class DirectoryStore final : public ArtifactStore
{
public:
    explicit DirectoryStore(std::filesystem::path root) : root_{std::move(root)} {}
    std::string put(const Bytes& program) const;
    std::string put(const ExecContext& ctx) const;
    std::optional<Bytes> program(const std::string& key) const override;
    std::optional<ExecContext> context(const std::string& key) const override;

private:
    std::filesystem::path root_;
};

struct Reproduction
{
    bool confirmed = false;
    std::optional<Divergence> fresh;
};

/// Re-runs both engines of `d` on the stored inputs. Throws MissingArtifacts.
Reproduction reproduce(
    const Divergence& d, const std::map<std::string, EnginePtr>& engines, const ArtifactStore& store);
}  // namespace opdiff

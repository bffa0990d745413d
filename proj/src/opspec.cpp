// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/detail/opcode_table.hpp>
#include <opdiff/errors.hpp>
#include <opdiff/opspec.hpp>

#include <array>
#include <map>
#include <memory>

namespace opdiff
{
namespace
{
constexpr std::array<std::string_view, 7> path_names = {
    "SUCCESS", "STACK_UNDERFLOW", "STACK_OVERFLOW", "OUT_OF_GAS",
    "INVALID_JUMPDEST", "WRITE_IN_STATIC", "INVALID_OPCODE",
};

constexpr std::array<std::pair<std::string_view, GasRule>, 13> rule_names = {{
    {"none", GasRule::None},
    {"exp_bytes", GasRule::ExpBytes},
    {"account_access", GasRule::AccountAccess},
    {"memory", GasRule::Memory},
    {"copy", GasRule::Copy},
    {"keccak", GasRule::Keccak},
    {"log", GasRule::Log},
    {"sload", GasRule::Sload},
    {"sstore", GasRule::Sstore},
    {"call", GasRule::Call},
    {"create", GasRule::Create},
    {"create2", GasRule::Create2},
    {"selfdestruct", GasRule::Selfdestruct},
}};

GasRule parse_rule(std::string_view name)
{
    for (const auto& [n, r] : rule_names)
        if (n == name)
            return r;
    throw Error{"opcode table: unregistered dynamic gas rule '" + std::string{name} + "'"};
}

Gas add_sat(Gas a, Gas b) noexcept
{
    return a > gas_infinite - b ? gas_infinite : a + b;
}

Gas mul_sat(Gas a, Gas b) noexcept
{
    if (a != 0 && b > gas_infinite / a)
        return gas_infinite;
    return a * b;
}

Gas per_word(const Word& size, Gas unit) noexcept
{
    const auto bytes = to_u64(size);
    if (!bytes || *bytes > (uint64_t{1} << 40))
        return gas_infinite;
    return mul_sat((*bytes + 31) / 32, unit);
}

template <typename T>
const T& require(const std::optional<T>& v, const OpSpec& spec, std::string_view what)
{
    if (!v)
        throw MissingDynamicInput{spec.op.mnemonic + " requires dynamic input '" + std::string{what} + "'"};
    return *v;
}

Gas expansion_cost(const MemoryExpansion& m) noexcept
{
    if (!m.new_words)
        return gas_infinite;
    if (*m.new_words <= m.current_words)
        return 0;
    return memory_cost(*m.new_words) - memory_cost(m.current_words);
}

std::vector<SpecPath> build_paths(const detail::TableRow& row)
{
    const auto& info = row.info;
    std::vector<SpecPath> paths;
    for (const auto& extra : row.extra_paths)
        if (extra == "INVALID_OPCODE")
            return {{PathId::InvalidOpcode, "always", true}};

    paths.push_back({PathId::Success, "otherwise", false});
    if (info.pops > 0)
        paths.push_back({PathId::StackUnderflow, "stack.size < " + std::to_string(info.pops), true});
    if (info.pushes > info.pops)
        paths.push_back({PathId::StackOverflow,
            "stack.size > " + std::to_string(1024 - (info.pushes - info.pops)), true});
    if (row.static_gas > 0 || row.dynamic_rule != "none")
        paths.push_back({PathId::OutOfGas, "gas_left < cost", true});
    for (const auto& extra : row.extra_paths)
    {
        const auto id = parse_path(extra);
        if (!id)
            throw Error{"opcode table: unknown path '" + extra + "' for " + info.mnemonic};
        if (*id == PathId::InvalidJumpdest)
            paths.push_back({*id, "!is_jumpdest(dest)", true});
        else if (*id == PathId::WriteInStatic)
            paths.push_back({*id, "tx.static && writes_state", true});
        else
            paths.push_back({*id, "table", true});
    }
    return paths;
}

using Registry = std::array<std::unique_ptr<OpSpec>, 256>;

const Registry& registry()
{
    static const auto reg = [] {
        Registry r;
        for (const auto& row : detail::builtin_table())
        {
            if (!row)
                continue;
            auto spec = std::make_unique<OpSpec>();
            spec->op = row->info;
            spec->static_gas = row->static_gas;
            spec->dynamic_gas = parse_rule(row->dynamic_rule);
            spec->paths = build_paths(*row);
            r[row->info.byte] = std::move(spec);
        }
        return r;
    }();
    return reg;
}
}  // namespace

std::string_view path_name(PathId id) noexcept
{
    return path_names[static_cast<size_t>(id)];
}

std::optional<PathId> parse_path(std::string_view name) noexcept
{
    for (size_t i = 0; i < path_names.size(); ++i)
        if (path_names[i] == name)
            return static_cast<PathId>(i);
    return std::nullopt;
}

std::string_view gas_rule_name(GasRule rule) noexcept
{
    for (const auto& [n, r] : rule_names)
        if (r == rule)
            return n;
    return "none";
}

const OpSpec& spec_for(uint8_t opcode, Fork fork)
{
    const auto& spec = registry()[opcode];
    if (!spec || spec->op.introduced > fork)
        throw UndefinedOpcode{"opcode 0x" + to_hex(std::span{&opcode, 1}) + " undefined at " +
                              std::string{fork_name(fork)}};
    return *spec;
}

const std::vector<SpecPath>& enumerate_paths(const OpSpec& spec) noexcept
{
    return spec.paths;
}

bool has_path(const OpSpec& spec, PathId id) noexcept
{
    for (const auto& p : spec.paths)
        if (p.id == id)
            return true;
    return false;
}

std::optional<uint64_t> words_for_range(const Word& offset, const Word& size) noexcept
{
    if (size == 0)
        return 0;
    // Past 2^32 bytes the quadratic term alone exceeds any block gas limit.
    constexpr uint64_t limit = uint64_t{1} << 32;
    const auto off = to_u64(offset);
    const auto len = to_u64(size);
    if (!off || !len || *off > limit || *len > limit)
        return std::nullopt;
    return (*off + *len + 31) / 32;
}

Gas memory_cost(uint64_t words) noexcept
{
    return gas::memory_per_word * words + words * words / gas::memory_quad_divisor;
}

Gas gas_cost(const OpSpec& spec, const DynamicInputs& in)
{
    Gas dynamic = 0;
    switch (spec.dynamic_gas)
    {
    case GasRule::None:
        break;
    case GasRule::ExpBytes:
        dynamic = gas::exp_per_byte * byte_length(require(in.exponent, spec, "exponent"));
        break;
    case GasRule::AccountAccess:
        dynamic = require(in.warm, spec, "warm") ? gas::warm_access : gas::cold_account_access;
        break;
    case GasRule::Memory:
        dynamic = expansion_cost(require(in.memory, spec, "memory"));
        break;
    case GasRule::Copy:
        dynamic = add_sat(per_word(require(in.data_size, spec, "data_size"), gas::copy_per_word),
            expansion_cost(require(in.memory, spec, "memory")));
        break;
    case GasRule::Keccak:
        dynamic = add_sat(per_word(require(in.data_size, spec, "data_size"), gas::keccak_per_word),
            expansion_cost(require(in.memory, spec, "memory")));
        break;
    case GasRule::Log:
    {
        const auto size = to_u64(require(in.data_size, spec, "data_size"));
        dynamic = add_sat(size ? mul_sat(*size, gas::log_per_byte) : gas_infinite,
            expansion_cost(require(in.memory, spec, "memory")));
        break;
    }
    case GasRule::Sload:
        dynamic = require(in.warm, spec, "warm") ? gas::warm_access : gas::cold_sload;
        break;
    case GasRule::Sstore:
    {
        const auto& s = require(in.sstore, spec, "sstore");
        if (!require(in.warm, spec, "warm"))
            dynamic += gas::cold_sload;
        if (s.original == s.current && s.current != s.new_value)
            dynamic += s.original == 0 ? gas::sstore_set : gas::sstore_reset;
        else
            dynamic += gas::warm_access;
        break;
    }
    case GasRule::Call:
    {
        dynamic = require(in.warm, spec, "warm") ? gas::warm_access : gas::cold_account_access;
        const bool carries_value = spec.op.pops == 7;  // CALL, CALLCODE
        if (carries_value && require(in.value_transfer, spec, "value_transfer"))
        {
            dynamic += gas::call_value;
            if (spec.op.byte == op::CALL && require(in.target_empty, spec, "target_empty"))
                dynamic += gas::new_account;
        }
        dynamic = add_sat(dynamic, expansion_cost(require(in.memory, spec, "memory")));
        break;
    }
    case GasRule::Create:
    case GasRule::Create2:
    {
        const auto& size = require(in.data_size, spec, "data_size");
        dynamic = per_word(size, gas::initcode_per_word);
        if (spec.dynamic_gas == GasRule::Create2)
            dynamic = add_sat(dynamic, per_word(size, gas::keccak_per_word));
        dynamic = add_sat(dynamic, expansion_cost(require(in.memory, spec, "memory")));
        break;
    }
    case GasRule::Selfdestruct:
        if (!require(in.warm, spec, "warm"))
            dynamic += gas::cold_account_access;
        if (require(in.value_transfer, spec, "value_transfer") && require(in.target_empty, spec, "target_empty"))
            dynamic += gas::selfdestruct_new_account;
        break;
    }
    return add_sat(spec.static_gas, dynamic);
}
}  // namespace opdiff

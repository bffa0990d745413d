// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/differ.hpp>
#include <opdiff/errors.hpp>

#include <fstream>
#include <sstream>

namespace opdiff
{
namespace
{
std::string render(const std::optional<StorageDelta>& delta)
{
    if (!delta)
        return "-";
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : *delta)
    {
        if (!first)
            out += ",";
        first = false;
        out += k + ":" + to_quantity(v);
    }
    return out + "}";
}

std::string render(const std::map<Word, Word>& storage)
{
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : storage)
    {
        if (!first)
            out += ",";
        first = false;
        out += to_quantity(k) + ":" + to_quantity(v);
    }
    return out + "}";
}

std::string render_gas(Gas g)
{
    return std::to_string(g);
}

/// What a trace does after recording step i.
enum class After : uint8_t
{
    Continues,
    Crashes,
    Halts,
};

After after_step(const Trace& t, size_t i)
{
    if (i + 1 < t.steps.size())
        return After::Continues;
    return t.final.halt == HaltReason::EngineError ? After::Crashes : After::Halts;
}

bool halt_differs(const Trace& a, const Trace& b, size_t i)
{
    const auto sa = after_step(a, i);
    const auto sb = after_step(b, i);
    if (sa == After::Crashes || sb == After::Crashes)
        return false;
    if (sa != sb)
        return true;
    return sa == After::Halts && a.final.halt != b.final.halt;
}

std::vector<std::string> final_fields(const FinalState& a, const FinalState& b)
{
    std::vector<std::string> fields;
    if (a.halt != b.halt)
        fields.emplace_back("halt");
    if (a.return_data != b.return_data)
        fields.emplace_back("return_data");
    if (a.gas_used != b.gas_used)
        fields.emplace_back("gas_used");
    if (a.storage_after != b.storage_after)
        fields.emplace_back("storage_after");
    return fields;
}

std::optional<Divergence> return_data_divergence(const Trace& a, const Trace& b)
{
    Divergence d;
    d.metric = Metric::ReturnData;
    if (a.final.halt != b.final.halt)
    {
        d.detail = {"halt", std::string{halt_name(a.final.halt)}, std::string{halt_name(b.final.halt)}};
        return d;
    }
    if (a.final.return_data != b.final.return_data)
    {
        d.detail = {"return_data", "0x" + to_hex(a.final.return_data), "0x" + to_hex(b.final.return_data)};
        return d;
    }
    const size_t n = std::min(a.steps.size(), b.steps.size());
    for (size_t i = 0; i < n; ++i)
    {
        const auto& ma = a.steps[i].memory;
        const auto& mb = b.steps[i].memory;
        if (ma && mb && *ma != *mb && (is_memory_digest(*ma) || is_memory_digest(*mb)))
        {
            d.step_index = i;
            d.detail = {"MEMORY", *ma, *mb};
            return d;
        }
    }
    return std::nullopt;
}

std::optional<Divergence> gas_divergence(const Trace& a, const Trace& b)
{
    Divergence d;
    d.metric = Metric::GasUsage;
    const size_t n = std::max(a.steps.size(), b.steps.size());
    for (size_t i = 0; i < n; ++i)
    {
        const bool ha = i < a.steps.size();
        const bool hb = i < b.steps.size();
        if (ha && hb && a.steps[i].gas_cost == b.steps[i].gas_cost)
            continue;
        d.step_index = i;
        d.detail = {"gas_cost", ha ? render_gas(a.steps[i].gas_cost) : "-", hb ? render_gas(b.steps[i].gas_cost) : "-"};
        return d;
    }
    if (a.final.gas_used != b.final.gas_used)
    {
        d.detail = {"gas_used", render_gas(a.final.gas_used), render_gas(b.final.gas_used)};
        return d;
    }
    return std::nullopt;
}

std::optional<Divergence> storage_divergence(const Trace& a, const Trace& b)
{
    Divergence d;
    d.metric = Metric::Storage;
    const size_t n = std::max(a.steps.size(), b.steps.size());
    for (size_t i = 0; i < n; ++i)
    {
        const std::optional<StorageDelta> none;
        const auto& da = i < a.steps.size() ? a.steps[i].storage_delta : none;
        const auto& db = i < b.steps.size() ? b.steps[i].storage_delta : none;
        if (da == db)
            continue;
        d.step_index = i;
        d.detail = {"storage_delta", render(da), render(db)};
        return d;
    }
    if (a.final.storage_after != b.final.storage_after)
    {
        d.detail = {"storage_after", render(a.final.storage_after), render(b.final.storage_after)};
        return d;
    }
    return std::nullopt;
}
}  // namespace

std::string_view metric_name(Metric m) noexcept
{
    switch (m)
    {
    case Metric::ReturnData:
        return "RETURN_DATA";
    case Metric::GasUsage:
        return "GAS_USAGE";
    case Metric::Storage:
        return "STORAGE";
    }
    return "";
}

std::optional<Metric> parse_metric(std::string_view name) noexcept
{
    for (const auto m : {Metric::ReturnData, Metric::GasUsage, Metric::Storage})
        if (metric_name(m) == name)
            return m;
    return std::nullopt;
}

bool is_pre_state_field(std::string_view field) noexcept
{
    return field == "pc" || field == "op" || field == "gas" || field == "stack" || field == "mem_size" ||
           field == "memory";
}

StepDivergence first_divergent_step(const Trace& a, const Trace& b)
{
    using Kind = StepDivergence::Kind;
    const size_t n = std::max(a.steps.size(), b.steps.size());
    for (size_t i = 0; i < n; ++i)
    {
        if (i >= a.steps.size() || i >= b.steps.size())
            return {Kind::Truncation, i, {"TRUNCATION"}};
        const auto& sa = a.steps[i];
        const auto& sb = b.steps[i];
        std::vector<std::string> fields;
        if (sa.pc != sb.pc)
            fields.emplace_back("pc");
        else if (sa.op != sb.op)
            fields.emplace_back("op");
        if (sa.gas != sb.gas)
            fields.emplace_back("gas");
        if (sa.stack != sb.stack)
            fields.emplace_back("stack");
        if (sa.mem_size != sb.mem_size)
            fields.emplace_back("mem_size");
        if (sa.memory != sb.memory)
            fields.emplace_back("memory");
        if (!fields.empty())
            return {Kind::Step, i, fields};

        if (halt_differs(a, b, i))
            return {Kind::Step, i, {"HALT"}};
        if (sa.gas_cost != sb.gas_cost)
            fields.emplace_back("gas_cost");
        if (sa.storage_delta != sb.storage_delta)
            fields.emplace_back("storage_delta");
        if (!fields.empty())
            return {Kind::Step, i, fields};
    }
    auto fields = final_fields(a.final, b.final);
    if (fields.empty())
        return {};
    return {Kind::Final, n, std::move(fields)};
}

std::vector<Divergence> compare(const std::map<std::string, Trace>& traces, const std::string& baseline)
{
    if (traces.size() < 2)
        throw MismatchedInputs{"comparison needs at least two traces"};
    const auto base_it = traces.find(baseline);
    if (base_it == traces.end())
        throw MismatchedInputs{"no trace for baseline engine '" + baseline + "'"};
    const Trace& base = base_it->second;
    std::vector<Divergence> out;
    for (const auto& [id, t] : traces)
    {
        if (t.program_key != base.program_key || t.context_key != base.context_key)
            throw MismatchedInputs{"trace of '" + id + "' comes from a different program or context"};
        if (t.fork != base.fork)
            throw ConfigError{"fork mismatch between '" + baseline + "' and '" + id + "'"};
        if (id == baseline)
            continue;
        for (auto d : {return_data_divergence(base, t), gas_divergence(base, t), storage_divergence(base, t)})
        {
            if (!d)
                continue;
            d->engine_a = baseline;
            d->engine_b = id;
            d->program_ref = base.program_key;
            d->context_ref = base.context_key;
            out.push_back(std::move(*d));
        }
    }
    return out;
}

std::string MemoryStore::put(const Bytes& program)
{
    auto key = program_key(program);
    programs_[key] = program;
    return key;
}

std::string MemoryStore::put(const ExecContext& ctx)
{
    auto key = context_key(ctx);
    contexts_[key] = ctx;
    return key;
}

std::optional<Bytes> MemoryStore::program(const std::string& key) const
{
    const auto it = programs_.find(key);
    return it == programs_.end() ? std::nullopt : std::optional{it->second};
}

std::optional<ExecContext> MemoryStore::context(const std::string& key) const
{
    const auto it = contexts_.find(key);
    return it == contexts_.end() ? std::nullopt : std::optional{it->second};
}

namespace
{
std::optional<std::string> slurp(const std::filesystem::path& p)
{
    std::ifstream in{p, std::ios::binary};
    if (!in)
        return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void dump(const std::filesystem::path& p, std::string_view content)
{
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out{p, std::ios::binary};
    out << content;
    if (!out)
        throw IoFailure{"cannot write " + p.string()};
}
}  // namespace

std::string DirectoryStore::put(const Bytes& program) const
{
    auto key = program_key(program);
    dump(root_ / "programs" / (key + ".hex"), to_hex(program) + "\n");
    return key;
}

std::string DirectoryStore::put(const ExecContext& ctx) const
{
    auto key = context_key(ctx);
    dump(root_ / "contexts" / (key + ".json"), serialize(ctx) + "\n");
    return key;
}

std::optional<Bytes> DirectoryStore::program(const std::string& key) const
{
    auto text = slurp(root_ / "programs" / (key + ".hex"));
    if (!text)
        return std::nullopt;
    while (!text->empty() && std::isspace(static_cast<unsigned char>(text->back())))
        text->pop_back();
    return from_hex(*text);
}

std::optional<ExecContext> DirectoryStore::context(const std::string& key) const
{
    const auto text = slurp(root_ / "contexts" / (key + ".json"));
    if (!text)
        return std::nullopt;
    return deserialize_context(*text);
}

Reproduction reproduce(
    const Divergence& d, const std::map<std::string, EnginePtr>& engines, const ArtifactStore& store)
{
    const auto code = store.program(d.program_ref);
    if (!code)
        throw MissingArtifacts{"program " + d.program_ref + " is not in the corpus store"};
    const auto ctx = store.context(d.context_ref);
    if (!ctx)
        throw MissingArtifacts{"context " + d.context_ref + " is not in the context store"};
    const auto program = disassemble(*code, ctx->fork);

    std::map<std::string, Trace> traces;
    for (const auto& id : {d.engine_a, d.engine_b})
    {
        const auto it = engines.find(id);
        if (it == engines.end())
            throw MissingArtifacts{"engine '" + id + "' is not available"};
        traces[id] = it->second->execute(program, *ctx);
    }
    Reproduction r;
    for (auto& fresh : compare(traces, d.engine_a))
        if (fresh.metric == d.metric)
        {
            fresh.context_seed = d.context_seed;
            r.confirmed = true;
            r.fresh = std::move(fresh);
            break;
        }
    return r;
}
}  // namespace opdiff

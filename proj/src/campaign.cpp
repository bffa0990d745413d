// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/campaign.hpp>
#include <opdiff/errors.hpp>
#include <opdiff/keccak.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace opdiff
{
namespace
{
std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string{s.substr(b, e - b + 1)};
}

template <typename T>
T parse_number(const std::string& key, const std::string& value)
{
    try
    {
        size_t used = 0;
        if constexpr (std::is_floating_point_v<T>)
        {
            const T v = std::stod(value, &used);
            if (used == value.size())
                return v;
        }
        else
        {
            if (!value.empty() && value[0] != '-')
            {
                const T v = static_cast<T>(std::stoull(value, &used, 0));
                if (used == value.size())
                    return v;
            }
        }
    }
    catch (const std::exception&)
    {
    }
    throw ConfigError{"bad value for '" + key + "': " + value};
}

std::string mnemonic(uint8_t byte)
{
    const auto info = opcode_info(byte, latest_fork);
    return info ? info->mnemonic : "0x" + to_hex(std::span{&byte, 1});
}

/// One program to run, with what it was built for.
struct WorkItem
{
    BytecodeProgram program;
    ExecContext ctx;
    uint8_t target = 0;
    std::optional<PathId> intended;
    int parameter = -1;
    std::string provenance;
    uint64_t seed_rng = 0;
};

struct UnitPlan
{
    std::vector<WorkItem> items;
    std::vector<std::string> notes;
    uint64_t llm_invalid = 0;
};

UnitPlan plan_unit(const CampaignConfig& cfg, uint8_t opcode, uint64_t seed_index)
{
    UnitPlan plan;
    const uint64_t seed_rng = derive_seed(cfg.master_seed, opcode, seed_index, 1);
    const uint64_t ctx_seed = derive_seed(cfg.master_seed, opcode, seed_index, 2);
    ExecContext ctx = make_context(ctx_seed);
    ctx.fork = cfg.fork;
    const Seed seed = build_seed(opcode, cfg.fork, seed_rng);
    const OpSpec& spec = spec_for(opcode, cfg.fork);

    std::vector<Candidate> candidates = mutate_control_flow(seed, spec, ctx, &plan.notes);
    if (cfg.llm.kind != LlmAdapterKind::Fallback)
    {
        for (uint64_t round = 0; round < cfg.control_flow_rounds; ++round)
        {
            try
            {
                auto res = llm_generate(seed, spec, ctx, cfg.llm);
                plan.llm_invalid += res.invalid;
                for (auto& c : res.candidates)
                    candidates.push_back(std::move(c));
            }
            catch (const AdapterUnavailable& e)
            {
                plan.notes.push_back(spec.op.mnemonic + ": LLM adapter unavailable (" + e.what() +
                                     "), deterministic candidates only");
                break;
            }
        }
    }

    std::set<std::tuple<Bytes, Gas, bool>> seen;
    const auto add = [&](WorkItem item) {
        if (seen.emplace(item.program.bytes(), item.ctx.tx.gas_limit, item.ctx.tx.static_flag).second)
            plan.items.push_back(std::move(item));
    };

    size_t success_index = 0;
    for (const auto& c : candidates)
    {
        WorkItem item{c.program, ctx, opcode, std::nullopt, c.parameter, c.provenance, seed_rng};
        item.ctx.tx.gas_limit = c.gas_limit;
        item.ctx.tx.static_flag = c.static_flag;
        const bool fallback = c.provenance.starts_with("fallback");
        if (fallback)
            item.intended = c.target;
        add(item);
        if (!fallback || c.target != PathId::Success)
            continue;
        MutationConfig mc = cfg.mutation;
        mc.rng_seed = derive_seed(cfg.master_seed, opcode, seed_index, 100 + success_index++);
        for (const auto& bytes : mutate_arguments(c.program, mc))
        {
            if (bytes == c.program.bytes())
                continue;
            add({disassemble(bytes, cfg.fork), ctx, opcode, std::nullopt, -1, "argument", seed_rng});
        }
    }
    return plan;
}

/// Coverage hits from one reference trace.
void accumulate(CoverageStats& stats, const Trace& t)
{
    const bool exceptional = is_exceptional(t.final.halt);
    for (size_t i = 0; i < t.steps.size(); ++i)
    {
        const auto& step = t.steps[i];
        const auto it = stats.per_opcode.find(step.op);
        if (it == stats.per_opcode.end())
            continue;
        auto& cov = it->second;
        const bool halting = exceptional && i + 1 == t.steps.size();
        const PathId path = halting ? path_of(t.final.halt) : PathId::Success;
        const auto hit = cov.hits.find(path);
        if (hit == cov.hits.end())
            continue;
        ++hit->second;
        if (path == PathId::StackUnderflow)
            ++cov.parameter_hits[std::string{path_name(path)} + "/" + std::to_string(step.stack.size())];
    }
}

CoverageStats empty_coverage(const std::vector<uint8_t>& opcodes, Fork fork)
{
    CoverageStats stats;
    for (const auto op : opcodes)
    {
        auto& cov = stats.per_opcode[op];
        const auto& paths = enumerate_paths(spec_for(op, fork));
        cov.total_paths = paths.size();
        for (const auto& p : paths)
            cov.hits[p.id] = 0;
    }
    return stats;
}

void merge_into(CoverageStats& into, const CoverageStats& from)
{
    for (const auto& [op, cov] : from.per_opcode)
    {
        auto& dst = into.per_opcode[op];
        for (const auto& [p, n] : cov.hits)
            dst.hits[p] += n;
        for (const auto& [k, n] : cov.parameter_hits)
            dst.parameter_hits[k] += n;
    }
}

void list_misses(CoverageStats& stats, const std::map<std::pair<uint8_t, PathId>, std::string>& reasons)
{
    stats.misses.clear();
    for (const auto& [op, cov] : stats.per_opcode)
        for (const auto& [p, n] : cov.hits)
        {
            if (n > 0)
                continue;
            const auto r = reasons.find({op, p});
            stats.misses.push_back(mnemonic(op) + " " + std::string{path_name(p)} + ": " +
                                   (r != reasons.end() ? r->second : "no executed program reached this path"));
        }
}

/// What the reference did at the targeted opcode.
std::optional<PathId> outcome_at_target(const Trace& t, uint8_t target)
{
    if (!t.steps.empty() && is_exceptional(t.final.halt) && t.steps.back().op == target)
        return path_of(t.final.halt);
    if (t.final.halt == HaltReason::EngineError)
        return std::nullopt;
    for (size_t i = 0; i < t.steps.size(); ++i)
        if (t.steps[i].op == target && !(is_exceptional(t.final.halt) && i + 1 == t.steps.size()))
            return PathId::Success;
    return std::nullopt;
}

struct Finding
{
    std::string key;
    BugReport report;
    ExecContext ctx;  ///< exactly what the divergent program ran under
};

struct UnitResult
{
    std::vector<Finding> findings;  ///< already deduplicated within the unit
    CoverageStats coverage;
    CampaignSummary summary;
    std::map<std::pair<uint8_t, PathId>, std::string> miss_reasons;
};

struct Shared
{
    const CampaignConfig& cfg;
    std::map<std::string, EnginePtr> engines;
    std::vector<std::string> order;  ///< baseline first
    std::map<std::string, FuncMap> funcmaps;
    std::vector<uint8_t> opcodes;
};

UnitResult run_unit(const Shared& sh, uint8_t opcode, uint64_t seed_index)
{
    UnitResult out;
    out.coverage = empty_coverage(sh.opcodes, sh.cfg.fork);

    auto plan = plan_unit(sh.cfg, opcode, seed_index);
    out.summary.notes = std::move(plan.notes);
    out.summary.llm_invalid = plan.llm_invalid;
    const auto& baseline = sh.cfg.baseline;
    const auto reference = reference_engine();

    for (const auto& item : plan.items)
    {
        ++out.summary.programs;
        std::map<std::string, Trace> traces;
        for (const auto& id : sh.order)
        {
            traces[id] = sh.engines.at(id)->execute(item.program, item.ctx);
            ++out.summary.executions;
        }
        const auto ref_it = traces.find("reference");
        const Trace ref_trace = ref_it != traces.end() ? ref_it->second : reference->execute(item.program, item.ctx);
        accumulate(out.coverage, ref_trace);

        if (item.intended)
        {
            ++out.summary.targeted;
            const auto got = outcome_at_target(ref_trace, item.target);
            if (got == item.intended)
                ++out.summary.targeted_matched;
            else
            {
                const std::string took = got ? std::string{path_name(*got)} : "no outcome at the target";
                out.summary.notes.push_back(mnemonic(item.target) + ": targeted " +
                                            std::string{path_name(*item.intended)} + ", reference took " + took);
                out.miss_reasons[{item.target, *item.intended}] =
                    "targeted candidate took " + took + " on the reference";
            }
        }

        auto divergences = compare(traces, baseline);
        if (divergences.empty())
            continue;
        MemoryStore store;
        store.put(item.program.bytes());
        store.put(item.ctx);
        for (auto& d : divergences)
        {
            ++out.summary.raw_divergences;
            d.context_seed = item.ctx.rng_seed;
            const auto repro = reproduce(d, sh.engines, store);
            if (!repro.confirmed)
            {
                ++out.summary.quarantined;
                continue;
            }
            ++out.summary.confirmed;
            const auto rc = localize(traces.at(d.engine_a), traces.at(d.engine_b), sh.funcmaps.at(d.engine_b));
            auto key = dedup_key(rc, d.engine_a, d.engine_b);
            const auto existing = std::find_if(
                out.findings.begin(), out.findings.end(), [&](const Finding& f) { return f.key == key; });
            if (existing != out.findings.end())
            {
                ++existing->report.duplicates;
                continue;
            }
            BugReport r;
            r.divergence = d;
            r.root_cause = rc;
            r.program_hex = item.program.hex();
            r.context_seed = item.ctx.rng_seed;
            r.context_key = context_key(item.ctx);
            r.engines = {d.engine_a, d.engine_b};
            r.dedup_key = key;
            out.findings.push_back({std::move(key), std::move(r), item.ctx});
        }
    }
    return out;
}

void check_health(const std::map<std::string, EnginePtr>& engines)
{
    const auto ctx = make_context(0);
    const Bytes stop{op::STOP};
    const auto program = disassemble(stop);
    for (const auto& [id, e] : engines)
    {
        const auto t = e->execute(program, ctx);
        if (t.final.halt != HaltReason::Success || t.steps.size() != 1)
            throw EngineUnhealthy{"engine '" + id + "' failed the smoke program: " +
                                  std::string{halt_name(t.final.halt)} + " " + t.final.error_detail};
    }
}

void write_text(const std::filesystem::path& p, const std::string& content)
{
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out{p, std::ios::binary};
    out << content;
    if (!out)
        throw IoFailure{"cannot write " + p.string()};
}

std::string summary_json(const CampaignSummary& s, const CoverageStats& cov, size_t reports)
{
    nlohmann::ordered_json j;
    j["reports"] = reports;
    j["programs"] = s.programs;
    j["executions"] = s.executions;
    j["raw_divergences"] = s.raw_divergences;
    j["confirmed"] = s.confirmed;
    j["quarantined"] = s.quarantined;
    j["duplicates"] = s.duplicates;
    j["targeted"] = s.targeted;
    j["targeted_matched"] = s.targeted_matched;
    j["llm_invalid"] = s.llm_invalid;
    j["covered_pairs"] = cov.covered_pairs();
    j["total_pairs"] = cov.total_pairs();
    j["notes"] = s.notes;
    return j.dump(2) + "\n";
}

/// Engine wrapper that reports under a different id.
class AliasEngine final : public Engine
{
public:
    AliasEngine(std::string id, EnginePtr inner) : id_{std::move(id)}, inner_{std::move(inner)} {}
    const std::string& id() const noexcept override { return id_; }
    Trace execute(const BytecodeProgram& p, const ExecContext& c) const override
    {
        auto t = inner_->execute(p, c);
        t.engine_id = id_;
        return t;
    }
    std::map<uint8_t, std::string> handler_names() const override { return inner_->handler_names(); }

private:
    std::string id_;
    EnginePtr inner_;
};
}  // namespace

CampaignConfig CampaignConfig::catalog_default()
{
    CampaignConfig c;
    c.engines = {"reference"};
    for (const auto& f : fault_catalog())
        c.engines.push_back("mutant-" + f.fault_id);
    return c;
}

void CampaignConfig::validate() const
{
    if (engines.size() < 2)
        throw ConfigError{"a campaign needs at least two engines"};
    if (std::find(engines.begin(), engines.end(), baseline) == engines.end())
        throw ConfigError{"baseline engine '" + baseline + "' is not among the engines"};
    if (parallelism == 0)
        throw ConfigError{"parallelism must be at least 1"};
    mutation.validate();
    for (const auto op : opcodes)
        if (!opcode_info(op, fork))
            throw ConfigError{"opcode " + to_quantity(op) + " is not defined at " + std::string{fork_name(fork)}};
}

std::vector<std::string> split_list(std::string_view text)
{
    std::vector<std::string> out;
    std::stringstream ss{std::string{text}};
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(std::move(t));
    return out;
}

std::vector<uint8_t> parse_opcode_list(std::string_view text, Fork fork)
{
    if (trim(text) == "all" || trim(text) == "ALL")
        return {};
    std::set<uint8_t> out;
    for (const auto& item : split_list(text))
    {
        if (item.starts_with("0x") || item.starts_with("0X"))
        {
            const auto v = parse_quantity(item);
            if (!v || *v > 0xff || !opcode_info(v->convert_to<uint8_t>(), fork))
                throw ConfigError{"unknown opcode '" + item + "'"};
            out.insert(v->convert_to<uint8_t>());
            continue;
        }
        std::string upper = item;
        std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
        try
        {
            out.insert(opcode_by_mnemonic(upper).byte);
        }
        catch (const Error&)
        {
            throw ConfigError{"unknown opcode '" + item + "'"};
        }
    }
    return {out.begin(), out.end()};
}

CampaignConfig load_config(const std::filesystem::path& file, CampaignConfig c)
{
    std::ifstream in{file};
    if (!in)
        throw ConfigError{"cannot read config file " + file.string()};
    std::string line;
    size_t line_no = 0;
    std::optional<std::string> opcodes_text;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (trim(line).empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError{file.string() + ":" + std::to_string(line_no) + ": expected key = value"};
        const auto key = trim(std::string_view{line}.substr(0, eq));
        const auto value = trim(std::string_view{line}.substr(eq + 1));
        if (key == "engines")
            c.engines = split_list(value);
        else if (key == "baseline")
            c.baseline = value;
        else if (key == "opcodes")
            opcodes_text = value;
        else if (key == "seeds")
            c.seeds_per_opcode = parse_number<uint64_t>(key, value);
        else if (key == "control_flow_rounds")
            c.control_flow_rounds = parse_number<uint64_t>(key, value);
        else if (key == "p")
            c.mutation.p = parse_number<double>(key, value);
        else if (key == "t")
            c.mutation.t = parse_number<uint64_t>(key, value);
        else if (key == "seed")
            c.master_seed = parse_number<uint64_t>(key, value);
        else if (key == "parallelism")
            c.parallelism = parse_number<size_t>(key, value);
        else if (key == "out")
            c.out_dir = value;
        else if (key == "fork")
        {
            try
            {
                c.fork = parse_fork(value);
            }
            catch (const Error& e)
            {
                throw ConfigError{e.what()};
            }
        }
        else if (key == "llm_adapter")
            c.llm.kind = parse_adapter(value);
        else if (key == "llm_fixture_dir")
            c.llm.fixture_dir = value;
        else if (key == "llm_command")
            c.llm.command = value;
        else if (key == "funcmap_adapter")
        {
            if (value == "static")
                c.funcmap.kind = FuncMapProvenance::Static;
            else if (value == "fixture")
                c.funcmap.kind = FuncMapProvenance::Fixture;
            else if (value == "llm")
                c.funcmap.kind = FuncMapProvenance::Llm;
            else
                throw ConfigError{"unknown funcmap_adapter '" + value + "'"};
        }
        else if (key == "funcmap_fixture_dir")
            c.funcmap.fixture_dir = value;
        else if (key == "funcmap_command")
            c.funcmap.command = value;
        else if (key.starts_with("external."))
            c.external[key.substr(9)] = value;
        else
            throw ConfigError{file.string() + ":" + std::to_string(line_no) + ": unknown key '" + key + "'"};
    }
    if (opcodes_text)
        c.opcodes = parse_opcode_list(*opcodes_text, c.fork);
    c.validate();
    return c;
}

std::map<std::string, EnginePtr> resolve_engines(const CampaignConfig& config, std::vector<std::string>* ordered_ids)
{
    std::map<std::string, EnginePtr> out;
    std::vector<std::string> order;
    for (const auto& name : config.engines)
    {
        EnginePtr e;
        if (const auto ext = config.external.find(name); ext != config.external.end())
            e = external_engine({name, ext->second});
        else
            e = builtin_engine(name);
        std::string id = name;
        for (int n = 2; out.contains(id); ++n)
            id = name + "#" + std::to_string(n);
        if (id != name)
            e = std::make_shared<AliasEngine>(id, e);
        out.emplace(id, e);
        order.push_back(id);
    }
    // Baseline first so traces are produced in a fixed order.
    std::stable_partition(order.begin(), order.end(), [&](const std::string& id) { return id == config.baseline; });
    if (ordered_ids)
        *ordered_ids = std::move(order);
    return out;
}

CoverageStats path_coverage(const std::vector<ExecutedProgram>& corpus, const std::vector<uint8_t>& opcodes, Fork fork)
{
    auto stats = empty_coverage(opcodes, fork);
    for (const auto& e : corpus)
        accumulate(stats, e.reference);
    list_misses(stats, {});
    return stats;
}

CampaignResult run_campaign(const CampaignConfig& config)
{
    config.validate();
    Shared sh{config, {}, {}, {}, config.opcodes.empty() ? implemented_opcodes(config.fork) : config.opcodes};
    sh.engines = resolve_engines(config, &sh.order);
    check_health(sh.engines);
    const auto all_ops = implemented_opcodes(config.fork);
    for (const auto& [id, e] : sh.engines)
        sh.funcmaps.emplace(id, extract_func_map(*e, all_ops, config.funcmap));

    std::vector<std::pair<uint8_t, uint64_t>> units;
    for (const auto op : sh.opcodes)
        for (uint64_t s = 0; s < config.seeds_per_opcode; ++s)
            units.emplace_back(op, s);

    std::vector<UnitResult> results(units.size());
    std::atomic<size_t> next{0};
    const auto worker = [&] {
        for (size_t i = next++; i < units.size(); i = next++)
            results[i] = run_unit(sh, units[i].first, units[i].second);
    };
    {
        std::vector<std::jthread> pool;
        const size_t n = std::min(config.parallelism, std::max<size_t>(units.size(), 1));
        for (size_t i = 1; i < n; ++i)
            pool.emplace_back(worker);
        worker();
    }

    CampaignResult out;
    out.coverage = empty_coverage(sh.opcodes, config.fork);
    std::map<std::pair<uint8_t, PathId>, std::string> reasons;
    std::map<std::string, Finding> by_key;
    for (auto& r : results)
    {
        merge_into(out.coverage, r.coverage);
        for (auto& [k, v] : r.miss_reasons)
            reasons.emplace(k, v);
        auto& s = out.summary;
        s.programs += r.summary.programs;
        s.executions += r.summary.executions;
        s.raw_divergences += r.summary.raw_divergences;
        s.confirmed += r.summary.confirmed;
        s.quarantined += r.summary.quarantined;
        s.targeted += r.summary.targeted;
        s.targeted_matched += r.summary.targeted_matched;
        s.llm_invalid += r.summary.llm_invalid;
        for (auto& n : r.summary.notes)
            s.notes.push_back(std::move(n));
        for (auto& f : r.findings)
        {
            const auto it = by_key.find(f.key);
            if (it == by_key.end())
                by_key.emplace(f.key, std::move(f));
            else
                it->second.report.duplicates += 1 + f.report.duplicates;
        }
    }
    // Paths skipped during construction carry their note as the reason.
    for (const auto& note : out.summary.notes)
    {
        const auto colon = note.find(": ");
        if (colon == std::string::npos)
            continue;
        const auto mn = note.substr(0, colon);
        const auto rest = note.substr(colon + 2);
        for (const auto p : {PathId::OutOfGas, PathId::StackOverflow, PathId::InvalidJumpdest})
            if (rest.starts_with(path_name(p)))
                if (const auto op = parse_opcode_list(mn, config.fork); op.size() == 1)
                    reasons.emplace(std::pair{op[0], p}, rest);
    }
    list_misses(out.coverage, reasons);

    std::vector<ExecContext> contexts;
    for (auto& [_, f] : by_key)
    {
        out.summary.duplicates += f.report.duplicates;
        out.reports.push_back(std::move(f.report));
        contexts.push_back(std::move(f.ctx));
    }
    std::sort(out.reports.begin(), out.reports.end(), [](const BugReport& a, const BugReport& b) {
        return std::tie(a.root_cause.opcode, a.dedup_key) < std::tie(b.root_cause.opcode, b.dedup_key);
    });

    if (!config.out_dir.empty())
    {
        emit_report(out.reports, out.coverage, ReportFormat::Both, config.out_dir);
        write_text(config.out_dir / "summary.json", summary_json(out.summary, out.coverage, out.reports.size()));
        const DirectoryStore store{config.out_dir / "artifacts"};
        for (const auto& ctx : contexts)
            store.put(ctx);
        for (const auto& r : out.reports)
        {
            store.put(*from_hex(r.program_hex));
            const auto key = keccak256_hex(std::span{
                reinterpret_cast<const uint8_t*>(r.dedup_key.data()), r.dedup_key.size()}).substr(0, 16);
            const auto path = config.out_dir / "reports" / (key + ".json");
            if (!std::filesystem::exists(path))
                write_text(path, reports_to_json({r}));
        }
    }
    return out;
}
ScanResult scan_corpus_impact(const std::map<std::string, std::string>& corpus_hex, const std::set<uint8_t>& buggy)
{
    ScanResult out;
    for (const auto& [name, text] : corpus_hex)
    {
        const auto bytes = from_hex(trim(text));
        if (!bytes)
        {
            out.skipped.push_back(name);
            continue;
        }
        bool hit = false;
        const auto program = disassemble(*bytes);
        for (const auto& ins : program.instrs())
        {
            ++out.total_opcodes;
            const uint8_t byte = (*bytes)[ins.offset];
            if (buggy.contains(byte))
            {
                ++out.buggy_opcodes;
                hit = true;
            }
        }
        out.affected[name] = hit;
    }
    out.rate = out.total_opcodes ? double(out.buggy_opcodes) / double(out.total_opcodes) : 0.0;
    return out;
}

ScanResult scan_corpus_impact(const std::filesystem::path& dir, const std::set<uint8_t>& buggy)
{
    if (!std::filesystem::is_directory(dir))
        throw IoFailure{"not a directory: " + dir.string()};
    std::map<std::string, std::string> corpus;
    for (const auto& entry : std::filesystem::directory_iterator{dir})
    {
        if (entry.path().extension() != ".hex")
            continue;
        std::ifstream in{entry.path()};
        std::stringstream ss;
        ss << in.rdbuf();
        corpus[entry.path().stem().string()] = ss.str();
    }
    return scan_corpus_impact(corpus, buggy);
}

size_t generate_corpus(const CampaignConfig& config, const std::filesystem::path& dir)
{
    config.mutation.validate();
    const auto opcodes = config.opcodes.empty() ? implemented_opcodes(config.fork) : config.opcodes;
    std::set<std::string> keys;
    for (const auto op : opcodes)
        for (uint64_t s = 0; s < config.seeds_per_opcode; ++s)
            for (const auto& item : plan_unit(config, op, s).items)
            {
                const CorpusEntryMeta meta{mnemonic(op),
                                           item.intended ? std::string{path_name(*item.intended)} : "-",
                                           item.provenance, item.seed_rng};
                keys.insert(write_corpus_entry(dir, item.program.bytes(), meta));
            }
    return keys.size();
}
}  // namespace opdiff

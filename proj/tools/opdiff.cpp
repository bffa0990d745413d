// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/campaign.hpp>
#include <opdiff/errors.hpp>
#include <opdiff/trace_io.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace opdiff;

namespace
{
constexpr int exit_clean = 0;
constexpr int exit_divergent = 1;
constexpr int exit_error = 2;

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in{p, std::ios::binary};
    if (!in)
        throw IoFailure{"cannot read " + p.string()};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Flags shared by `gen` and `run`; empty values leave the config untouched.
struct CampaignFlags
{
    std::string config_file;
    std::optional<uint64_t> seed;
    std::string engines;
    std::string opcodes;
    std::optional<double> p;
    std::optional<uint64_t> t;
    std::string out;
    std::optional<size_t> parallelism;
    std::string llm_adapter;
    std::optional<uint64_t> seeds;

    void attach(CLI::App* app)
    {
        app->add_option("--config", config_file, "key = value campaign config file");
        app->add_option("--seed", seed, "master RNG seed");
        app->add_option("--engines", engines, "comma list of engine ids");
        app->add_option("--opcodes", opcodes, "comma list of mnemonics or 0x bytes, or 'all'");
        app->add_option("--p", p, "boundary probability for argument mutation");
        app->add_option("--t", t, "argument mutation iterations per program");
        app->add_option("--out", out, "output directory");
        app->add_option("--parallelism", parallelism, "worker threads");
        app->add_option("--llm-adapter", llm_adapter, "fixture, fallback or external");
        app->add_option("--seeds", seeds, "seed programs per opcode");
    }

    CampaignConfig build() const
    {
        auto c = config_file.empty() ? CampaignConfig::catalog_default() : load_config(config_file);
        if (seed)
            c.master_seed = *seed;
        if (!engines.empty())
            c.engines = split_list(engines);
        if (!opcodes.empty())
            c.opcodes = parse_opcode_list(opcodes, c.fork);
        if (p)
            c.mutation.p = *p;
        if (t)
            c.mutation.t = *t;
        if (!out.empty())
            c.out_dir = out;
        if (parallelism)
            c.parallelism = *parallelism;
        if (!llm_adapter.empty())
            c.llm.kind = parse_adapter(llm_adapter);
        if (seeds)
            c.seeds_per_opcode = *seeds;
        return c;
    }
};

void print_summary(const CampaignResult& r)
{
    const auto& s = r.summary;
    std::printf("programs %llu, executions %llu\n", (unsigned long long)s.programs, (unsigned long long)s.executions);
    std::printf("divergences: %llu raw, %llu confirmed, %llu quarantined, %llu duplicates\n",
        (unsigned long long)s.raw_divergences, (unsigned long long)s.confirmed, (unsigned long long)s.quarantined,
        (unsigned long long)s.duplicates);
    std::printf("path coverage: %zu/%zu (%.2f%%)\n", r.coverage.covered_pairs(), r.coverage.total_pairs(),
        100.0 * r.coverage.fraction());
    for (const auto& m : r.coverage.misses)
        std::printf("  miss: %s\n", m.c_str());
    std::printf("reports: %zu\n", r.reports.size());
    for (const auto& rep : r.reports)
        std::printf("  %s  %s\n", rep.dedup_key.c_str(), rep.root_cause.func.c_str());
}

/// Repeats the campaign under fresh master seeds until the time budget runs out.
CampaignResult run_for(CampaignConfig config, std::chrono::seconds budget)
{
    const auto start = std::chrono::steady_clock::now();
    const auto out_dir = config.out_dir;
    config.out_dir.clear();
    const uint64_t base_seed = config.master_seed;
    CampaignResult total;
    std::map<std::string, BugReport> by_key;
    for (uint64_t round = 0; round == 0 || std::chrono::steady_clock::now() - start < budget; ++round)
    {
        config.master_seed = round == 0 ? base_seed : derive_seed(base_seed, round);
        auto r = run_campaign(config);
        if (round == 0)
            total.coverage = r.coverage;
        else
            for (const auto& [op, cov] : r.coverage.per_opcode)
            {
                auto& dst = total.coverage.per_opcode[op];
                for (const auto& [path, n] : cov.hits)
                    dst.hits[path] += n;
                for (const auto& [k, n] : cov.parameter_hits)
                    dst.parameter_hits[k] += n;
            }
        auto& s = total.summary;
        s.programs += r.summary.programs;
        s.executions += r.summary.executions;
        s.raw_divergences += r.summary.raw_divergences;
        s.confirmed += r.summary.confirmed;
        s.quarantined += r.summary.quarantined;
        for (auto& rep : r.reports)
        {
            const auto [it, fresh] = by_key.emplace(rep.dedup_key, rep);
            if (!fresh)
                it->second.duplicates += 1 + rep.duplicates;
        }
    }
    // Recompute misses against the merged hit counts.
    std::vector<std::string> misses;
    for (const auto& [op, cov] : total.coverage.per_opcode)
        for (const auto& [path, n] : cov.hits)
            if (n == 0)
            {
                const auto info = opcode_info(op, config.fork);
                misses.push_back((info ? info->mnemonic : std::string{"?"}) + " " + std::string{path_name(path)} +
                                 ": no executed program reached this path");
            }
    total.coverage.misses = std::move(misses);
    for (auto& [_, rep] : by_key)
    {
        total.summary.duplicates += rep.duplicates;
        total.reports.push_back(std::move(rep));
    }
    std::sort(total.reports.begin(), total.reports.end(), [](const BugReport& a, const BugReport& b) {
        return std::tie(a.root_cause.opcode, a.dedup_key) < std::tie(b.root_cause.opcode, b.dedup_key);
    });
    if (!out_dir.empty())
        emit_report(total.reports, total.coverage, ReportFormat::Both, out_dir);
    return total;
}

int cmd_diff(const std::vector<std::string>& files, std::string baseline)
{
    std::map<std::string, Trace> traces;
    std::vector<std::string> order;
    for (const auto& spec : files)
    {
        std::string id;
        std::filesystem::path path;
        if (const auto eq = spec.find('='); eq != std::string::npos)
        {
            id = spec.substr(0, eq);
            path = spec.substr(eq + 1);
        }
        else
        {
            path = spec;
            id = path.stem().string();
        }
        auto t = parse_jsonl_lenient(slurp(path));
        t.engine_id = id;
        if (!traces.emplace(id, std::move(t)).second)
            throw ConfigError{"duplicate trace name '" + id + "'"};
        order.push_back(id);
    }
    if (traces.size() < 2)
        throw ConfigError{"diff needs at least two trace files"};
    if (baseline.empty())
        baseline = order.front();
    if (!traces.contains(baseline))
        throw ConfigError{"baseline '" + baseline + "' is not among the traces"};

    const auto divergences = compare(traces, baseline);
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& d : divergences)
    {
        nlohmann::ordered_json j;
        j["metric"] = metric_name(d.metric);
        j["engines"] = {d.engine_a, d.engine_b};
        j["step"] = d.step_index ? nlohmann::ordered_json(*d.step_index) : nlohmann::ordered_json("FINAL");
        j["field"] = d.detail.field;
        j["a"] = d.detail.value_a;
        j["b"] = d.detail.value_b;
        const auto rc = localize(traces.at(d.engine_a), traces.at(d.engine_b), FuncMap{d.engine_b});
        j["opcode"] = rc.op_name;
        j["phase"] = phase_set_name(rc.cause);
        out.push_back(std::move(j));
    }
    std::cout << out.dump(2) << "\n";
    return divergences.empty() ? exit_clean : exit_divergent;
}

int cmd_scan(const std::filesystem::path& dir, const std::string& buggy_list)
{
    std::set<uint8_t> buggy;
    for (const auto op : parse_opcode_list(buggy_list, latest_fork))
        buggy.insert(op);
    if (buggy.empty())
        throw ConfigError{"scan needs a non-empty --buggy opcode list"};
    const auto r = scan_corpus_impact(dir, buggy);
    size_t affected = 0;
    for (const auto& [_, hit] : r.affected)
        affected += hit;
    for (const auto& s : r.skipped)
        std::fprintf(stderr, "skipped undecodable entry: %s\n", s.c_str());
    std::printf("contracts %zu, affected %zu\n", r.affected.size(), affected);
    std::printf("opcodes %llu, buggy %llu, rate %.2f%%\n", (unsigned long long)r.total_opcodes,
        (unsigned long long)r.buggy_opcodes, 100.0 * r.rate);
    return exit_clean;
}

int cmd_report(const std::filesystem::path& dir, const std::string& format)
{
    const auto reports = reports_from_json(slurp(dir / "reports.json"));
    const auto coverage = coverage_from_json(slurp(dir / "coverage.json"));
    ReportFormat f = ReportFormat::Markdown;
    if (format == "json")
        f = ReportFormat::Json;
    else if (format == "both")
        f = ReportFormat::Both;
    else if (format != "markdown")
        throw ConfigError{"unknown format '" + format + "'"};
    emit_report(reports, coverage, f, dir);
    std::printf("re-rendered %zu reports in %s\n", reports.size(), dir.string().c_str());
    return reports.empty() ? exit_clean : exit_divergent;
}

int cmd_trace(const std::string& engine, const std::filesystem::path& code_file,
    const std::filesystem::path& context_file, uint64_t context_seed)
{
    auto text = slurp(code_file);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.pop_back();
    const auto code = from_hex(text);
    if (!code)
        throw ConfigError{"code file is not hex: " + code_file.string()};
    const auto ctx = context_file.empty() ? make_context(context_seed) : deserialize_context(slurp(context_file));
    const auto t = builtin_engine(engine)->execute(disassemble(*code, ctx.fork), ctx);
    std::cout << to_jsonl(t);
    return exit_clean;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"opdiff: opcode-level differential testing for EVM implementations"};
    app.require_subcommand(1);

    CampaignFlags gen_flags, run_flags;
    auto* gen = app.add_subcommand("gen", "generate the test corpus without executing it");
    gen_flags.attach(gen);

    auto* run = app.add_subcommand("run", "run a full differential campaign");
    run_flags.attach(run);
    int duration = 0;
    run->add_option("--duration", duration, "keep running fresh rounds for this many seconds");

    auto* diff = app.add_subcommand("diff", "compare stored JSON-lines trace files");
    std::vector<std::string> diff_files;
    std::string diff_baseline;
    diff->add_option("traces", diff_files, "trace files, optionally as name=path")->required();
    diff->add_option("--baseline", diff_baseline, "baseline trace name (default: first)");

    auto* scan = app.add_subcommand("scan", "count buggy opcodes in a directory of .hex contracts");
    std::string scan_dir, scan_buggy;
    scan->add_option("dir", scan_dir, "corpus directory")->required();
    scan->add_option("--buggy", scan_buggy, "comma list of buggy opcodes")->required();

    auto* report = app.add_subcommand("report", "re-render reports from a campaign output directory");
    std::string report_dir, report_format = "markdown";
    report->add_option("dir", report_dir, "campaign output directory")->required();
    report->add_option("--format", report_format, "markdown, json or both");

    auto* trace = app.add_subcommand("trace", "execute one program on a built-in engine and print its trace");
    std::string trace_engine = "reference", trace_code, trace_ctx;
    trace->add_option("--engine", trace_engine, "built-in engine id");
    trace->add_option("--code-file", trace_code, "file holding the program as hex")->required();
    uint64_t trace_seed = 0;
    auto* ctx_opt = trace->add_option("--context-file", trace_ctx, "serialized execution context");
    trace->add_option("--context-seed", trace_seed, "generate the context from this seed instead")->excludes(ctx_opt);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? exit_clean : exit_error;
    }

    try
    {
        if (*gen)
        {
            const auto config = gen_flags.build();
            if (config.out_dir.empty())
                throw ConfigError{"gen needs --out"};
            const auto n = generate_corpus(config, config.out_dir);
            std::printf("wrote %zu programs to %s\n", n, config.out_dir.string().c_str());
            return exit_clean;
        }
        if (*run)
        {
            const auto config = run_flags.build();
            const auto result =
                duration > 0 ? run_for(config, std::chrono::seconds{duration}) : run_campaign(config);
            print_summary(result);
            return result.reports.empty() ? exit_clean : exit_divergent;
        }
        if (*diff)
            return cmd_diff(diff_files, diff_baseline);
        if (*scan)
            return cmd_scan(scan_dir, scan_buggy);
        if (*report)
            return cmd_report(report_dir, report_format);
        if (*trace)
            return cmd_trace(trace_engine, trace_code, trace_ctx, trace_seed);
    }
    catch (const Error& e)
    {
        std::fprintf(stderr, "opdiff: %s\n", e.what());
        return exit_error;
    }
    catch (const std::exception& e)
    {
        std::fprintf(stderr, "opdiff: %s\n", e.what());
        return exit_error;
    }
    return exit_error;
}

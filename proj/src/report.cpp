// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/errors.hpp>
#include <opdiff/report.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace opdiff
{
namespace
{
using json = nlohmann::ordered_json;

constexpr std::array all_phases{Phase::Stack, Phase::Gas, Phase::Operation, Phase::ProgramCounter};

json divergence_json(const Divergence& d)
{
    json j;
    j["metric"] = metric_name(d.metric);
    j["engines"] = {d.engine_a, d.engine_b};
    j["step_index"] = d.step_index ? json(*d.step_index) : json("FINAL");
    j["field_detail"] = {{"field", d.detail.field}, {"a", d.detail.value_a}, {"b", d.detail.value_b}};
    j["program_ref"] = d.program_ref;
    j["context_ref"] = d.context_ref;
    j["context_seed"] = d.context_seed;
    return j;
}

Divergence divergence_from(const json& j)
{
    Divergence d;
    const auto metric = parse_metric(j.at("metric").get<std::string>());
    if (!metric)
        throw Error{"unknown metric"};
    d.metric = *metric;
    d.engine_a = j.at("engines").at(0).get<std::string>();
    d.engine_b = j.at("engines").at(1).get<std::string>();
    if (j.at("step_index").is_number())
        d.step_index = j.at("step_index").get<size_t>();
    const auto& fd = j.at("field_detail");
    d.detail = {fd.at("field").get<std::string>(), fd.at("a").get<std::string>(), fd.at("b").get<std::string>()};
    d.program_ref = j.at("program_ref").get<std::string>();
    d.context_ref = j.at("context_ref").get<std::string>();
    d.context_seed = j.at("context_seed").get<uint64_t>();
    return d;
}

json root_cause_json(const RootCause& rc)
{
    json j;
    j["opcode"] = rc.op_name;
    j["opcode_byte"] = rc.opcode;
    j["function"] = rc.func;
    json cause = json::array();
    for (const auto p : rc.cause)
        cause.push_back(phase_name(p));
    j["cause"] = std::move(cause);
    j["non_execution_stage"] = rc.non_execution_stage;
    j["evidence"] = {{"step", rc.evidence_step ? json(*rc.evidence_step) : json(nullptr)},
        {"fields", rc.evidence_fields}};
    return j;
}

RootCause root_cause_from(const json& j)
{
    RootCause rc;
    rc.op_name = j.at("opcode").get<std::string>();
    rc.opcode = j.at("opcode_byte").get<uint8_t>();
    rc.func = j.at("function").get<std::string>();
    for (const auto& c : j.at("cause"))
    {
        const auto p = parse_phase(c.get<std::string>());
        if (!p)
            throw Error{"unknown phase"};
        rc.cause.insert(*p);
    }
    rc.non_execution_stage = j.at("non_execution_stage").get<bool>();
    const auto& ev = j.at("evidence");
    if (!ev.at("step").is_null())
        rc.evidence_step = ev.at("step").get<size_t>();
    rc.evidence_fields = ev.at("fields").get<std::vector<std::string>>();
    return rc;
}

void write_file(const std::filesystem::path& p, const std::string& content)
{
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out{p, std::ios::binary};
    out << content;
    if (!out)
        throw IoFailure{"cannot write " + p.string()};
}

std::string mnemonic(uint8_t byte)
{
    const auto info = opcode_info(byte, latest_fork);
    return info ? info->mnemonic : "0x" + to_hex(std::span{&byte, 1});
}

std::string percent(double f)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * f);
    return buf;
}
}  // namespace

std::string phase_set_name(const std::set<Phase>& phases)
{
    std::string out;
    for (const auto p : phases)
    {
        if (!out.empty())
            out += "+";
        out += phase_name(p);
    }
    return out.empty() ? "NON_EXECUTION_STAGE" : out;
}

std::optional<Phase> parse_phase(std::string_view name) noexcept
{
    for (const auto p : all_phases)
        if (phase_name(p) == name)
            return p;
    return std::nullopt;
}

std::string dedup_key(const RootCause& rc, const std::string& engine_a, const std::string& engine_b)
{
    return rc.op_name + "|" + phase_set_name(rc.cause) + "|" + engine_a + "~" + engine_b;
}

size_t OpcodeCoverage::covered() const noexcept
{
    size_t n = 0;
    for (const auto& [_, count] : hits)
        n += count > 0;
    return n;
}

size_t CoverageStats::total_pairs() const noexcept
{
    size_t n = 0;
    for (const auto& [_, c] : per_opcode)
        n += c.total_paths;
    return n;
}

size_t CoverageStats::covered_pairs() const noexcept
{
    size_t n = 0;
    for (const auto& [_, c] : per_opcode)
        n += c.covered();
    return n;
}

double CoverageStats::fraction() const noexcept
{
    const auto total = total_pairs();
    return total == 0 ? 0.0 : static_cast<double>(covered_pairs()) / static_cast<double>(total);
}

std::string reports_to_json(const std::vector<BugReport>& reports)
{
    json arr = json::array();
    for (const auto& r : reports)
    {
        json j;
        j["dedup_key"] = r.dedup_key;
        j["divergence"] = divergence_json(r.divergence);
        j["root_cause"] = root_cause_json(r.root_cause);
        j["reproduction"] = {{"program_hex", r.program_hex}, {"context_seed", r.context_seed},
            {"context_key", r.context_key}, {"engines", r.engines}};
        j["duplicates"] = r.duplicates;
        arr.push_back(std::move(j));
    }
    json doc;
    doc["report_count"] = reports.size();
    doc["reports"] = std::move(arr);
    return doc.dump(2) + "\n";
}

std::vector<BugReport> reports_from_json(std::string_view text)
{
    std::vector<BugReport> out;
    try
    {
        const auto doc = json::parse(text);
        for (const auto& j : doc.at("reports"))
        {
            BugReport r;
            r.dedup_key = j.at("dedup_key").get<std::string>();
            r.divergence = divergence_from(j.at("divergence"));
            r.root_cause = root_cause_from(j.at("root_cause"));
            const auto& rep = j.at("reproduction");
            r.program_hex = rep.at("program_hex").get<std::string>();
            r.context_seed = rep.at("context_seed").get<uint64_t>();
            r.context_key = rep.at("context_key").get<std::string>();
            r.engines = rep.at("engines").get<std::vector<std::string>>();
            r.duplicates = j.at("duplicates").get<uint64_t>();
            out.push_back(std::move(r));
        }
    }
    catch (const json::exception& e)
    {
        throw Error{std::string{"malformed report document: "} + e.what()};
    }
    return out;
}

std::string coverage_to_json(const CoverageStats& stats)
{
    json per = json::object();
    for (const auto& [op, c] : stats.per_opcode)
    {
        json paths = json::object();
        for (const auto& [p, n] : c.hits)
            paths[std::string{path_name(p)}] = n;
        json j;
        j["opcode_byte"] = op;
        j["paths"] = std::move(paths);
        j["parameters"] = c.parameter_hits;
        j["covered"] = c.covered();
        j["total"] = c.total_paths;
        per[mnemonic(op)] = std::move(j);
    }
    json doc;
    doc["covered_pairs"] = stats.covered_pairs();
    doc["total_pairs"] = stats.total_pairs();
    doc["coverage"] = percent(stats.fraction());
    doc["per_opcode"] = std::move(per);
    doc["misses"] = stats.misses;
    return doc.dump(2) + "\n";
}

CoverageStats coverage_from_json(std::string_view text)
{
    CoverageStats stats;
    try
    {
        const auto doc = json::parse(text);
        for (const auto& [_, j] : doc.at("per_opcode").items())
        {
            OpcodeCoverage c;
            for (const auto& [name, n] : j.at("paths").items())
            {
                const auto p = parse_path(name);
                if (!p)
                    throw Error{"unknown path " + name};
                c.hits[*p] = n.get<uint64_t>();
            }
            c.parameter_hits = j.at("parameters").get<std::map<std::string, uint64_t>>();
            c.total_paths = j.at("total").get<size_t>();
            stats.per_opcode[j.at("opcode_byte").get<uint8_t>()] = std::move(c);
        }
        stats.misses = doc.at("misses").get<std::vector<std::string>>();
    }
    catch (const json::exception& e)
    {
        throw Error{std::string{"malformed coverage document: "} + e.what()};
    }
    return stats;
}

std::string render_markdown(const std::vector<BugReport>& reports, const CoverageStats& stats)
{
    std::ostringstream md;
    md << "# Differential testing report\n\n";
    md << "Confirmed, deduplicated divergences: " << reports.size() << "\n\n";
    size_t n = 0;
    for (const auto& r : reports)
    {
        const auto& rc = r.root_cause;
        const auto& d = r.divergence;
        md << "## " << ++n << ". " << rc.op_name << ": " << phase_set_name(rc.cause) << "\n\n";
        md << "- Engines: `" << d.engine_a << "` (baseline) vs `" << d.engine_b << "`\n";
        md << "- Metric: " << metric_name(d.metric) << ", step "
           << (d.step_index ? std::to_string(*d.step_index) : std::string{"FINAL"}) << ", field `" << d.detail.field
           << "`: `" << d.detail.value_a << "` vs `" << d.detail.value_b << "`\n";
        md << "- Responsible function: `" << rc.func << "`\n";
        if (rc.non_execution_stage)
            md << "- Flag: NON_EXECUTION_STAGE\n";
        md << "- Duplicates folded into this report: " << r.duplicates << "\n\n";
        md << "Reproduction:\n\n";
        md << "1. Program (`" << r.program_hex << "`):\n\n```\n";
        if (const auto bytes = from_hex(r.program_hex))
            md << format_listing(disassemble(*bytes));
        md << "```\n\n";
        md << "2. Context seed " << r.context_seed << " (context key `" << r.context_key << "`)\n";
        md << "3. Engines:";
        for (const auto& e : r.engines)
            md << " `" << e << "`";
        md << "\n\n";
    }
    md << "# Spec-path coverage\n\n";
    md << "Covered " << stats.covered_pairs() << " of " << stats.total_pairs() << " (opcode, path) pairs ("
       << percent(stats.fraction()) << ").\n\n";
    if (!stats.misses.empty())
    {
        md << "Misses:\n\n";
        for (const auto& m : stats.misses)
            md << "- " << m << "\n";
        md << "\n";
    }
    return md.str();
}

void emit_report(const std::vector<BugReport>& reports, const CoverageStats& stats, ReportFormat format,
    const std::filesystem::path& dir)
{
    if (format != ReportFormat::Markdown)
    {
        write_file(dir / "reports.json", reports_to_json(reports));
        write_file(dir / "coverage.json", coverage_to_json(stats));
    }
    if (format != ReportFormat::Json)
        write_file(dir / "reports.md", render_markdown(reports, stats));
}
}  // namespace opdiff

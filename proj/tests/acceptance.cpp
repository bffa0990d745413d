// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance harness. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Scratch output goes to a temporary
// directory that is removed afterwards.

#include "oracles.hpp"

#include <opdiff/campaign.hpp>
#include <opdiff/external.hpp>
#include <opdiff/hex.hpp>
#include <opdiff/semantics.hpp>
#include <opdiff/trace_io.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <sys/wait.h>

using namespace opdiff;
namespace fs = std::filesystem;

namespace
{
struct Outcome
{
    bool pass = false;
    std::string detail;
};

const fs::path source_dir{OPDIFF_SOURCE_DIR};
const fs::path work_dir = fs::temp_directory_path() / "opdiff-acceptance";

std::string slurp(const fs::path& p)
{
    std::ifstream in{p, std::ios::binary};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args)
{
    const std::string cmd = "'" + std::string{OPDIFF_CLI} + "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string fixed(double v, int digits = 2)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExecContext ample_context(uint64_t seed)
{
    auto ctx = make_context(seed);
    ctx.tx.gas_limit = ample_gas;
    ctx.tx.static_flag = false;
    return ctx;
}

Word random_operand(std::mt19937_64& rng)
{
    switch (rng() % 6)
    {
    case 0:
        return Word{rng() % 300};
    case 1:
        return ~Word{0} - Word{rng() % 300};
    case 2:
        return Word{1} << (rng() % 256);
    default:
    {
        Word w = 0;
        for (int i = 0; i < 4; ++i)
            w = (w << 64) | Word{rng()};
        return w;
    }
    }
}

/// Pushes `args` (deepest first), applies `op` and returns the result word.
std::optional<Word> run_op(uint8_t op, std::span<const Word> args, const ExecContext& ctx)
{
    Bytes code;
    for (size_t i = args.size(); i-- > 0;)
    {
        code.push_back(op::PUSH32);
        const auto bytes = word_to_be(args[i]);
        code.insert(code.end(), bytes.begin(), bytes.end());
    }
    code.push_back(op);
    code.insert(code.end(), {op::PUSH1, 0x00, op::MSTORE, op::PUSH1, 0x20, op::PUSH1, 0x00, op::RETURN});
    const auto t = reference_engine()->execute(disassemble(code), ctx);
    if (t.final.halt != HaltReason::Success || t.final.return_data.size() != 32)
        return std::nullopt;
    return word_from_be(t.final.return_data);
}

struct CliRun
{
    fs::path dir;
    int exit_code = -1;
    double seconds = 0;
};

/// The default campaign through the command line. Criteria 1, 3, 6 and 9
/// share these runs.
const CliRun& default_run(int which)
{
    static std::map<int, CliRun> runs;
    if (const auto it = runs.find(which); it != runs.end())
        return it->second;
    CliRun r;
    r.dir = work_dir / ("run" + std::to_string(which));
    fs::remove_all(r.dir);
    const auto t0 = std::chrono::steady_clock::now();
    r.exit_code = run_cli("run --out '" + r.dir.string() + "'");
    r.seconds = seconds_since(t0);
    return runs.emplace(which, r).first->second;
}

Outcome fault_catalog_detection()
{
    const auto& run = default_run(1);
    if (run.exit_code != 1)
        return {false, "opdiff run exited with " + std::to_string(run.exit_code)};
    const auto reports = reports_from_json(slurp(run.dir / "reports.json"));
    std::ostringstream out;
    bool ok = reports.size() == fault_catalog().size();
    out << reports.size() << " reports";
    size_t matched = 0;
    for (const auto& fault : fault_catalog())
    {
        const std::string suspect = "mutant-" + fault.fault_id;
        std::vector<const BugReport*> hits;
        for (const auto& r : reports)
            if (r.divergence.engine_b == suspect)
                hits.push_back(&r);
        const bool good = hits.size() == 1 && hits[0]->divergence.engine_a == "reference" &&
                          hits[0]->root_cause.opcode == fault.target_opcode &&
                          hits[0]->root_cause.cause == std::set<Phase>{fault.phase};
        if (good)
        {
            ++matched;
            continue;
        }
        ok = false;
        out << "; " << fault.fault_id << ": ";
        if (hits.empty())
            out << "missed";
        for (const auto* h : hits)
            out << h->root_cause.op_name << "/" << phase_set_name(h->root_cause.cause) << " ";
    }
    ok = ok && run.seconds < 300;
    out << ", " << matched << "/" << fault_catalog().size() << " faults matched on opcode and phase; campaign took "
        << fixed(run.seconds, 1) << " s (limit 300)";
    return {ok, out.str()};
}

Outcome argument_mutation()
{
    std::mt19937_64 rng{20260417};
    const auto ops = implemented_opcodes();
    uint64_t mutants = 0, saturated = 0;
    std::vector<std::string> failures;
    const auto fail = [&](std::string text) {
        if (failures.size() < 5)
            failures.push_back(std::move(text));
        else
            failures.emplace_back();
    };

    for (uint64_t trial = 0; trial < 1000; ++trial)
    {
        Bytes original;
        if (trial % 2 == 0)
            original = build_seed(ops[rng() % ops.size()], latest_fork, rng()).program.bytes();
        else
        {
            original.resize(1 + rng() % 96);
            for (auto& b : original)
                b = static_cast<uint8_t>(rng());
        }
        const auto program = disassemble(original);
        MutationConfig cfg{std::uniform_real_distribution<double>{0, 1}(rng), 1 + rng() % 32, rng()};
        if (trial % 4 == 0)
            cfg.p = 1.0;

        for (const auto& m : mutate_arguments(program, cfg))
        {
            ++mutants;
            if (m.size() != original.size())
            {
                fail("length changed: " + to_hex(original));
                continue;
            }
            for (const auto& ins : program.instrs())
            {
                if (m[ins.offset] != original[ins.offset])
                    fail("opcode byte changed at offset " + std::to_string(ins.offset) + " of " + to_hex(original));
                if (cfg.p != 1.0 || ins.immediate.empty())
                    continue;
                const auto first = m.begin() + static_cast<std::ptrdiff_t>(ins.offset + 1);
                const auto last = first + static_cast<std::ptrdiff_t>(ins.immediate.size());
                const bool zeros = std::all_of(first, last, [](uint8_t b) { return b == 0x00; });
                const bool ones = std::all_of(first, last, [](uint8_t b) { return b == 0xff; });
                if (!zeros && !ones)
                    fail("p=1 immediate not saturated: " + to_hex(m));
                ++saturated;
            }
        }
    }

    // p = 0: every immediate byte is drawn fresh; pool the bytes of two PUSH2
    // immediates and test them against the uniform distribution.
    const auto push2 = disassemble(Bytes{op::PUSH2, 0x12, 0x34, op::PUSH2, 0x56, 0x78, 0x01, op::STOP});
    std::vector<uint64_t> counts(256, 0);
    uint64_t samples = 0;
    for (uint64_t s = 0; s < 1000; ++s)
        for (const auto& m : mutate_arguments(push2, {0.0, 16, derive_seed(99, s)}))
            for (const size_t at : {1, 2, 4, 5})
            {
                ++counts[m[at]];
                ++samples;
            }
    const double chi = oracle::chi_square_uniform(counts);
    const double critical = oracle::chi_square_critical_001(255);
    const bool uniform = chi < critical;

    std::ostringstream out;
    out << "1000 configs, " << mutants << " mutants, " << saturated << " saturated immediates, "
        << failures.size() << " property violations; p=0 chi-square " << fixed(chi) << " < " << fixed(critical)
        << " over " << samples << " bytes";
    for (const auto& f : failures)
        if (!f.empty())
            out << "; " << f;
    return {failures.empty() && uniform, out.str()};
}

Outcome spec_path_coverage()
{
    const auto& run = default_run(1);
    if (run.exit_code < 0 || !fs::exists(run.dir / "coverage.json"))
        return {false, "campaign produced no coverage.json"};
    const auto stats = coverage_from_json(slurp(run.dir / "coverage.json"));
    const size_t missing = stats.total_pairs() - stats.covered_pairs();
    bool reasons = stats.misses.size() == missing;
    for (const auto& m : stats.misses)
    {
        const auto colon = m.find(": ");
        reasons = reasons && colon != std::string::npos && colon + 2 < m.size();
    }
    const bool ok = stats.fraction() >= 0.95 && reasons && run.seconds < 300;
    std::ostringstream out;
    out << stats.covered_pairs() << "/" << stats.total_pairs() << " (opcode, path) pairs = "
        << fixed(100 * stats.fraction()) << "% (need 95%), " << stats.misses.size() << " misses logged for "
        << missing << " unhit pairs";
    for (size_t i = 0; i < std::min<size_t>(stats.misses.size(), 5); ++i)
        out << "; " << stats.misses[i];
    return {ok, out.str()};
}

Outcome semantics_conformance()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> failures;
    uint64_t cases = 0, via_interpreter = 0;
    const auto check = [&](uint8_t op, std::span<const Word> args) {
        ++cases;
        const auto got = evaluate_pure(op, args);
        const auto want = oracle::arith(op, args);
        if (!got || *got != want)
        {
            if (failures.size() < 5)
            {
                std::string text = std::string{spec_for(op).op.mnemonic} + "(";
                for (const auto& a : args)
                    text += to_quantity(a) + ",";
                failures.push_back(text + ") got " + (got ? to_quantity(*got) : "none") + " want " + to_quantity(want));
            }
            else
                failures.emplace_back();
        }
    };

    // 8-bit projections: each operand ranges over 0..255 zero-extended, and
    // for binary ops also sign-extended so negative two's-complement values
    // appear.
    const auto project = [](unsigned v, bool sign) {
        return sign && v >= 128 ? ~Word{0} - Word{255 - v} : Word{v};
    };
    for (const auto op : oracle::arith_opcodes())
    {
        const size_t arity = oracle::arith_arity(op);
        std::vector<Word> args(arity);
        if (arity == 1)
            for (const bool s : {false, true})
                for (unsigned a = 0; a < 256; ++a)
                {
                    args[0] = project(a, s);
                    check(op, args);
                }
        else if (arity == 2)
            for (const unsigned mode : {0u, 1u, 2u, 3u})
                for (unsigned a = 0; a < 256; ++a)
                    for (unsigned b = 0; b < 256; ++b)
                    {
                        args[0] = project(a, mode & 1);
                        args[1] = project(b, mode & 2);
                        check(op, args);
                    }
        else
            for (unsigned a = 0; a < 256; ++a)
                for (unsigned b = 0; b < 256; ++b)
                    for (unsigned c = 0; c < 256; ++c)
                    {
                        args[0] = Word{a};
                        args[1] = Word{b};
                        args[2] = Word{c};
                        check(op, args);
                    }
    }

    // 10^4 random full-width cases per opcode; every 50th case also runs
    // through the interpreter.
    std::mt19937_64 rng{4};
    const auto ctx = ample_context(4);
    for (const auto op : oracle::arith_opcodes())
    {
        std::vector<Word> args(oracle::arith_arity(op));
        for (int i = 0; i < 10000; ++i)
        {
            for (auto& a : args)
                a = random_operand(rng);
            check(op, args);
            if (i % 50 == 0)
            {
                ++via_interpreter;
                const auto got = run_op(op, args, ctx);
                if (!got || *got != oracle::arith(op, args))
                    failures.push_back(std::string{spec_for(op).op.mnemonic} + " differs when executed");
            }
        }
    }

    // The two named edge rules, executed end to end.
    const std::vector<Word> exp_args{Word{2}, Word{256}};
    const bool exp_wraps = run_op(0x0a, exp_args, ctx) == Word{0};
    bool byte_high = true;
    for (unsigned idx = 32; idx < 300; ++idx)
    {
        const std::vector<Word> byte_args{Word{idx}, ~Word{0}};
        byte_high = byte_high && run_op(op::BYTE, byte_args, ctx) == Word{0};
    }
    const std::vector<Word> huge{~Word{0}, ~Word{0}};
    byte_high = byte_high && run_op(op::BYTE, huge, ctx) == Word{0};

    const double secs = seconds_since(t0);
    std::ostringstream out;
    out << cases << " oracle cases over " << oracle::arith_opcodes().size() << " opcodes, " << via_interpreter
        << " executed, " << failures.size() << " mismatches; EXP(2,256)=0 " << (exp_wraps ? "holds" : "FAILS")
        << ", BYTE index>=32 gives 0 " << (byte_high ? "holds" : "FAILS") << "; " << fixed(secs, 1)
        << " s (limit 120)";
    for (const auto& f : failures)
        if (!f.empty())
            out << "; " << f;
    return {failures.empty() && exp_wraps && byte_high && secs < 120, out.str()};
}

Outcome gas_conformance()
{
    const auto t0 = std::chrono::steady_clock::now();
    oracle::GasAudit audit;
    std::map<uint8_t, uint64_t> target_checks;
    std::vector<uint8_t> exempt;
    const auto ops = implemented_opcodes();
    for (const auto op : ops)
    {
        for (uint64_t s = 0; s < 1000; ++s)
        {
            const auto seed = build_seed(op, latest_fork, derive_seed(55, op, s));
            const auto ctx = ample_context(derive_seed(56, op, s));
            const auto t = reference_engine()->execute(seed.program, ctx);
            oracle::audit_gas(t, ctx, audit);
            for (size_t i = 0; i < t.steps.size(); ++i)
            {
                const bool audited_final = !(i + 1 == t.steps.size() &&
                                             (is_exceptional(t.final.halt) || t.final.halt == HaltReason::EngineError));
                if (t.steps[i].pc == seed.target_offset && t.steps[i].op == op && audited_final)
                    ++target_checks[op];
            }
        }
        // A target whose only path halts exceptionally charges all remaining
        // gas; that is a halt rule, not a gas rule.
        if (target_checks[op] < 1000 && enumerate_paths(spec_for(op)).size() == 1 &&
            build_seed(op, latest_fork, 0).intended_path != PathId::Success)
            exempt.push_back(op);
    }
    std::vector<std::string> short_ops;
    for (const auto op : ops)
        if (target_checks[op] < 1000 && std::find(exempt.begin(), exempt.end(), op) == exempt.end())
            short_ops.push_back(spec_for(op).op.mnemonic);

    // BALANCE: warm account, cold account, then the same account again.
    const auto ctx = ample_context(7);
    const std::string contract = addresses::contract().hex().substr(2);
    const std::string cold(40, '7');
    const auto t = reference_engine()->execute(
        disassemble(*from_hex("73" + contract + "3150" + "73" + cold + "3150" + "73" + cold + "3100")), ctx);
    const bool balance = t.steps.size() == 9 && t.steps[1].gas_cost == 100 && t.steps[4].gas_cost == 2600 &&
                         t.steps[7].gas_cost == 100;

    const double secs = seconds_since(t0);
    const bool ok = audit.mismatches.empty() && short_ops.empty() && balance && secs < 60;
    std::ostringstream out;
    out << audit.checked << " steps audited over " << audit.opcodes.size() << " opcodes (" << ops.size()
        << " implemented, " << exempt.size() << " exempt: exceptional-only), " << audit.mismatches.size()
        << " mismatches; BALANCE warm/cold/rewarm = " << (t.steps.size() > 7 ? std::to_string(t.steps[1].gas_cost) + "/" +
                                                              std::to_string(t.steps[4].gas_cost) + "/" +
                                                              std::to_string(t.steps[7].gas_cost)
                                                        : std::string{"?"})
        << "; " << fixed(secs, 1) << " s (limit 60)";
    for (const auto& m : short_ops)
        out << "; fewer than 1000 target executions for " << m;
    for (size_t i = 0; i < std::min<size_t>(audit.mismatches.size(), 5); ++i)
        out << "; " << audit.mismatches[i];
    return {ok, out.str()};
}

Outcome differ_soundness()
{
    auto cfg = CampaignConfig::catalog_default();
    cfg.engines = {"reference", "reference"};
    const auto self = run_campaign(cfg);

    const auto& run = default_run(1);
    const auto summary = nlohmann::json::parse(slurp(run.dir / "summary.json"));
    const auto raw = summary.at("raw_divergences").get<uint64_t>();
    const auto confirmed = summary.at("confirmed").get<uint64_t>();
    const auto quarantined = summary.at("quarantined").get<uint64_t>();

    const bool ok = self.summary.raw_divergences == 0 && self.reports.empty() && raw > 0 && confirmed == raw &&
                    quarantined == 0;
    std::ostringstream out;
    out << "reference vs reference: " << self.summary.programs << " programs, " << self.summary.raw_divergences
        << " divergences; catalog campaign: " << confirmed << "/" << raw << " divergences confirmed on replay, "
        << quarantined << " quarantined";
    return {ok, out.str()};
}

/// First field on which the traces differ, or empty. The wire format carries
/// steps and the final summary; the input keys and fork are attached by the
/// engine that ran the program, so they are compared only when `with_inputs`.
std::string execution_difference(const Trace& a, const Trace& b, bool with_inputs)
{
    if (a.steps != b.steps)
        return "steps";
    if (a.final.halt != b.final.halt)
        return "halt";
    if (a.final.return_data != b.final.return_data)
        return "return_data";
    if (a.final.gas_used != b.final.gas_used)
        return "gas_used";
    if (a.final.storage_after != b.final.storage_after)
        return "storage_after";
    if (!with_inputs)
        return {};
    if (a.program_key != b.program_key)
        return "program_key";
    if (a.context_key != b.context_key)
        return "context_key";
    if (a.fork != b.fork)
        return "fork";
    return {};
}

Outcome trace_golden()
{
    const auto golden = source_dir / "fixtures" / "golden";
    const std::string cli = OPDIFF_CLI;
    const auto self = external_engine(
        {"self", "'" + cli + "' trace --engine reference --code-file {code_file} --context-file {context_file}"});
    std::vector<std::string> failures;
    size_t byte_exact = 0, round_trips = 0;
    for (const auto* name : {"exp_wrap", "invalid_jump", "storage_access"})
    {
        auto hex = slurp(golden / (std::string{name} + ".hex"));
        while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back())))
            hex.pop_back();
        const auto seed = std::stoull(slurp(golden / (std::string{name} + ".seed")));
        const auto program = disassemble(*from_hex(hex));
        const auto ctx = make_context(seed);
        const auto t = reference_engine()->execute(program, ctx);
        if (to_jsonl(t) == slurp(golden / (std::string{name} + ".jsonl")))
            ++byte_exact;
        else
            failures.push_back(std::string{name} + " differs from its golden file");
        const auto external = execution_difference(self->execute(program, ctx), t, true);
        const auto reparsed = execution_difference(parse_jsonl(to_jsonl(t)), t, false);
        if (external.empty() && reparsed.empty())
            ++round_trips;
        if (!external.empty())
            failures.push_back(std::string{name} + ": external adapter differs in " + external);
        if (!reparsed.empty())
            failures.push_back(std::string{name} + ": reparsed trace differs in " + reparsed);
    }
    std::ostringstream out;
    out << byte_exact << "/3 golden traces byte-exact, " << round_trips << "/3 self-adapter round trips field-equal";
    for (const auto& f : failures)
        out << "; " << f;
    return {failures.empty(), out.str()};
}

Outcome corpus_scan()
{
    const auto fixture = scan_corpus_impact(source_dir / "fixtures" / "scan", {0x0a});
    const auto tiny = scan_corpus_impact(std::map<std::string, std::string>{{"two", "600356"}}, {op::JUMP});
    const auto shown_fixture = fixed(100 * fixture.rate);
    const auto shown_tiny = fixed(100 * tiny.rate);
    const bool ok = fixture.affected.size() == 100 && fixture.buggy_opcodes * 20 == fixture.total_opcodes &&
                    shown_fixture == "5.00" && tiny.total_opcodes == 2 && tiny.buggy_opcodes == 1 &&
                    shown_tiny == "50.00";
    std::ostringstream out;
    out << "fixture: " << fixture.buggy_opcodes << "/" << fixture.total_opcodes << " EXP over "
        << fixture.affected.size() << " contracts = " << shown_fixture << "%; PUSH1 3, JUMP: "
        << tiny.buggy_opcodes << "/" << tiny.total_opcodes << " = " << shown_tiny << "%";
    return {ok, out.str()};
}

Outcome determinism()
{
    const auto& a = default_run(1);
    const auto& b = default_run(2);
    std::vector<std::string> differing;
    for (const auto* f : {"reports.json", "coverage.json", "reports.md", "summary.json"})
    {
        const auto pa = a.dir / f;
        const auto pb = b.dir / f;
        if (!fs::exists(pa) || slurp(pa) != slurp(pb))
            differing.emplace_back(f);
    }
    std::ostringstream out;
    out << "two default runs: reports.json, coverage.json, reports.md and summary.json compared, "
        << differing.size() << " differ";
    for (const auto& f : differing)
        out << "; " << f;
    return {differing.empty() && a.exit_code == b.exit_code, out.str()};
}
}  // namespace

/// Arguments, when given, select criteria by number.
int main(int argc, char** argv)
{
    fs::remove_all(work_dir);
    fs::create_directories(work_dir);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"fault-catalog detection", fault_catalog_detection},
        {"argument mutation properties", argument_mutation},
        {"spec-path coverage", spec_path_coverage},
        {"semantics conformance", semantics_conformance},
        {"gas-rule conformance", gas_conformance},
        {"differ soundness", differ_soundness},
        {"trace format golden files", trace_golden},
        {"corpus impact scan", corpus_scan},
        {"end-to-end determinism", determinism},
    };

    int failed = 0;
    std::set<size_t> selected;
    for (int a = 1; a < argc; ++a)
        selected.insert(std::stoul(argv[a]));
    for (size_t i = 0; i < criteria.size(); ++i)
    {
        if (!selected.empty() && !selected.contains(i + 1))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string{"exception: "} + e.what()};
        }
        failed += !o.pass;
        std::cout << "criterion " << (i + 1) << " " << (o.pass ? "PASS" : "FAIL") << " [" << criteria[i].first
                  << "] " << o.detail << " (" << fixed(seconds_since(t0), 1) << " s)" << std::endl;
    }
    fs::remove_all(work_dir);
    const size_t ran = selected.empty() ? criteria.size() : selected.size();
    std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}

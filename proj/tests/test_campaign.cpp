// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/campaign.hpp>
#include <opdiff/errors.hpp>
#include <opdiff/hex.hpp>

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace opdiff;
namespace fs = std::filesystem;

namespace
{
fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("opdiff-campaign-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in{p};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args)
{
    const bool redirected = args.find('>') != std::string::npos;
    const std::string cmd = std::string{OPDIFF_CLI} + " " + args + (redirected ? " 2>/dev/null" : " >/dev/null 2>&1");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

CampaignConfig small(std::vector<std::string> engines)
{
    auto c = CampaignConfig::catalog_default();
    c.engines = std::move(engines);
    c.opcodes = {op::EXP, op::BALANCE, op::JUMP};
    c.seeds_per_opcode = 2;
    c.mutation.t = 4;
    c.master_seed = 5;
    return c;
}
}  // namespace

TEST_SUITE("campaign")
{
    TEST_CASE("config file parsing")
    {
        const auto dir = scratch("config");
        {
            std::ofstream out{dir / "c.conf"};
            out << "# campaign\n"
                   "engines = reference, mutant-F3\n"
                   "opcodes = BALANCE, 0x0a\n"
                   "seeds = 3\n"
                   "p = 0.5\n"
                   "t = 8\n"
                   "seed = 42\n"
                   "parallelism = 2\n"
                   "llm_adapter = fixture\n"
                   "funcmap_adapter = fixture\n"
                   "external.geth = run-geth {code_file}\n";
        }
        const auto c = load_config(dir / "c.conf");
        CHECK(c.engines == std::vector<std::string>{"reference", "mutant-F3"});
        CHECK(c.opcodes == std::vector<uint8_t>{op::EXP, op::BALANCE});
        CHECK(c.seeds_per_opcode == 3);
        CHECK(c.mutation.p == doctest::Approx(0.5));
        CHECK(c.mutation.t == 8);
        CHECK(c.master_seed == 42);
        CHECK(c.parallelism == 2);
        CHECK(c.llm.kind == LlmAdapterKind::Fixture);
        CHECK(c.funcmap.kind == FuncMapProvenance::Fixture);
        CHECK(c.external.at("geth") == "run-geth {code_file}");

        {
            std::ofstream out{dir / "bad.conf"};
            out << "p = 2\n";
        }
        CHECK_THROWS_AS(load_config(dir / "bad.conf"), ConfigError);
        {
            std::ofstream out{dir / "unknown.conf"};
            out << "colour = blue\n";
        }
        CHECK_THROWS_AS(load_config(dir / "unknown.conf"), ConfigError);
        fs::remove_all(dir);
    }

    TEST_CASE("opcode lists")
    {
        CHECK(parse_opcode_list("all", latest_fork).empty());
        CHECK(parse_opcode_list("exp,0x31", latest_fork) == std::vector<uint8_t>{op::EXP, op::BALANCE});
        CHECK_THROWS_AS(parse_opcode_list("FROB", latest_fork), ConfigError);
        CHECK(split_list(" a, b ,,c") == std::vector<std::string>{"a", "b", "c"});
    }

    TEST_CASE("engine resolution")
    {
        auto c = CampaignConfig::catalog_default();
        c.engines = {"mutant-F1", "reference", "reference"};
        std::vector<std::string> order;
        const auto engines = resolve_engines(c, &order);
        CHECK(order == std::vector<std::string>{"reference", "mutant-F1", "reference#2"});
        CHECK(engines.size() == 3);
        c.engines = {"reference", "geth"};
        CHECK_THROWS_AS(resolve_engines(c), UnknownEngine);
    }

    TEST_CASE("a reference engine never diverges from itself")
    {
        const auto r = run_campaign(small({"reference", "reference"}));
        CHECK(r.reports.empty());
        CHECK(r.summary.raw_divergences == 0);
        CHECK(r.summary.programs > 0);
        CHECK(r.summary.targeted == r.summary.targeted_matched);
    }

    TEST_CASE("small campaign finds the injected faults deterministically")
    {
        auto c = small({"reference", "mutant-F1", "mutant-F2", "mutant-F3"});
        const auto a = run_campaign(c);
        c.parallelism = 3;
        const auto b = run_campaign(c);
        CHECK(a.reports == b.reports);
        CHECK(a.coverage == b.coverage);
        REQUIRE(a.reports.size() == 3);
        CHECK(a.reports[0].dedup_key == "EXP|operation execution implementation|reference~mutant-F1");
        CHECK(a.reports[1].dedup_key == "BALANCE|gas handling implementation|reference~mutant-F3");
        CHECK(a.reports[2].dedup_key == "JUMP|program counter handling implementation|reference~mutant-F2");
        CHECK(a.summary.confirmed == a.summary.raw_divergences);
        CHECK(a.summary.quarantined == 0);
    }

    TEST_CASE("campaign output is persisted")
    {
        auto c = small({"reference", "mutant-F3"});
        c.opcodes = {op::BALANCE};
        c.out_dir = scratch("persist");
        const auto r = run_campaign(c);
        REQUIRE(r.reports.size() == 1);
        for (const auto* name : {"reports.json", "coverage.json", "reports.md", "summary.json"})
            CHECK(fs::exists(c.out_dir / name));
        CHECK(reports_from_json(slurp(c.out_dir / "reports.json")) == r.reports);
        const auto& rep = r.reports[0];
        CHECK(fs::exists(c.out_dir / "artifacts" / "programs" / (program_key(*from_hex(rep.program_hex)) + ".hex")));
        CHECK(fs::exists(c.out_dir / "artifacts" / "contexts" / (rep.context_key + ".json")));
        fs::remove_all(c.out_dir);
    }

    TEST_CASE("path coverage over a corpus")
    {
        CHECK(path_coverage({}, {op::EXP}, latest_fork).covered_pairs() == 0);

        auto ctx = make_context(1);
        ctx.tx.gas_limit = ample_gas;
        ctx.tx.static_flag = false;
        const auto t = reference_engine()->execute(disassemble(*from_hex("600260030a00")), ctx);
        const auto s = path_coverage({{op::EXP, PathId::Success, -1, t}}, {op::EXP}, latest_fork);
        const auto& exp = s.per_opcode.at(op::EXP);
        CHECK(exp.hits.at(PathId::Success) == 1);
        CHECK(exp.covered() == 1);
        CHECK(s.covered_pairs() == 1);
        CHECK(s.total_pairs() == exp.total_paths);
    }

    TEST_CASE("corpus impact scan")
    {
        auto r = scan_corpus_impact(std::map<std::string, std::string>{{"a", "600356"}}, {op::JUMP});
        CHECK(r.total_opcodes == 2);
        CHECK(r.buggy_opcodes == 1);
        CHECK(r.rate == doctest::Approx(0.5));
        CHECK(r.affected.at("a"));

        r = scan_corpus_impact(std::map<std::string, std::string>{{"a", "00"}, {"b", "xyz"}}, {op::EXP});
        CHECK(r.rate == 0.0);
        CHECK(r.skipped == std::vector<std::string>{"b"});

        r = scan_corpus_impact(fs::path{OPDIFF_SOURCE_DIR} / "fixtures" / "scan", {op::EXP});
        CHECK(r.total_opcodes == 2000);
        CHECK(r.buggy_opcodes == 100);
        CHECK(r.affected.size() == 100);
        size_t hit = 0;
        for (const auto& [_, a] : r.affected)
            hit += a;
        CHECK(hit == 50);
    }

    TEST_CASE("corpus generation writes distinct programs")
    {
        auto c = small({"reference"});
        const auto dir = scratch("gen");
        const auto n = generate_corpus(c, dir);
        size_t files = 0;
        for (const auto& e : fs::directory_iterator{dir})
            files += e.path().extension() == ".hex";
        CHECK(n == files);
        CHECK(n > 0);
        fs::remove_all(dir);
    }

    TEST_CASE("command line exit codes")
    {
        const auto dir = scratch("cli");
        const auto out = dir.string();
        CHECK(cli("run --engines reference,reference --opcodes EXP --seeds 1 --t 2 --out " + out + "/a") == 0);
        CHECK(cli("run --engines reference,mutant-F1 --opcodes EXP --seeds 1 --t 2 --out " + out + "/b") == 1);
        CHECK(cli("run --engines reference,geth --opcodes EXP --out " + out + "/c") == 2);
        CHECK(cli("run --p 3 --out " + out + "/d") == 2);
        CHECK(cli("frobnicate") == 2);
        CHECK(cli("report " + out + "/b --format both") == 1);
        CHECK(cli("report " + out + "/a --format json") == 0);
        CHECK(cli("scan " + std::string{OPDIFF_SOURCE_DIR} + "/fixtures/scan --buggy EXP") == 0);

        {
            std::ofstream code{dir / "p.hex"};
            code << "61010060020a60005260206000f3\n";
        }
        const auto code = (dir / "p.hex").string();
        CHECK(cli("trace --engine reference --code-file " + code + " --context-seed 1 > " + out + "/ref.jsonl") == 0);
        CHECK(cli("trace --engine mutant-F1 --code-file " + code + " --context-seed 1 > " + out + "/f1.jsonl") == 0);
        CHECK(cli("diff ref=" + out + "/ref.jsonl same=" + out + "/ref.jsonl") == 0);
        CHECK(cli("diff ref=" + out + "/ref.jsonl f1=" + out + "/f1.jsonl --baseline ref") == 1);
        fs::remove_all(dir);
    }
}

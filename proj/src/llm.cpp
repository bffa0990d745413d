// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/errors.hpp>
#include <opdiff/keccak.hpp>
#include <opdiff/llm.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace opdiff
{
LlmRequest make_request(const Seed& seed, const OpSpec& spec)
{
    nlohmann::ordered_json paths = nlohmann::ordered_json::array();
    for (const auto& p : enumerate_paths(spec))
        paths.push_back({{"path", path_name(p.id)}, {"trigger", p.trigger}, {"terminal", p.terminal}});
    return {spec.op.mnemonic, seed.program.hex(), format_listing(seed.program), paths.dump()};
}

std::string request_json(const LlmRequest& r)
{
    nlohmann::ordered_json j;
    j["opName"] = r.op_name;
    j["seed"] = r.seed;
    j["seed_mnemonics"] = r.seed_mnemonics;
    j["ICFG"] = r.icfg;
    return j.dump();
}

std::string request_hash(const LlmRequest& r)
{
    const auto text = request_json(r);
    return keccak256_hex(std::span{reinterpret_cast<const uint8_t*>(text.data()), text.size()}).substr(0, 16);
}

std::string_view adapter_name(LlmAdapterKind kind) noexcept
{
    switch (kind)
    {
    case LlmAdapterKind::Fixture:
        return "fixture";
    case LlmAdapterKind::Fallback:
        return "fallback";
    case LlmAdapterKind::External:
        return "external";
    }
    return "";
}

LlmAdapterKind parse_adapter(std::string_view name)
{
    for (const auto k : {LlmAdapterKind::Fixture, LlmAdapterKind::Fallback, LlmAdapterKind::External})
        if (adapter_name(k) == name)
            return k;
    throw ConfigError{"unknown LLM adapter '" + std::string{name} + "'"};
}

bool passes_sanity_check(const BytecodeProgram& program)
{
    if (program.instrs().empty() || program.has_truncated_immediate())
        return false;
    long depth = 0;
    for (const auto& ins : program.instrs())
    {
        depth = std::max(0L, depth - ins.info.pops) + ins.info.pushes;
        if (depth > 1025)
            return false;
    }
    return true;
}

LlmResult parse_response(std::string_view response, std::string_view provenance, Fork fork)
{
    LlmResult out;
    const auto open = response.find('[');
    const auto close = response.rfind(']');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    {
        out.invalid = 1;
        return out;
    }
    std::string body{response.substr(open + 1, close - open - 1)};
    std::stringstream ss{body};
    std::string item;
    while (std::getline(ss, item, ','))
    {
        const auto first = item.find_first_not_of(" \t\r\n\"'");
        if (first == std::string::npos)
            continue;
        const auto last = item.find_last_not_of(" \t\r\n\"'");
        const auto text = item.substr(first, last - first + 1);
        const auto bytes = from_hex(text);
        if (!bytes || bytes->empty())
        {
            ++out.invalid;
            continue;
        }
        auto program = disassemble(*bytes, fork);
        if (!passes_sanity_check(program))
        {
            ++out.invalid;
            continue;
        }
        Candidate c;
        c.program = std::move(program);
        c.provenance = std::string{provenance};
        out.candidates.push_back(std::move(c));
    }
    return out;
}

namespace
{
std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in{p, std::ios::binary};
    if (!in)
        throw AdapterUnavailable{"no fixture at " + p.string()};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string run_command(const LlmAdapter& adapter, const LlmRequest& request)
{
    if (adapter.command.empty())
        throw AdapterUnavailable{"external LLM adapter has no command"};
    const auto path = std::filesystem::temp_directory_path() /
                      ("opdiff-llm-" + std::to_string(::getpid()) + "-" + request_hash(request) + ".json");
    {
        std::ofstream out{path};
        out << request_json(request);
    }
    std::string command = adapter.command;
    for (auto pos = command.find("{request_file}"); pos != std::string::npos;
         pos = command.find("{request_file}", pos))
        command.replace(pos, 14, path.string());
    FILE* pipe = ::popen(command.c_str(), "r");
    if (pipe == nullptr)
    {
        std::filesystem::remove(path);
        throw AdapterUnavailable{"cannot launch LLM adapter"};
    }
    std::string output;
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        output.append(buf, n);
    const int status = ::pclose(pipe);
    std::filesystem::remove(path);
    if (status != 0)
        throw AdapterUnavailable{"LLM adapter exited with status " + std::to_string(status)};
    return output;
}
}  // namespace

LlmResult llm_generate(const Seed& seed, const OpSpec& spec, const ExecContext& pricing, const LlmAdapter& adapter)
{
    switch (adapter.kind)
    {
    case LlmAdapterKind::Fallback:
        return {mutate_control_flow(seed, spec, pricing), 0};
    case LlmAdapterKind::Fixture:
    {
        const auto request = make_request(seed, spec);
        const auto text = read_file(adapter.fixture_dir / (request_hash(request) + ".txt"));
        return parse_response(text, "fixture", pricing.fork);
    }
    case LlmAdapterKind::External:
        return parse_response(run_command(adapter, make_request(seed, spec)), "external", pricing.fork);
    }
    return {};
}
}  // namespace opdiff

// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/errors.hpp>
#include <opdiff/rootcause.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>

namespace opdiff
{
std::string_view provenance_name(FuncMapProvenance p) noexcept
{
    switch (p)
    {
    case FuncMapProvenance::Static:
        return "STATIC";
    case FuncMapProvenance::Llm:
        return "LLM";
    case FuncMapProvenance::Fixture:
        return "FIXTURE";
    }
    return "";
}

std::string FuncMap::lookup(uint8_t opcode) const
{
    const auto it = entries.find(opcode);
    return it == entries.end() ? std::string{unknown_function} : it->second;
}

namespace
{
std::map<uint8_t, std::string> parse_map_json(const std::string& text)
{
    const auto j = nlohmann::json::parse(text);
    std::map<uint8_t, std::string> out;
    for (const auto& [k, v] : j.items())
    {
        const auto key = parse_quantity(k);
        if (!key || *key > 0xff || !v.is_string())
            throw AdapterUnavailable{"malformed function map entry '" + k + "'"};
        out[key->convert_to<uint8_t>()] = v.get<std::string>();
    }
    return out;
}

std::string run(const std::string& command)
{
    FILE* pipe = ::popen(command.c_str(), "r");
    if (pipe == nullptr)
        throw AdapterUnavailable{"cannot launch function-map adapter"};
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        out.append(buf, n);
    if (::pclose(pipe) != 0)
        throw AdapterUnavailable{"function-map adapter failed"};
    return out;
}

std::map<uint8_t, std::string> fetch(const Engine& engine, const std::vector<uint8_t>& opcodes, const FuncMapAdapter& a)
{
    switch (a.kind)
    {
    case FuncMapProvenance::Static:
        return engine.handler_names();
    case FuncMapProvenance::Fixture:
    {
        std::ifstream in{a.fixture_dir / (engine.id() + ".json")};
        if (!in)
            throw AdapterUnavailable{"no function-map fixture for " + engine.id()};
        return parse_map_json(std::string{std::istreambuf_iterator<char>{in}, {}});
    }
    case FuncMapProvenance::Llm:
    {
        if (a.command.empty())
            throw AdapterUnavailable{"no function-map command configured"};
        std::string list;
        for (const auto op : opcodes)
            list += (list.empty() ? "" : ",") + to_quantity(op);
        std::string command = a.command;
        for (const auto& [ph, value] : {std::pair{std::string{"{engine}"}, engine.id()}, {"{opcodes}", list}})
            for (auto pos = command.find(ph); pos != std::string::npos; pos = command.find(ph, pos + value.size()))
                command.replace(pos, ph.size(), value);
        return parse_map_json(run(command));
    }
    }
    return {};
}

bool is_terminal(uint8_t op) noexcept
{
    return op == op::STOP || op == op::RETURN || op == op::REVERT || op == op::SELFDESTRUCT || op == op::INVALID;
}

std::string mnemonic_of(uint8_t byte)
{
    if (const auto info = opcode_info(byte, latest_fork))
        return info->mnemonic;
    return "0x" + to_hex(std::span{&byte, 1});
}

/// Exceptional halt a trace takes right after step i, if any.
std::optional<HaltReason> exceptional_after(const Trace& t, size_t i)
{
    if (i + 1 != t.steps.size() || !is_exceptional(t.final.halt))
        return std::nullopt;
    return t.final.halt;
}
}  // namespace

FuncMap extract_func_map(const Engine& engine, const std::vector<uint8_t>& opcodes, const FuncMapAdapter& adapter)
{
    FuncMap map{engine.id(), {}, adapter.kind};
    std::map<uint8_t, std::string> found;
    try
    {
        found = fetch(engine, opcodes, adapter);
    }
    catch (const Error&)
    {
        return map;  // every lookup answers UNKNOWN
    }
    catch (const nlohmann::json::exception&)
    {
        return map;
    }
    if (opcodes.empty())
        map.entries = std::move(found);
    else
        for (const auto op : opcodes)
            if (const auto it = found.find(op); it != found.end())
                map.entries.insert(*it);
    return map;
}

std::optional<Phase> phase_for_halt(HaltReason r) noexcept
{
    switch (r)
    {
    case HaltReason::OutOfGas:
        return Phase::Gas;
    case HaltReason::StackUnderflow:
    case HaltReason::StackOverflow:
        return Phase::Stack;
    case HaltReason::InvalidJumpdest:
        return Phase::ProgramCounter;
    case HaltReason::InvalidOpcode:
    case HaltReason::WriteInStatic:
    case HaltReason::EngineError:
        return Phase::Operation;
    default:
        return std::nullopt;
    }
}

RootCause localize(const Trace& baseline, const Trace& suspect, const FuncMap& suspect_map)
{
    const auto sd = first_divergent_step(baseline, suspect);
    using Kind = StepDivergence::Kind;
    RootCause rc;
    rc.evidence_fields = sd.fields;

    const auto blame = [&](const Trace& t, size_t i) {
        rc.opcode = t.steps[i].op;
        rc.evidence_step = i;
    };

    switch (sd.kind)
    {
    case Kind::None:
        throw NoDivergence{"traces of '" + baseline.engine_id + "' and '" + suspect.engine_id + "' agree"};
    case Kind::Final:
    {
        const Trace& t = baseline.steps.empty() ? suspect : baseline;
        if (!t.steps.empty())
            rc.opcode = t.steps.back().op;
        rc.non_execution_stage = true;
        break;
    }
    case Kind::Truncation:
    {
        const Trace& longer = baseline.steps.size() > suspect.steps.size() ? baseline : suspect;
        blame(longer, sd.index);
        rc.cause.insert(Phase::Operation);
        break;
    }
    case Kind::Step:
    {
        if (is_pre_state_field(sd.fields.front()))
        {
            if (sd.index == 0)
            {
                rc.opcode = baseline.steps[0].op;
                rc.evidence_step = 0;
                rc.non_execution_stage = true;
                break;
            }
            blame(suspect, sd.index - 1);
            const auto& a = baseline.steps[sd.index];
            const auto& b = suspect.steps[sd.index];
            for (const auto& f : sd.fields)
            {
                if (f == "pc" || f == "op")
                    rc.cause.insert(Phase::ProgramCounter);
                else if (f == "gas")
                    rc.cause.insert(Phase::Gas);
                else if (f == "stack")
                    rc.cause.insert(a.stack.size() != b.stack.size() ? Phase::Stack : Phase::Operation);
                else
                    rc.cause.insert(Phase::Operation);
            }
            break;
        }
        blame(suspect, sd.index);
        for (const auto& f : sd.fields)
        {
            if (f == "gas_cost")
                rc.cause.insert(Phase::Gas);
            else if (f == "storage_delta")
                rc.cause.insert(Phase::Operation);
            else if (f == "HALT")
            {
                auto reason = exceptional_after(suspect, sd.index);
                if (!reason)
                    reason = exceptional_after(baseline, sd.index);
                if (reason)
                    rc.cause.insert(*phase_for_halt(*reason));
                else
                    rc.cause.insert(is_terminal(rc.opcode) ? Phase::Operation : Phase::ProgramCounter);
            }
        }
        break;
    }
    }
    rc.op_name = mnemonic_of(rc.opcode);
    rc.func = suspect_map.lookup(rc.opcode);
    return rc;
}

RootCause localize(const BytecodeProgram& program, const ExecContext& ctx, const Engine& baseline,
    const Engine& suspect, const FuncMap& suspect_map)
{
    return localize(baseline.execute(program, ctx), suspect.execute(program, ctx), suspect_map);
}
}  // namespace opdiff

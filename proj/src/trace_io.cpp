// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/errors.hpp>
#include <opdiff/trace_io.hpp>

#include <json.hpp>

namespace opdiff
{
namespace
{
using json = nlohmann::ordered_json;

std::string gas_hex(Gas g)
{
    return to_quantity(Word{g});
}

json delta_json(const StorageDelta& delta)
{
    json out = json::object();
    for (const auto& [k, v] : delta)
        out[k] = to_quantity(v);
    return out;
}

[[noreturn]] void fail(size_t line, const std::string& what)
{
    throw TraceParseError{"line " + std::to_string(line) + ": " + what};
}

Word word_field(const json& j, size_t line, const char* name)
{
    if (!j.is_string())
        fail(line, std::string{name} + " must be a hex string");
    const auto w = parse_quantity(j.get<std::string>());
    if (!w)
        fail(line, std::string{name} + " is not a hex quantity");
    return *w;
}

Gas gas_field(const json& j, size_t line, const char* name)
{
    const auto w = to_u64(word_field(j, line, name));
    if (!w)
        fail(line, std::string{name} + " exceeds 64 bits");
    return *w;
}

template <typename T>
T int_field(const json& obj, size_t line, const char* name)
{
    const auto it = obj.find(name);
    if (it == obj.end() || !it->is_number_unsigned())
        fail(line, std::string{"missing or non-integer '"} + name + "'");
    return it->get<T>();
}

const json& required(const json& obj, size_t line, const char* name)
{
    const auto it = obj.find(name);
    if (it == obj.end())
        fail(line, std::string{"missing '"} + name + "'");
    return *it;
}

StepRecord parse_step(const json& j, size_t line)
{
    StepRecord s;
    s.pc = int_field<uint64_t>(j, line, "pc");
    const auto op = int_field<unsigned>(j, line, "op");
    if (op > 0xff)
        fail(line, "op out of range");
    s.op = static_cast<uint8_t>(op);
    const auto& name = required(j, line, "opName");
    if (!name.is_string())
        fail(line, "opName must be a string");
    s.op_name = name.get<std::string>();
    s.gas = gas_field(required(j, line, "gas"), line, "gas");
    s.gas_cost = gas_field(required(j, line, "gasCost"), line, "gasCost");
    const auto& stack = required(j, line, "stack");
    if (!stack.is_array())
        fail(line, "stack must be an array");
    for (const auto& item : stack)
        s.stack.push_back(word_field(item, line, "stack item"));
    s.mem_size = int_field<uint64_t>(j, line, "memSize");
    if (const auto it = j.find("memory"); it != j.end())
    {
        if (!it->is_string())
            fail(line, "memory must be a string");
        s.memory = it->get<std::string>();
    }
    s.depth = int_field<uint32_t>(j, line, "depth");
    if (const auto it = j.find("storageDelta"); it != j.end())
    {
        if (!it->is_object())
            fail(line, "storageDelta must be an object");
        StorageDelta d;
        for (const auto& [k, v] : it->items())
            d[k] = word_field(v, line, "storageDelta value");
        s.storage_delta = std::move(d);
    }
    return s;
}

FinalState parse_final(const json& j, size_t line)
{
    FinalState f;
    const auto& out = required(j, line, "output");
    const auto bytes = out.is_string() ? from_hex(out.get<std::string>()) : std::nullopt;
    if (!bytes)
        fail(line, "output must be a hex string");
    f.return_data = *bytes;
    f.gas_used = gas_field(required(j, line, "gasUsed"), line, "gasUsed");
    if (const auto it = j.find("error"); it != j.end())
    {
        if (!it->is_string())
            fail(line, "error must be a string");
        const auto text = it->get<std::string>();
        const auto colon = text.find(": ");
        const auto halt = parse_halt(text.substr(0, colon));
        if (!halt)
            fail(line, "unknown error '" + text + "'");
        f.halt = *halt;
        if (colon != std::string::npos)
            f.error_detail = text.substr(colon + 2);
    }
    const auto& storage = required(j, line, "storage");
    if (!storage.is_object())
        fail(line, "storage must be an object");
    for (const auto& [k, v] : storage.items())
    {
        const auto key = parse_quantity(k);
        if (!key)
            fail(line, "storage key is not a hex quantity");
        f.storage_after[*key] = word_field(v, line, "storage value");
    }
    return f;
}
}  // namespace

std::string to_jsonl(const Trace& trace)
{
    std::string out;
    for (const auto& s : trace.steps)
    {
        json j;
        j["pc"] = s.pc;
        j["op"] = s.op;
        j["opName"] = s.op_name;
        j["gas"] = gas_hex(s.gas);
        j["gasCost"] = gas_hex(s.gas_cost);
        json stack = json::array();
        for (const auto& w : s.stack)
            stack.push_back(to_quantity(w));
        j["stack"] = std::move(stack);
        j["memSize"] = s.mem_size;
        if (s.memory)
            j["memory"] = *s.memory;
        j["depth"] = s.depth;
        if (s.storage_delta)
            j["storageDelta"] = delta_json(*s.storage_delta);
        out += j.dump();
        out += '\n';
    }
    const auto& f = trace.final;
    json j;
    j["output"] = "0x" + to_hex(f.return_data);
    j["gasUsed"] = gas_hex(f.gas_used);
    if (f.halt != HaltReason::Success)
    {
        std::string err{halt_name(f.halt)};
        if (!f.error_detail.empty())
            err += ": " + f.error_detail;
        j["error"] = err;
    }
    json storage = json::object();
    for (const auto& [k, v] : f.storage_after)
        storage[to_quantity(k)] = to_quantity(v);
    j["storage"] = std::move(storage);
    out += j.dump();
    out += '\n';
    return out;
}

Trace parse_jsonl(std::string_view text)
{
    Trace trace;
    bool have_final = false;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos < text.size())
    {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        const auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos)
            continue;
        if (have_final)
            fail(line_no, "content after the final summary");
        json j;
        try
        {
            j = json::parse(line);
        }
        catch (const json::parse_error& e)
        {
            fail(line_no, std::string{"malformed JSON: "} + e.what());
        }
        if (!j.is_object())
            fail(line_no, "expected a JSON object");
        if (j.contains("gasUsed"))
        {
            trace.final = parse_final(j, line_no);
            have_final = true;
        }
        else
            trace.steps.push_back(parse_step(j, line_no));
    }
    if (!have_final)
        fail(line_no + 1, "missing final summary");
    return trace;
}

Trace parse_jsonl_lenient(std::string_view text)
{
    try
    {
        return parse_jsonl(text);
    }
    catch (const TraceParseError& e)
    {
        Trace t;
        t.final.halt = HaltReason::EngineError;
        t.final.error_detail = std::string{e.what()} + "; raw output: " + std::string{text.substr(0, 2048)};
        return t;
    }
}
}  // namespace opdiff

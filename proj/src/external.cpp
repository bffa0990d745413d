// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/errors.hpp>
#include <opdiff/external.hpp>
#include <opdiff/trace_io.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>
#include <unistd.h>

namespace opdiff
{
namespace
{
namespace fs = std::filesystem;

/// Scratch directory removed on scope exit.
class ScratchDir
{
public:
    ScratchDir()
    {
        static std::atomic<uint64_t> counter{0};
        path_ = fs::temp_directory_path() /
                ("opdiff-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~ScratchDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const fs::path& path() const noexcept { return path_; }

private:
    fs::path path_;
};

void write_file(const fs::path& p, std::string_view content)
{
    std::ofstream out{p, std::ios::binary};
    out << content;
    if (!out)
        throw IoFailure{"cannot write " + p.string()};
}

void replace_all(std::string& s, std::string_view from, const std::string& to)
{
    for (size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

std::string capture(const std::string& command, int& status)
{
    FILE* pipe = ::popen(command.c_str(), "r");
    if (pipe == nullptr)
        throw SpawnFailure{"cannot launch: " + command};
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        out.append(buf, n);
    status = ::pclose(pipe);
    return out;
}

Trace engine_error(std::string detail)
{
    Trace t;
    t.final.halt = HaltReason::EngineError;
    t.final.error_detail = std::move(detail);
    return t;
}

class ExternalEngine final : public Engine
{
public:
    explicit ExternalEngine(AdapterConfig config) : config_{std::move(config)} {}
    const std::string& id() const noexcept override { return config_.name; }
    Trace execute(const BytecodeProgram& program, const ExecContext& ctx) const override
    {
        return run_external(config_, program, ctx);
    }

private:
    AdapterConfig config_;
};
}  // namespace

Trace run_external(const AdapterConfig& config, const BytecodeProgram& program, const ExecContext& ctx)
{
    Trace trace;
    try
    {
        if (config.dialect != "jsonl")
            throw SpawnFailure{"unsupported trace dialect '" + config.dialect + "'"};
        ScratchDir dir;
        const auto code_file = dir.path() / "code.hex";
        const auto context_file = dir.path() / "context.json";
        const auto hex = program.hex();
        write_file(code_file, hex);
        write_file(context_file, serialize(ctx));

        std::string command = config.command;
        replace_all(command, "{code}", hex);
        replace_all(command, "{code_file}", code_file.string());
        replace_all(command, "{context_file}", context_file.string());

        int status = 0;
        const auto output = capture(command, status);
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
            trace = engine_error("adapter exited with status " + std::to_string(WEXITSTATUS(status)) +
                                 "; raw output: " + output.substr(0, 2048));
        else
            trace = parse_jsonl_lenient(output);
    }
    catch (const Error& e)
    {
        trace = engine_error(e.what());
    }
    trace.engine_id = config.name;
    trace.program_key = program_key(program.bytes());
    trace.context_key = context_key(ctx);
    trace.fork = ctx.fork;
    return trace;
}

EnginePtr external_engine(AdapterConfig config)
{
    return std::make_shared<ExternalEngine>(std::move(config));
}
}  // namespace opdiff

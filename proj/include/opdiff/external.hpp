// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/engine.hpp>

#include <string>

namespace opdiff
{
/// How to launch an out-of-process engine.
///
/// The command is a shell template. Before launch these placeholders are
/// substituted:
///   {code}          program as lowercase hex
///   {code_file}     path of a file holding the program hex
///   {context_file}  path of a file holding the serialized ExecContext
/// The command must print a JSON-lines trace on stdout.
struct AdapterConfig
{
    std::string name;
    std::string command;
    std::string dialect = "jsonl";
};

/// Never throws for engine misbehaviour: spawn failures, non-zero exits and
/// unparseable output all become ENGINE_ERROR traces.
Trace run_external(const AdapterConfig& config, const BytecodeProgram& program, const ExecContext& ctx);

/// Engine facade over run_external; its id is the adapter name.
EnginePtr external_engine(AdapterConfig config);
}  // namespace opdiff

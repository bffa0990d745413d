// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/bytecode.hpp>
#include <opdiff/context.hpp>
#include <opdiff/trace.hpp>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace opdiff
{
/// Anything that can run a program under a context and report a step trace.
class Engine
{
public:
    virtual ~Engine() = default;

    virtual const std::string& id() const noexcept = 0;

    /// Never throws for spec-defined outcomes; engine faults surface as
    /// HaltReason::EngineError.
    virtual Trace execute(const BytecodeProgram& program, const ExecContext& ctx) const = 0;

    /// Opcode -> implementing function, for built-in engines. Empty when unknown.
    virtual std::map<uint8_t, std::string> handler_names() const { return {}; }
};

using EnginePtr = std::shared_ptr<const Engine>;

/// The spec-conformant interpreter.
EnginePtr reference_engine();

enum class Phase : uint8_t
{
    Stack,
    Gas,
    Operation,
    ProgramCounter,
};

std::string_view phase_name(Phase p) noexcept;

struct FaultSpec
{
    std::string fault_id;
    uint8_t target_opcode = 0;
    std::string description;
    Phase phase = Phase::Operation;  ///< Phase localization is expected to blame.
};

/// F1..F8, in catalog order.
const std::vector<FaultSpec>& fault_catalog();
/// Throws UnknownFault.
const FaultSpec& find_fault(std::string_view fault_id);

/// Interpreter identical to the reference except for `fault`.
EnginePtr inject_fault(const FaultSpec& fault);
EnginePtr inject_fault(std::string_view fault_id);

/// Resolves "reference" and "mutant-F<n>". Throws UnknownEngine.
EnginePtr builtin_engine(std::string_view engine_id);

/// Convenience over Engine::execute.
Trace execute(const Engine& engine, const BytecodeProgram& program, const ExecContext& ctx);
}  // namespace opdiff

// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/detail/interpreter.hpp>
#include <opdiff/engine.hpp>
#include <opdiff/errors.hpp>
#include <opdiff/keccak.hpp>

#include <array>
#include <mutex>

namespace opdiff
{
namespace
{
constexpr std::array<std::pair<HaltReason, std::string_view>, 9> halt_names{{
    {HaltReason::Success, "SUCCESS"},
    {HaltReason::Revert, "REVERT"},
    {HaltReason::OutOfGas, "OUT_OF_GAS"},
    {HaltReason::StackUnderflow, "STACK_UNDERFLOW"},
    {HaltReason::StackOverflow, "STACK_OVERFLOW"},
    {HaltReason::InvalidJumpdest, "INVALID_JUMPDEST"},
    {HaltReason::InvalidOpcode, "INVALID_OPCODE"},
    {HaltReason::WriteInStatic, "WRITE_IN_STATIC"},
    {HaltReason::EngineError, "ENGINE_ERROR"},
}};
}  // namespace

std::string_view halt_name(HaltReason r) noexcept
{
    return halt_names[static_cast<size_t>(r)].second;
}

std::optional<HaltReason> parse_halt(std::string_view name) noexcept
{
    for (const auto& [r, n] : halt_names)
        if (n == name)
            return r;
    return std::nullopt;
}

bool is_exceptional(HaltReason r) noexcept
{
    return r != HaltReason::Success && r != HaltReason::Revert && r != HaltReason::EngineError;
}

PathId path_of(HaltReason r) noexcept
{
    switch (r)
    {
    case HaltReason::OutOfGas:
        return PathId::OutOfGas;
    case HaltReason::StackUnderflow:
        return PathId::StackUnderflow;
    case HaltReason::StackOverflow:
        return PathId::StackOverflow;
    case HaltReason::InvalidJumpdest:
        return PathId::InvalidJumpdest;
    case HaltReason::InvalidOpcode:
        return PathId::InvalidOpcode;
    case HaltReason::WriteInStatic:
        return PathId::WriteInStatic;
    default:
        return PathId::Success;
    }
}

bool is_memory_digest(const std::string& memory) noexcept
{
    return memory.starts_with("keccak256:");
}

bool affects_storage(uint8_t op) noexcept
{
    switch (op)
    {
    case op::SSTORE:
    case op::TSTORE:
    case op::CREATE:
    case op::CREATE2:
    case op::SELFDESTRUCT:
    case op::REVERT:
        return true;
    default:
        return false;
    }
}

std::string program_key(const Bytes& code)
{
    thread_local Bytes last_code;
    thread_local std::string last_key;
    if (last_key.empty() || last_code != code)
    {
        last_code = code;
        last_key = keccak256_hex(code).substr(0, 16);
    }
    return last_key;
}

std::string_view phase_name(Phase p) noexcept
{
    switch (p)
    {
    case Phase::Stack:
        return "stack handling implementation";
    case Phase::Gas:
        return "gas handling implementation";
    case Phase::Operation:
        return "operation execution implementation";
    case Phase::ProgramCounter:
        return "program counter handling implementation";
    }
    return "";
}

const std::vector<FaultSpec>& fault_catalog()
{
    static const std::vector<FaultSpec> catalog = {
        {"F1", op::EXP, "exp-missing-modulus: power computed without reduction, clamped to 2^256-1",
            Phase::Operation},
        {"F2", op::JUMP, "missing-jumpdest-check: JUMP lands on any offset", Phase::ProgramCounter},
        {"F3", op::BALANCE, "gas-mischarge: BALANCE always charged the warm cost", Phase::Gas},
        {"F4", op::PUSH1, "pc-off-by-one: PUSH1 advances the program counter one byte too far",
            Phase::ProgramCounter},
        {"F5", op::CREATE2, "stack-order-swap: CREATE2 reads value and salt from each other's slots",
            Phase::Operation},
        {"F6", op::SELFDESTRUCT, "selfdestruct-missing-field: handler lacks the mnemonic the tracer reads",
            Phase::Operation},
        {"F7", op::PREVRANDAO, "fork-gating error: PREVRANDAO missing from the instruction set",
            Phase::Operation},
        {"F8", op::MSIZE, "msize-rounding: MSIZE reports unrounded memory extent", Phase::Operation},
    };
    return catalog;
}

const FaultSpec& find_fault(std::string_view fault_id)
{
    for (const auto& f : fault_catalog())
        if (f.fault_id == fault_id)
            return f;
    throw UnknownFault{"unknown fault '" + std::string{fault_id} + "'"};
}

EnginePtr reference_engine()
{
    static const EnginePtr engine = detail::make_interpreter("reference", nullptr);
    return engine;
}

EnginePtr inject_fault(const FaultSpec& fault)
{
    // Validates the id even when `fault` was built by hand.
    const auto& known = find_fault(fault.fault_id);
    return detail::make_interpreter("mutant-" + known.fault_id, &fault);
}

EnginePtr inject_fault(std::string_view fault_id)
{
    return inject_fault(find_fault(fault_id));
}

EnginePtr builtin_engine(std::string_view engine_id)
{
    if (engine_id == "reference")
        return reference_engine();
    if (engine_id.starts_with("mutant-"))
    {
        static std::mutex mu;
        static std::map<std::string, EnginePtr, std::less<>> cache;
        const auto fault_id = engine_id.substr(7);
        std::lock_guard lock{mu};
        if (const auto it = cache.find(fault_id); it != cache.end())
            return it->second;
        try
        {
            auto engine = inject_fault(fault_id);
            cache.emplace(std::string{fault_id}, engine);
            return engine;
        }
        catch (const UnknownFault&)
        {
        }
    }
    throw UnknownEngine{"unknown engine '" + std::string{engine_id} + "'"};
}

Trace execute(const Engine& engine, const BytecodeProgram& program, const ExecContext& ctx)
{
    return engine.execute(program, ctx);
}
}  // namespace opdiff

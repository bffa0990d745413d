// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/engine.hpp>
#include <opdiff/errors.hpp>
#include <opdiff/generator.hpp>

#include <json.hpp>

#include <fstream>

namespace opdiff
{
namespace
{
enum class Operand : uint8_t
{
    Value,         // any width, any value
    Small,         // one byte
    Index,         // byte position 0..40, straddling the 32-byte word
    NonZeroSmall,  // one byte, never zero
    Offset,        // memory/calldata offset within the first 256 bytes
    HighOffset,    // offset past the setup word, so expansion is never free
    Size,          // 0..64
    NonZeroSize,   // 1..64
    Address,
    Slot,          // storage key 0..15
};

class Builder
{
public:
    void op(uint8_t byte) { code_.push_back(byte); }

    void push(const Word& value, unsigned width)
    {
        const auto be = word_to_be(value);
        code_.push_back(static_cast<uint8_t>(op::PUSH0 + width));
        code_.insert(code_.end(), be.end() - width, be.end());
    }

    size_t size() const noexcept { return code_.size(); }
    Bytes& bytes() noexcept { return code_; }

private:
    Bytes code_;
};

Word random_word(Rng& rng, unsigned width)
{
    std::array<uint8_t, 32> buf{};
    std::uniform_int_distribution<int> byte{0, 255};
    for (unsigned i = 32 - width; i < 32; ++i)
        buf[i] = static_cast<uint8_t>(byte(rng));
    return word_from_be(buf);
}

uint64_t uniform(Rng& rng, uint64_t lo, uint64_t hi)
{
    return std::uniform_int_distribution<uint64_t>{lo, hi}(rng);
}

void emit_operand(Builder& b, Operand kind, Rng& rng)
{
    switch (kind)
    {
    case Operand::Value:
    {
        const auto width = uniform(rng, 0, 1) ? 1u : static_cast<unsigned>(uniform(rng, 1, 32));
        b.push(random_word(rng, width), width);
        return;
    }
    case Operand::Small:
        b.push(uniform(rng, 0, 255), 1);
        return;
    case Operand::NonZeroSmall:
        b.push(uniform(rng, 1, 255), 1);
        return;
    case Operand::Index:
        b.push(uniform(rng, 0, 40), 1);
        return;
    case Operand::Offset:
        b.push(uniform(rng, 0, 255), 1);
        return;
    case Operand::HighOffset:
        b.push(uniform(rng, 32, 255), 1);
        return;
    case Operand::Size:
        b.push(uniform(rng, 0, 64), 1);
        return;
    case Operand::NonZeroSize:
        b.push(uniform(rng, 1, 64), 1);
        return;
    case Operand::Address:
    {
        Word a;
        if (uniform(rng, 0, 1))
        {
            const auto& peers = addresses::peers();
            const auto pick = uniform(rng, 0, peers.size() + 1);
            a = pick < peers.size() ? peers[pick].word()
                : pick == peers.size() ? addresses::contract().word()
                                       : addresses::origin().word();
        }
        else
            a = random_word(rng, 20);
        b.push(a, 20);
        return;
    }
    case Operand::Slot:
        b.push(uniform(rng, 0, 15), 1);
        return;
    }
}

enum class Setup : uint8_t
{
    None,
    Word,  // MSTORE of a random word at offset 0
    Byte,  // MSTORE8 at a random offset, leaving an unaligned extent
};

struct Recipe
{
    std::vector<Operand> operands;  ///< top of stack first
    Setup setup = Setup::None;
};

Recipe recipe_for(const OpInfo& info)
{
    using enum Operand;
    const uint8_t b = info.byte;
    if (b >= op::LOG0 && b <= op::LOG0 + 4)
    {
        Recipe r{{Offset, Size}, Setup::Word};
        r.operands.insert(r.operands.end(), b - op::LOG0, Value);
        return r;
    }
    switch (b)
    {
    case 0x0b:  // SIGNEXTEND
    case op::BYTE:
        return {{Index, Value}};
    case 0x1b:  // SHL
    case 0x1c:  // SHR
    case 0x1d:  // SAR
        return {{Small, Value}};
    case op::KECCAK256:
        return {{Offset, Size}, Setup::Word};
    case op::BALANCE:
    case op::SELFDESTRUCT:
        return {{Address}};
    case op::CALLDATALOAD:
        return {{Offset}};
    case op::CALLDATACOPY:
    case op::CODECOPY:
        return {{Offset, Offset, Size}};
    case op::MLOAD:
        return {{Offset}, Setup::Word};
    case op::MSTORE:
    case op::MSTORE8:
        return {{Offset, Value}};
    case op::SLOAD:
    case op::TLOAD:
        return {{Slot}};
    case op::SSTORE:
    case op::TSTORE:
        return {{Slot, Value}};
    case op::MCOPY:
        return {{Offset, Offset, Size}, Setup::Word};
    case op::MSIZE:
        return {{}, Setup::Byte};
    case op::CREATE:
        return {{Small, Offset, Size}, Setup::Word};
    case op::CREATE2:
        return {{Small, Offset, Size, Value}, Setup::Word};
    case op::CALL:
    case op::CALLCODE:
        return {{Small, Address, NonZeroSmall, Offset, Size, Offset, Size}, Setup::Word};
    case op::DELEGATECALL:
    case op::STATICCALL:
        return {{Small, Address, Offset, Size, Offset, Size}, Setup::Word};
    case op::RETURN:
    case op::REVERT:
        return {{HighOffset, NonZeroSize}, Setup::Word};
    default:
        return {std::vector<Operand>(info.pops, Value)};
    }
}

bool halts_by_itself(uint8_t b) noexcept
{
    return b == op::STOP || b == op::RETURN || b == op::REVERT || b == op::INVALID || b == op::SELFDESTRUCT;
}

const Instruction& instruction_at(const BytecodeProgram& p, size_t offset)
{
    for (const auto& ins : p.instrs())
        if (ins.offset == offset)
            return ins;
    throw Error{"no instruction at offset " + std::to_string(offset)};
}

BytecodeProgram decode(const Bytes& code, Fork fork)
{
    return disassemble(code, fork);
}
}  // namespace

uint64_t derive_seed(uint64_t parent, uint64_t a, uint64_t b, uint64_t c) noexcept
{
    // splitmix64 finalizer over the mixed labels
    uint64_t z = parent;
    for (const uint64_t label : {a, b, c})
    {
        z += 0x9e3779b97f4a7c15ULL + label;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
    }
    return z;
}

std::vector<uint8_t> implemented_opcodes(Fork fork)
{
    return defined_opcodes(fork);
}

Seed build_seed(uint8_t opcode, Fork fork, uint64_t rng_seed)
{
    const auto info = opcode_info(opcode, fork);
    if (!info)
        throw UnsupportedOpcode{"opcode 0x" + to_hex(std::span{&opcode, 1}) + " is not implemented at " +
                                std::string{fork_name(fork)}};
    Rng rng{rng_seed};
    Seed seed;
    seed.opcode = opcode;
    seed.rng_seed = rng_seed;
    Builder b;

    if (opcode == op::INVALID)
    {
        seed.intended_path = PathId::InvalidOpcode;
        b.op(op::INVALID);
    }
    else if (opcode == op::JUMP)
    {
        b.push(3, 1);
        seed.target_offset = b.size();
        b.op(op::JUMP);
        b.op(op::JUMPDEST);
        b.op(op::STOP);
    }
    else if (opcode == op::JUMPI)
    {
        emit_operand(b, Operand::NonZeroSmall, rng);
        b.push(5, 1);
        seed.target_offset = b.size();
        b.op(op::JUMPI);
        b.op(op::JUMPDEST);
        b.op(op::STOP);
    }
    else if (is_push(opcode))
    {
        const unsigned n = info->immediate_len;
        b.push(random_word(rng, n), n);
        b.op(op::STOP);
    }
    else
    {
        const auto recipe = recipe_for(*info);
        if (recipe.setup == Setup::Word)
        {
            b.push(random_word(rng, 32), 32);
            b.push(0, 1);
            b.op(op::MSTORE);
        }
        else if (recipe.setup == Setup::Byte)
        {
            emit_operand(b, Operand::Value, rng);
            emit_operand(b, Operand::Offset, rng);
            b.op(op::MSTORE8);
        }
        seed.operand_offset = b.size();
        for (auto it = recipe.operands.rbegin(); it != recipe.operands.rend(); ++it)
            emit_operand(b, *it, rng);
        seed.target_offset = b.size();
        b.op(opcode);
        if (!halts_by_itself(opcode))
            b.op(op::STOP);
    }
    seed.program = decode(b.bytes(), fork);
    return seed;
}

void MutationConfig::validate() const
{
    if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError{"mutation probability must lie in [0, 1]"};
}

std::set<Bytes> mutate_arguments(const BytecodeProgram& program, const MutationConfig& config)
{
    config.validate();
    Rng rng{config.rng_seed};
    std::uniform_real_distribution<double> unit{0.0, 1.0};
    std::uniform_int_distribution<int> byte{0, 255};
    std::set<Bytes> out;
    for (uint64_t iter = 0; iter < config.t; ++iter)
    {
        Bytes code = program.bytes();
        for (const auto& ins : program.instrs())
        {
            if (ins.immediate.empty())
                continue;
            const double r = unit(rng);
            auto* first = code.data() + ins.offset + 1;
            const size_t len = ins.immediate.size();
            if (r < config.p / 2)
                std::fill_n(first, len, uint8_t{0x00});
            else if (r < config.p)
                std::fill_n(first, len, uint8_t{0xff});
            else
                for (size_t i = 0; i < len; ++i)
                    first[i] = static_cast<uint8_t>(byte(rng));
        }
        out.insert(std::move(code));
    }
    return out;
}

std::set<Bytes> mutate_arguments(const Seed& seed, const MutationConfig& config)
{
    return mutate_arguments(seed.program, config);
}

std::optional<BytecodeProgram> observable_variant(const Seed& seed, const OpSpec& spec)
{
    if (seed.intended_path != PathId::Success || spec.op.pushes == 0 || halts_by_itself(seed.opcode))
        return std::nullopt;
    const auto& target = instruction_at(seed.program, seed.target_offset);
    const auto& code = seed.program.bytes();
    Builder b;
    b.bytes().assign(code.begin(), code.begin() + static_cast<std::ptrdiff_t>(target.offset + 1 + target.immediate.size()));
    for (unsigned i = 0; i < spec.op.pushes; ++i)
    {
        b.push(32 * i, 2);
        b.op(op::MSTORE);
    }
    b.push(32 * spec.op.pushes, 2);
    b.push(0, 1);
    b.op(op::RETURN);
    return decode(b.bytes(), latest_fork);
}

std::vector<Candidate> mutate_control_flow(
    const Seed& seed, const OpSpec& spec, const ExecContext& pricing, std::vector<std::string>* notes)
{
    const auto note = [&](std::string text) {
        if (notes)
            notes->push_back(spec.op.mnemonic + ": " + std::move(text));
    };
    const Fork fork = pricing.fork;
    const auto& code = seed.program.bytes();
    std::vector<Candidate> out;

    // Operand pushes sit between operand_offset and target_offset.
    std::vector<const Instruction*> operands;
    for (const auto& ins : seed.program.instrs())
        if (ins.offset >= seed.operand_offset && ins.offset < seed.target_offset)
            operands.push_back(&ins);

    for (const auto& path : enumerate_paths(spec))
    {
        switch (path.id)
        {
        case PathId::Success:
            out.push_back({seed.program, PathId::Success});
            if (auto obs = observable_variant(seed, spec))
                out.push_back({std::move(*obs), PathId::Success, -1, ample_gas, false, "fallback-observable"});
            break;
        case PathId::InvalidOpcode:
            out.push_back({seed.program, PathId::InvalidOpcode});
            break;
        case PathId::StackUnderflow:
            // Keep only the last k operand pushes, one candidate per missing pop.
            for (size_t keep = 0; keep < spec.op.pops && keep <= operands.size(); ++keep)
            {
                Bytes prog(code.begin(), code.begin() + static_cast<std::ptrdiff_t>(seed.operand_offset));
                const size_t from = operands.size() - keep;
                const size_t start = keep == 0 ? seed.target_offset : operands[from]->offset;
                prog.insert(prog.end(), code.begin() + static_cast<std::ptrdiff_t>(start), code.end());
                out.push_back({decode(prog, fork), PathId::StackUnderflow, static_cast<int>(keep)});
            }
            break;
        case PathId::StackOverflow:
        {
            if (spec.op.pushes <= spec.op.pops)
            {
                note("STACK_OVERFLOW unreachable: opcode does not grow the stack");
                break;
            }
            // The target then runs with 1025 - pushes + pops items, one too many.
            const size_t filler = 1025 - spec.op.pushes;
            const bool has_push0 = opcode_info(op::PUSH0, fork).has_value();
            Bytes prog(code.begin(), code.begin() + static_cast<std::ptrdiff_t>(seed.operand_offset));
            for (size_t i = 0; i < filler; ++i)
            {
                if (has_push0)
                    prog.push_back(op::PUSH0);
                else
                    prog.insert(prog.end(), {op::PUSH1, 0});
            }
            prog.insert(prog.end(), code.begin() + static_cast<std::ptrdiff_t>(seed.operand_offset), code.end());
            out.push_back({decode(prog, fork), PathId::StackOverflow});
            break;
        }
        case PathId::OutOfGas:
        {
            auto ctx = pricing;
            ctx.tx.gas_limit = ample_gas;
            ctx.tx.static_flag = false;
            const auto trace = reference_engine()->execute(seed.program, ctx);
            const StepRecord* at = nullptr;
            for (const auto& s : trace.steps)
                if (s.pc == seed.target_offset)
                {
                    at = &s;
                    break;
                }
            if (at == nullptr || (at == &trace.steps.back() && is_exceptional(trace.final.halt)))
            {
                note("OUT_OF_GAS skipped: seed does not reach the target normally");
                break;
            }
            if (at->gas_cost == 0)
            {
                note("OUT_OF_GAS unreachable: target costs nothing under this context");
                break;
            }
            const Gas before = ample_gas - at->gas;
            out.push_back({seed.program, PathId::OutOfGas, -1, before + at->gas_cost - 1});
            break;
        }
        case PathId::InvalidJumpdest:
        {
            if (operands.empty())
            {
                note("INVALID_JUMPDEST skipped: no destination operand");
                break;
            }
            // The destination is the top operand, pushed last.
            const auto* dest = operands.back();
            size_t bad = seed.target_offset + 1;
            while (bad < code.size() && seed.program.is_jumpdest(bad))
                ++bad;
            Bytes prog = code;
            std::fill_n(prog.begin() + static_cast<std::ptrdiff_t>(dest->offset + 1), dest->immediate.size(), 0);
            prog[dest->offset + dest->immediate.size()] = static_cast<uint8_t>(bad);
            out.push_back({decode(prog, fork), PathId::InvalidJumpdest});
            break;
        }
        case PathId::WriteInStatic:
            out.push_back({seed.program, PathId::WriteInStatic, -1, ample_gas, true});
            break;
        }
    }
    return out;
}

std::string write_corpus_entry(const std::filesystem::path& dir, const Bytes& program, const CorpusEntryMeta& meta)
{
    std::filesystem::create_directories(dir);
    const auto key = program_key(program);
    {
        std::ofstream out{dir / (key + ".hex")};
        out << to_hex(program) << '\n';
        if (!out)
            throw IoFailure{"cannot write corpus entry " + key};
    }
    nlohmann::ordered_json j;
    j["opcode"] = meta.opcode;
    j["intended_path"] = meta.intended_path;
    j["provenance"] = meta.provenance;
    j["rng_seed"] = meta.rng_seed;
    std::ofstream out{dir / (key + ".json")};
    out << j.dump(2) << '\n';
    if (!out)
        throw IoFailure{"cannot write corpus sidecar " + key};
    return key;
}
}  // namespace opdiff

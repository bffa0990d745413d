// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/hex.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace opdiff
{
/// Protocol upgrades, in activation order.
enum class Fork : uint8_t
{
    Frontier,
    Homestead,
    Byzantium,
    Constantinople,
    Petersburg,
    Istanbul,
    Berlin,
    London,
    Paris,
    Shanghai,
    Cancun,
};

inline constexpr Fork latest_fork = Fork::Cancun;

std::string_view fork_name(Fork fork) noexcept;
/// Case-insensitive. Throws UnknownFork.
Fork parse_fork(std::string_view name);

/// One row of the opcode table. Undefined bytes decode to an INVALID-class
/// entry with `defined == false`.
struct OpInfo
{
    uint8_t byte = 0xfe;
    std::string mnemonic = "INVALID";
    uint8_t immediate_len = 0;
    uint8_t pops = 0;
    uint8_t pushes = 0;
    Fork introduced = Fork::Frontier;
    bool defined = false;

    friend bool operator==(const OpInfo&, const OpInfo&) = default;
};

namespace op
{
inline constexpr uint8_t STOP = 0x00;
inline constexpr uint8_t EXP = 0x0a;
inline constexpr uint8_t BYTE = 0x1a;
inline constexpr uint8_t KECCAK256 = 0x20;
inline constexpr uint8_t BALANCE = 0x31;
inline constexpr uint8_t CALLDATALOAD = 0x35;
inline constexpr uint8_t CALLDATACOPY = 0x37;
inline constexpr uint8_t CODECOPY = 0x39;
inline constexpr uint8_t PREVRANDAO = 0x44;
inline constexpr uint8_t POP = 0x50;
inline constexpr uint8_t MLOAD = 0x51;
inline constexpr uint8_t MSTORE = 0x52;
inline constexpr uint8_t MSTORE8 = 0x53;
inline constexpr uint8_t SLOAD = 0x54;
inline constexpr uint8_t SSTORE = 0x55;
inline constexpr uint8_t JUMP = 0x56;
inline constexpr uint8_t JUMPI = 0x57;
inline constexpr uint8_t MSIZE = 0x59;
inline constexpr uint8_t JUMPDEST = 0x5b;
inline constexpr uint8_t TLOAD = 0x5c;
inline constexpr uint8_t TSTORE = 0x5d;
inline constexpr uint8_t MCOPY = 0x5e;
inline constexpr uint8_t PUSH0 = 0x5f;
inline constexpr uint8_t PUSH1 = 0x60;
inline constexpr uint8_t PUSH2 = 0x61;
inline constexpr uint8_t PUSH20 = 0x73;
inline constexpr uint8_t PUSH32 = 0x7f;
inline constexpr uint8_t DUP1 = 0x80;
inline constexpr uint8_t SWAP1 = 0x90;
inline constexpr uint8_t LOG0 = 0xa0;
inline constexpr uint8_t CREATE = 0xf0;
inline constexpr uint8_t CALL = 0xf1;
inline constexpr uint8_t CALLCODE = 0xf2;
inline constexpr uint8_t RETURN = 0xf3;
inline constexpr uint8_t DELEGATECALL = 0xf4;
inline constexpr uint8_t CREATE2 = 0xf5;
inline constexpr uint8_t STATICCALL = 0xfa;
inline constexpr uint8_t REVERT = 0xfd;
inline constexpr uint8_t INVALID = 0xfe;
inline constexpr uint8_t SELFDESTRUCT = 0xff;
}  // namespace op

constexpr bool is_push(uint8_t byte) noexcept
{
    return byte >= op::PUSH1 && byte <= op::PUSH32;
}

/// Table lookup. Returns nullopt for bytes undefined at `fork`.
std::optional<OpInfo> opcode_info(uint8_t byte, Fork fork = latest_fork);
/// Same, with the fork given by name; throws UnknownFork.
std::optional<OpInfo> opcode_info(uint8_t byte, std::string_view fork);
/// Lookup by mnemonic; throws UnknownMnemonic.
const OpInfo& opcode_by_mnemonic(std::string_view mnemonic);
/// Every byte defined at `fork`, ascending.
std::vector<uint8_t> defined_opcodes(Fork fork = latest_fork);

struct Instruction
{
    size_t offset = 0;
    OpInfo info;
    Bytes immediate;
    bool truncated = false;  ///< PUSH immediate runs past the end of code.

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Decoded program. Immutable after construction.
class BytecodeProgram
{
public:
    BytecodeProgram() = default;

    const Bytes& bytes() const noexcept { return bytes_; }
    const std::vector<Instruction>& instrs() const noexcept { return instrs_; }
    const std::set<size_t>& jumpdests() const noexcept { return jumpdests_; }
    bool is_jumpdest(size_t offset) const noexcept
    {
        return offset < jumpdest_map_.size() && jumpdest_map_[offset];
    }
    bool has_truncated_immediate() const noexcept
    {
        return !instrs_.empty() && instrs_.back().truncated;
    }
    size_t size() const noexcept { return bytes_.size(); }
    std::string hex() const { return to_hex(bytes_); }

    friend BytecodeProgram disassemble(std::span<const uint8_t> bytes, Fork fork);

private:
    Bytes bytes_;
    std::vector<Instruction> instrs_;
    std::set<size_t> jumpdests_;
    std::vector<bool> jumpdest_map_;
};

/// Total decode; unknown bytes become INVALID-class instructions.
BytecodeProgram disassemble(std::span<const uint8_t> bytes, Fork fork = latest_fork);

struct ListingEntry
{
    std::string mnemonic;
    std::optional<Bytes> immediate;
};
using Listing = std::vector<ListingEntry>;

/// Throws UnknownMnemonic or ImmediateLengthMismatch.
BytecodeProgram assemble(const Listing& listing, Fork fork = latest_fork);

Listing to_listing(const BytecodeProgram& program);

/// "MNEMONIC [0xIMMEDIATE]" per line. Undefined bytes render as INVALID(0xNN).
std::string format_listing(const BytecodeProgram& program);
Listing parse_listing(std::string_view text);

std::set<size_t> valid_jump_targets(const BytecodeProgram& program);
}  // namespace opdiff

// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/detail/interpreter.hpp>
#include <opdiff/detail/opcode_table.hpp>
#include <opdiff/keccak.hpp>
#include <opdiff/semantics.hpp>

#include <algorithm>
#include <array>
#include <cstring>
#include <set>

namespace opdiff::detail
{
namespace
{
constexpr size_t stack_limit = 1024;

struct Halt
{
    HaltReason reason;
};

struct EngineCrash
{
    std::string detail;
};

class Memory
{
public:
    uint64_t size() const noexcept { return data_.size(); }
    uint64_t words() const noexcept { return data_.size() / 32; }
    uint64_t raw_extent() const noexcept { return raw_extent_; }
    const Bytes& data() const noexcept { return data_; }
    /// Bumped on every write access, so encodings can be cached between steps.
    uint64_t version() const noexcept { return version_; }

    /// Caller has already charged for the expansion, so the range fits in 64 bits.
    std::span<uint8_t> touch(const Word& offset, const Word& size)
    {
        if (size == 0)
            return {};
        ++version_;
        const auto off = offset.convert_to<uint64_t>();
        const auto len = size.convert_to<uint64_t>();
        raw_extent_ = std::max(raw_extent_, off + len);
        const uint64_t need = (off + len + 31) / 32 * 32;
        if (need > data_.size())
            data_.resize(need, 0);
        return {data_.data() + off, len};
    }

private:
    Bytes data_;
    uint64_t raw_extent_ = 0;  ///< Highest byte touched, before word rounding.
    uint64_t version_ = 0;
};

struct World
{
    std::map<Address, Account> accounts;
    std::map<Word, Word> transient;
    std::set<Address> warm_accounts;
    std::set<Word> warm_slots;
};

struct Frame
{
    const BytecodeProgram& code;
    const ExecContext& ctx;
    World world;
    std::vector<Word> stack;
    Memory memory;
    Gas gas_left = 0;
    uint64_t pc = 0;
    uint64_t next_pc = 0;
    Bytes return_data;
    std::optional<HaltReason> stop;
    StorageDelta* delta = nullptr;
    const OpSpec* spec = nullptr;

    uint8_t opcode() const noexcept { return code.bytes()[pc]; }

    Word pop()
    {
        Word v = std::move(stack.back());
        stack.pop_back();
        return v;
    }

    void push(const Word& v)
    {
        if (stack.size() >= stack_limit)
            throw Halt{HaltReason::StackOverflow};
        stack.push_back(v);
    }

    void charge(Gas amount)
    {
        if (amount > gas_left)
            throw Halt{HaltReason::OutOfGas};
        gas_left -= amount;
    }

    void charge(const DynamicInputs& in) { charge(gas_cost(*spec, in)); }

    void require_writable() const
    {
        if (ctx.tx.static_flag)
            throw Halt{HaltReason::WriteInStatic};
    }

    MemoryExpansion expansion(const Word& offset, const Word& size) const
    {
        return {memory.words(), words_for_range(offset, size)};
    }

    MemoryExpansion expansion(const Word& off_a, const Word& size_a, const Word& off_b, const Word& size_b) const
    {
        const auto a = words_for_range(off_a, size_a);
        const auto b = words_for_range(off_b, size_b);
        if (!a || !b)
            return {memory.words(), std::nullopt};
        return {memory.words(), std::max(*a, *b)};
    }

    Account& self() { return world.accounts[ctx.tx.to]; }

    const Account* find(const Address& a) const
    {
        const auto it = world.accounts.find(a);
        return it == world.accounts.end() ? nullptr : &it->second;
    }

    bool is_empty(const Address& a) const
    {
        const auto* acc = find(a);
        return acc == nullptr || (acc->nonce == 0 && acc->balance == 0 && acc->code.empty());
    }

    bool touch_account(const Address& a)
    {
        return !world.warm_accounts.insert(a).second;
    }

    void record(std::string key, const Word& value)
    {
        if (delta)
            (*delta)[std::move(key)] = value;
    }

    void record_balance(const Address& a) { record("balance:" + a.hex(), world.accounts[a].balance); }
    void record_nonce(const Address& a) { record("nonce:" + a.hex(), world.accounts[a].nonce); }
};

using Handler = void (*)(Frame&);

Word bytes_to_word(std::span<const uint8_t> data, uint64_t offset, size_t len = 32)
{
    std::array<uint8_t, 32> buf{};
    for (size_t i = 0; i < len; ++i)
        if (offset + i < data.size() && offset + i >= offset)
            buf[32 - len + i] = data[offset + i];
    return word_from_be(buf);
}

void copy_padded(std::span<uint8_t> dest, std::span<const uint8_t> src, const Word& src_offset)
{
    const auto off = to_u64(src_offset);
    for (size_t i = 0; i < dest.size(); ++i)
    {
        const bool inside = off && *off + i >= *off && *off + i < src.size();
        dest[i] = inside ? src[*off + i] : 0;
    }
}

// --- Arithmetic, comparison, bitwise ---

void op_stop(Frame& f)
{
    f.stop = HaltReason::Success;
}

void op_pure(Frame& f)
{
    std::array<Word, 3> args;
    for (size_t i = 0; i < f.spec->op.pops; ++i)
        args[i] = f.pop();
    f.charge(f.spec->static_gas);
    f.push(*evaluate_pure(f.opcode(), std::span{args.data(), f.spec->op.pops}));
}

void op_exp(Frame& f)
{
    const Word base = f.pop();
    const Word exponent = f.pop();
    f.charge(DynamicInputs{.exponent = exponent});
    f.push(exp_mod(base, exponent));
}

void op_keccak256(Frame& f)
{
    const Word offset = f.pop();
    const Word size = f.pop();
    f.charge(DynamicInputs{.memory = f.expansion(offset, size), .data_size = size});
    const auto data = f.memory.touch(offset, size);
    f.push(word_from_be(keccak256(data)));
}

// --- Environment ---

void op_address(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.tx.to.word());
}

void op_balance(Frame& f)
{
    const Address a{f.pop()};
    const bool warm = f.world.warm_accounts.contains(a);
    f.charge(DynamicInputs{.warm = warm});
    f.touch_account(a);
    const auto* acc = f.find(a);
    f.push(acc ? acc->balance : Word{0});
}

void op_origin(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.tx.origin.word());
}

void op_caller(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.tx.caller.word());
}

void op_callvalue(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.tx.callvalue);
}

void op_calldataload(Frame& f)
{
    const Word offset = f.pop();
    f.charge(f.spec->static_gas);
    const auto off = to_u64(offset);
    f.push(off ? bytes_to_word(f.ctx.tx.calldata, *off) : Word{0});
}

void op_calldatasize(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.tx.calldata.size());
}

void copy_to_memory(Frame& f, std::span<const uint8_t> source)
{
    const Word dest = f.pop();
    const Word offset = f.pop();
    const Word size = f.pop();
    f.charge(DynamicInputs{.memory = f.expansion(dest, size), .data_size = size});
    copy_padded(f.memory.touch(dest, size), source, offset);
}

void op_calldatacopy(Frame& f)
{
    copy_to_memory(f, f.ctx.tx.calldata);
}

void op_codesize(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.code.size());
}

void op_codecopy(Frame& f)
{
    copy_to_memory(f, f.code.bytes());
}

void op_gasprice(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.tx.gas_price);
}

// --- Block ---

void op_blockhash(Frame& f)
{
    const Word number = f.pop();
    f.charge(f.spec->static_gas);
    f.push(block_hash(f.ctx, number));
}

void op_coinbase(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.global.coinbase.word());
}

void op_timestamp(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.global.timestamp);
}

void op_number(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.global.block_number);
}

void op_prevrandao(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.global.prev_randao);
}

void op_gaslimit(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.global.gas_limit);
}

void op_chainid(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.global.chain_id);
}

void op_selfbalance(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.self().balance);
}

void op_basefee(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.ctx.global.base_fee);
}

// --- Stack, memory, storage, flow ---

void op_pop(Frame& f)
{
    f.pop();
    f.charge(f.spec->static_gas);
}

void op_mload(Frame& f)
{
    const Word offset = f.pop();
    f.charge(DynamicInputs{.memory = f.expansion(offset, 32)});
    f.push(word_from_be(f.memory.touch(offset, 32)));
}

void op_mstore(Frame& f)
{
    const Word offset = f.pop();
    const Word value = f.pop();
    f.charge(DynamicInputs{.memory = f.expansion(offset, 32)});
    const auto be = word_to_be(value);
    std::ranges::copy(be, f.memory.touch(offset, 32).begin());
}

void op_mstore8(Frame& f)
{
    const Word offset = f.pop();
    const Word value = f.pop();
    f.charge(DynamicInputs{.memory = f.expansion(offset, 1)});
    f.memory.touch(offset, 1)[0] = static_cast<uint8_t>(value & 0xff);
}

void op_sload(Frame& f)
{
    const Word key = f.pop();
    const bool warm = f.world.warm_slots.contains(key);
    f.charge(DynamicInputs{.warm = warm});
    f.world.warm_slots.insert(key);
    const auto& storage = f.self().storage;
    const auto it = storage.find(key);
    f.push(it == storage.end() ? Word{0} : it->second);
}

Word original_slot(const Frame& f, const Word& key)
{
    const auto acc = f.ctx.accounts.find(f.ctx.tx.to);
    if (acc == f.ctx.accounts.end())
        return 0;
    const auto it = acc->second.storage.find(key);
    return it == acc->second.storage.end() ? Word{0} : it->second;
}

void op_sstore(Frame& f)
{
    const Word key = f.pop();
    const Word value = f.pop();
    if (f.gas_left <= gas::sstore_sentry)
        throw Halt{HaltReason::OutOfGas};
    auto& storage = f.self().storage;
    const auto it = storage.find(key);
    const Word current = it == storage.end() ? Word{0} : it->second;
    const bool warm = f.world.warm_slots.contains(key);
    f.charge(DynamicInputs{.warm = warm, .sstore = SstoreInputs{original_slot(f, key), current, value}});
    f.world.warm_slots.insert(key);
    f.require_writable();
    if (value == 0)
        storage.erase(key);
    else
        storage[key] = value;
    f.record("slot:" + to_quantity(key), value);
}

void op_jump(Frame& f)
{
    const Word dest = f.pop();
    f.charge(f.spec->static_gas);
    const auto d = to_u64(dest);
    if (!d || !f.code.is_jumpdest(*d))
        throw Halt{HaltReason::InvalidJumpdest};
    f.next_pc = *d;
}

void op_jumpi(Frame& f)
{
    const Word dest = f.pop();
    const Word cond = f.pop();
    f.charge(f.spec->static_gas);
    if (cond == 0)
        return;
    const auto d = to_u64(dest);
    if (!d || !f.code.is_jumpdest(*d))
        throw Halt{HaltReason::InvalidJumpdest};
    f.next_pc = *d;
}

void op_pc(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.pc);
}

void op_msize(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.memory.size());
}

void op_gas(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.gas_left);
}

void op_jumpdest(Frame& f)
{
    f.charge(f.spec->static_gas);
}

void op_tload(Frame& f)
{
    const Word key = f.pop();
    f.charge(f.spec->static_gas);
    const auto it = f.world.transient.find(key);
    f.push(it == f.world.transient.end() ? Word{0} : it->second);
}

void op_tstore(Frame& f)
{
    const Word key = f.pop();
    const Word value = f.pop();
    f.charge(f.spec->static_gas);
    f.require_writable();
    if (value == 0)
        f.world.transient.erase(key);
    else
        f.world.transient[key] = value;
    f.record("transient:" + to_quantity(key), value);
}

void op_mcopy(Frame& f)
{
    const Word dest = f.pop();
    const Word src = f.pop();
    const Word size = f.pop();
    f.charge(DynamicInputs{.memory = f.expansion(dest, size, src, size), .data_size = size});
    if (size == 0)
        return;
    f.memory.touch(src, size);
    f.memory.touch(dest, size);
    const auto base = const_cast<uint8_t*>(f.memory.data().data());
    std::memmove(base + dest.convert_to<uint64_t>(), base + src.convert_to<uint64_t>(), size.convert_to<size_t>());
}

Word push_value(const Frame& f, size_t n)
{
    return bytes_to_word(f.code.bytes(), f.pc + 1, n);
}

void op_push0(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(0);
}

void op_push(Frame& f)
{
    const size_t n = f.opcode() - op::PUSH0;
    f.charge(f.spec->static_gas);
    f.push(push_value(f, n));
    f.next_pc = f.pc + 1 + n;
}

void op_dup(Frame& f)
{
    const size_t n = f.opcode() - op::DUP1 + 1;
    f.charge(f.spec->static_gas);
    f.push(f.stack[f.stack.size() - n]);
}

void op_swap(Frame& f)
{
    const size_t n = f.opcode() - op::SWAP1 + 1;
    f.charge(f.spec->static_gas);
    std::swap(f.stack.back(), f.stack[f.stack.size() - 1 - n]);
}

void op_log(Frame& f)
{
    const size_t topics = f.opcode() - op::LOG0;
    const Word offset = f.pop();
    const Word size = f.pop();
    for (size_t i = 0; i < topics; ++i)
        f.pop();
    f.charge(DynamicInputs{.memory = f.expansion(offset, size), .data_size = size});
    f.require_writable();
    f.memory.touch(offset, size);
}

// --- System ---

Bytes rlp_sender_nonce(const Address& sender, uint64_t nonce)
{
    Bytes nonce_enc;
    if (nonce == 0)
        nonce_enc = {0x80};
    else if (nonce < 0x80)
        nonce_enc = {static_cast<uint8_t>(nonce)};
    else
    {
        Bytes be;
        for (uint64_t v = nonce; v != 0; v >>= 8)
            be.insert(be.begin(), static_cast<uint8_t>(v));
        nonce_enc.push_back(static_cast<uint8_t>(0x80 + be.size()));
        nonce_enc.insert(nonce_enc.end(), be.begin(), be.end());
    }
    const auto addr = word_to_be(sender.word());
    Bytes out;
    out.push_back(static_cast<uint8_t>(0xc0 + 21 + nonce_enc.size()));
    out.push_back(0x94);
    out.insert(out.end(), addr.begin() + 12, addr.end());
    out.insert(out.end(), nonce_enc.begin(), nonce_enc.end());
    return out;
}

Address create_address(const Address& sender, uint64_t nonce)
{
    return Address{word_from_be(keccak256(rlp_sender_nonce(sender, nonce)))};
}

Address create2_address(const Address& sender, const Word& salt, std::span<const uint8_t> initcode)
{
    Bytes buf;
    buf.push_back(0xff);
    const auto addr = word_to_be(sender.word());
    buf.insert(buf.end(), addr.begin() + 12, addr.end());
    const auto s = word_to_be(salt);
    buf.insert(buf.end(), s.begin(), s.end());
    const auto h = keccak256(initcode);
    buf.insert(buf.end(), h.begin(), h.end());
    return Address{word_from_be(keccak256(buf))};
}

/// Account creation without running init code.
void finish_create(Frame& f, const Word& value, const Word& offset, const Word& size, const Word* salt)
{
    if (to_u64(size).value_or(gas::max_initcode_size + 1) > gas::max_initcode_size)
        throw Halt{HaltReason::OutOfGas};
    f.require_writable();
    const auto initcode = f.memory.touch(offset, size);
    f.return_data.clear();

    const Address sender = f.ctx.tx.to;
    auto& self = f.self();
    if (self.balance < value || self.nonce == std::numeric_limits<uint64_t>::max())
    {
        f.push(0);
        return;
    }
    const Address target = salt ? create2_address(sender, *salt, initcode) : create_address(sender, self.nonce);
    self.nonce += 1;
    f.record_nonce(sender);
    f.touch_account(target);
    if (const auto* existing = f.find(target); existing && (existing->nonce != 0 || !existing->code.empty()))
    {
        f.push(0);
        return;
    }
    self.balance -= value;
    auto& created = f.world.accounts[target];
    created.balance += value;
    created.nonce = 1;
    f.record_balance(sender);
    f.record_balance(target);
    f.record_nonce(target);
    f.push(target.word());
}

void op_create(Frame& f)
{
    const Word value = f.pop();
    const Word offset = f.pop();
    const Word size = f.pop();
    f.charge(DynamicInputs{.memory = f.expansion(offset, size), .data_size = size});
    finish_create(f, value, offset, size, nullptr);
}

void op_create2(Frame& f)
{
    const Word value = f.pop();
    const Word offset = f.pop();
    const Word size = f.pop();
    const Word salt = f.pop();
    f.charge(DynamicInputs{.memory = f.expansion(offset, size), .data_size = size});
    finish_create(f, value, offset, size, &salt);
}

/// CALL-family without sub-execution: charges and touches like a real call,
/// then reports failure.
void call_common(Frame& f, bool has_value)
{
    f.pop();  // gas
    const Address to{f.pop()};
    const Word value = has_value ? f.pop() : Word{0};
    const Word args_offset = f.pop();
    const Word args_size = f.pop();
    const Word ret_offset = f.pop();
    const Word ret_size = f.pop();
    const bool warm = f.world.warm_accounts.contains(to);
    f.charge(DynamicInputs{
        .warm = warm,
        .memory = f.expansion(args_offset, args_size, ret_offset, ret_size),
        .value_transfer = value != 0,
        .target_empty = f.is_empty(to),
    });
    if (f.opcode() == op::CALL && value != 0)
        f.require_writable();
    f.touch_account(to);
    f.memory.touch(args_offset, args_size);
    f.memory.touch(ret_offset, ret_size);
    f.return_data.clear();
    f.push(0);
}

void op_call(Frame& f)
{
    call_common(f, true);
}

void op_delegatecall(Frame& f)
{
    call_common(f, false);
}

void op_return(Frame& f)
{
    const Word offset = f.pop();
    const Word size = f.pop();
    f.charge(DynamicInputs{.memory = f.expansion(offset, size)});
    const auto data = f.memory.touch(offset, size);
    f.return_data.assign(data.begin(), data.end());
    f.stop = HaltReason::Success;
}

/// Entries the rollback restores, with their restored values.
void record_rollback(Frame& f)
{
    if (!f.delta)
        return;
    const auto& before = f.ctx.accounts;
    const auto original_account = [&](const Address& a) -> Account {
        const auto it = before.find(a);
        return it == before.end() ? Account{} : it->second;
    };
    for (const auto& [addr, acc] : f.world.accounts)
    {
        const Account orig = original_account(addr);
        if (acc.balance != orig.balance)
            f.record("balance:" + addr.hex(), orig.balance);
        if (acc.nonce != orig.nonce)
            f.record("nonce:" + addr.hex(), orig.nonce);
        if (addr == f.ctx.tx.to)
        {
            std::set<Word> keys;
            for (const auto& [k, _] : acc.storage)
                keys.insert(k);
            for (const auto& [k, _] : orig.storage)
                keys.insert(k);
            for (const auto& k : keys)
            {
                const auto now = acc.storage.find(k);
                const auto was = orig.storage.find(k);
                const Word now_v = now == acc.storage.end() ? Word{0} : now->second;
                const Word was_v = was == orig.storage.end() ? Word{0} : was->second;
                if (now_v != was_v)
                    f.record("slot:" + to_quantity(k), was_v);
            }
        }
    }
    for (const auto& [k, _] : f.world.transient)
        f.record("transient:" + to_quantity(k), 0);
}

void op_revert(Frame& f)
{
    const Word offset = f.pop();
    const Word size = f.pop();
    f.charge(DynamicInputs{.memory = f.expansion(offset, size)});
    const auto data = f.memory.touch(offset, size);
    f.return_data.assign(data.begin(), data.end());
    record_rollback(f);
    f.stop = HaltReason::Revert;
}

void op_invalid(Frame&)
{
    throw Halt{HaltReason::InvalidOpcode};
}

void op_selfdestruct(Frame& f)
{
    const Address beneficiary{f.pop()};
    const bool warm = f.world.warm_accounts.contains(beneficiary);
    const Word balance = f.self().balance;
    f.charge(DynamicInputs{
        .warm = warm,
        .value_transfer = balance != 0,
        .target_empty = f.is_empty(beneficiary),
    });
    f.require_writable();
    f.touch_account(beneficiary);
    // The account was not created in this transaction, so it is not deleted.
    if (beneficiary != f.ctx.tx.to)
    {
        f.world.accounts[beneficiary].balance += balance;
        f.self().balance = 0;
        f.record_balance(beneficiary);
    }
    f.record_balance(f.ctx.tx.to);
    f.stop = HaltReason::Success;
}

// --- Faulty handlers for the mutant catalog ---

/// F1: power computed without reduction; an oversized result is clamped.
void mutant_exp_unbounded(Frame& f)
{
    using boost::multiprecision::cpp_int;
    const Word base = f.pop();
    const Word exponent = f.pop();
    f.charge(DynamicInputs{.exponent = exponent});
    const Word max = ~Word{0};
    Word result;
    if (base < 2 || exponent == 0)
        result = exponent == 0 ? Word{1} : base;
    else if (exponent > 256)
        result = max;
    else
    {
        const cpp_int exact = boost::multiprecision::pow(cpp_int{base}, exponent.convert_to<unsigned>());
        result = exact > cpp_int{max} ? max : static_cast<Word>(exact);
    }
    f.push(result);
}

/// F3: every account treated as warm.
void mutant_balance_always_warm(Frame& f)
{
    const Address a{f.pop()};
    f.charge(DynamicInputs{.warm = true});
    f.touch_account(a);
    const auto* acc = f.find(a);
    f.push(acc ? acc->balance : Word{0});
}

/// F4: PUSH1 advances the program counter one byte too far.
void mutant_push1_pc(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(push_value(f, 1));
    f.next_pc = f.pc + 3;
}

/// F5: value and salt taken from each other's stack slots.
void mutant_create2_swapped(Frame& f)
{
    const Word value = f.pop();
    const Word offset = f.pop();
    const Word size = f.pop();
    const Word salt = f.pop();
    f.charge(DynamicInputs{.memory = f.expansion(offset, size), .data_size = size});
    finish_create(f, salt, offset, size, &value);
}

/// F8: MSIZE reports the highest touched byte instead of the word-rounded size.
void mutant_msize_unrounded(Frame& f)
{
    f.charge(f.spec->static_gas);
    f.push(f.memory.raw_extent());
}

struct HandlerEntry
{
    Handler fn = nullptr;
    std::string function;
    std::optional<std::string> mnemonic;  ///< Read by the step recorder.
};

struct InstructionSet
{
    std::array<HandlerEntry, 256> handlers;
    std::array<bool, 256> disabled{};
};

std::pair<Handler, std::string> reference_handler(const OpInfo& info)
{
    const uint8_t b = info.byte;
    if (b == op::PUSH0)
        return {op_push0, "op_push0"};
    if (b >= op::PUSH1 && b <= op::PUSH32)
        return {op_push, "op_push"};
    if (b >= op::DUP1 && b < op::DUP1 + 16)
        return {op_dup, "op_dup"};
    if (b >= op::SWAP1 && b < op::SWAP1 + 16)
        return {op_swap, "op_swap"};
    if (b >= op::LOG0 && b <= op::LOG0 + 4)
        return {op_log, "op_log"};

    static const std::map<std::string, Handler, std::less<>> named = {
        {"STOP", op_stop}, {"EXP", op_exp}, {"KECCAK256", op_keccak256}, {"ADDRESS", op_address},
        {"BALANCE", op_balance}, {"ORIGIN", op_origin}, {"CALLER", op_caller},
        {"CALLVALUE", op_callvalue}, {"CALLDATALOAD", op_calldataload},
        {"CALLDATASIZE", op_calldatasize}, {"CALLDATACOPY", op_calldatacopy},
        {"CODESIZE", op_codesize}, {"CODECOPY", op_codecopy}, {"GASPRICE", op_gasprice},
        {"BLOCKHASH", op_blockhash}, {"COINBASE", op_coinbase}, {"TIMESTAMP", op_timestamp},
        {"NUMBER", op_number}, {"PREVRANDAO", op_prevrandao}, {"GASLIMIT", op_gaslimit},
        {"CHAINID", op_chainid}, {"SELFBALANCE", op_selfbalance}, {"BASEFEE", op_basefee},
        {"POP", op_pop}, {"MLOAD", op_mload}, {"MSTORE", op_mstore}, {"MSTORE8", op_mstore8},
        {"SLOAD", op_sload}, {"SSTORE", op_sstore}, {"JUMP", op_jump}, {"JUMPI", op_jumpi},
        {"PC", op_pc}, {"MSIZE", op_msize}, {"GAS", op_gas}, {"JUMPDEST", op_jumpdest},
        {"TLOAD", op_tload}, {"TSTORE", op_tstore}, {"MCOPY", op_mcopy}, {"CREATE", op_create},
        {"CALL", op_call}, {"CALLCODE", op_call}, {"RETURN", op_return},
        {"DELEGATECALL", op_delegatecall}, {"CREATE2", op_create2}, {"STATICCALL", op_delegatecall},
        {"REVERT", op_revert}, {"INVALID", op_invalid}, {"SELFDESTRUCT", op_selfdestruct},
    };
    if (const auto it = named.find(info.mnemonic); it != named.end())
    {
        std::string fn = "op_";
        for (const char c : info.mnemonic)
            fn.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        if (info.mnemonic == "CALLCODE")
            fn = "op_call";
        if (info.mnemonic == "STATICCALL")
            fn = "op_delegatecall";
        return {it->second, fn};
    }
    return {op_pure, "op_pure"};
}

InstructionSet reference_set()
{
    InstructionSet set;
    for (const auto& row : builtin_table())
    {
        if (!row)
            continue;
        auto [fn, name] = reference_handler(row->info);
        set.handlers[row->info.byte] = {fn, "evm::handlers::" + name, row->info.mnemonic};
    }
    return set;
}

InstructionSet mutant_set(const FaultSpec& fault)
{
    auto set = reference_set();
    auto& entry = set.handlers[fault.target_opcode];
    const auto replace = [&](Handler fn, std::string name) {
        entry.fn = fn;
        entry.function = "evm::mutant::" + std::move(name);
    };
    if (fault.fault_id == "F1")
        replace(mutant_exp_unbounded, "op_exp_unbounded");
    else if (fault.fault_id == "F2")
        replace(
            [](Frame& f) {
                const Word dest = f.pop();
                f.charge(f.spec->static_gas);
                f.next_pc = to_u64(dest).value_or(f.code.size());
            },
            "op_jump_unchecked");
    else if (fault.fault_id == "F3")
        replace(mutant_balance_always_warm, "op_balance_warm");
    else if (fault.fault_id == "F4")
        replace(mutant_push1_pc, "op_push1_pc");
    else if (fault.fault_id == "F5")
        replace(mutant_create2_swapped, "op_create2_swapped");
    else if (fault.fault_id == "F6")
    {
        entry.function = "evm::mutant::op_selfdestruct";
        entry.mnemonic.reset();
    }
    else if (fault.fault_id == "F7")
    {
        set.disabled[fault.target_opcode] = true;
        entry.function = "evm::mutant::instruction_set";
    }
    else if (fault.fault_id == "F8")
        replace(mutant_msize_unrounded, "op_msize_unrounded");
    return set;
}

std::string encode_memory(const Bytes& memory)
{
    if (memory.size() <= max_traced_memory)
        return "0x" + to_hex(memory);
    // Every engine in a campaign produces the same large images; remember the
    // recent ones per thread instead of hashing them again.
    struct Cached
    {
        Bytes memory;
        std::string digest;
    };
    constexpr size_t slots = 64;
    thread_local std::array<Cached, slots> cache;
    thread_local size_t next_slot = 0;
    for (const auto& c : cache)
        if (c.memory == memory)
            return c.digest;
    auto& slot = cache[next_slot++ % slots];
    slot.memory = memory;
    slot.digest = "keccak256:0x" + keccak256_hex(memory);
    return slot.digest;
}

std::map<Word, Word> contract_storage(const std::map<Address, Account>& accounts, const Address& to)
{
    const auto it = accounts.find(to);
    if (it == accounts.end())
        return {};
    std::map<Word, Word> out;
    for (const auto& [k, v] : it->second.storage)
        if (v != 0)
            out.emplace(k, v);
    return out;
}

class Interpreter final : public Engine
{
public:
    Interpreter(std::string id, InstructionSet set) : id_{std::move(id)}, set_{std::move(set)} {}

    const std::string& id() const noexcept override { return id_; }

    std::map<uint8_t, std::string> handler_names() const override
    {
        std::map<uint8_t, std::string> out;
        for (unsigned b = 0; b < 256; ++b)
            if (set_.handlers[b].fn)
                out.emplace(static_cast<uint8_t>(b), set_.handlers[b].function);
        return out;
    }

    Trace execute(const BytecodeProgram& program, const ExecContext& ctx) const override;

private:
    std::string id_;
    InstructionSet set_;
};

Trace Interpreter::execute(const BytecodeProgram& program, const ExecContext& ctx) const
{
    Trace trace;
    trace.engine_id = id_;
    trace.program_key = program_key(program.bytes());
    trace.context_key = context_key(ctx);
    trace.fork = ctx.fork;

    Frame f{program, ctx};
    f.world.accounts = ctx.accounts;
    for (const auto& [addr, acc] : ctx.accounts)
        if (acc.warm)
            f.world.warm_accounts.insert(addr);
    f.world.warm_accounts.insert(ctx.tx.to);
    f.world.warm_accounts.insert(ctx.tx.origin);
    f.world.warm_accounts.insert(ctx.global.coinbase);
    f.gas_left = ctx.tx.gas_limit;

    HaltReason halt = HaltReason::Success;
    const auto& code = program.bytes();
    std::string memory_encoding = encode_memory({});
    uint64_t encoded_version = 0;
    try
    {
        while (f.pc < code.size())
        {
            const uint8_t byte = code[f.pc];
            const auto& entry = set_.handlers[byte];
            const bool defined = entry.fn && !set_.disabled[byte] && opcode_info(byte, ctx.fork);

            StepRecord rec;
            rec.pc = f.pc;
            rec.op = byte;
            rec.gas = f.gas_left;
            rec.stack = f.stack;
            rec.mem_size = f.memory.size();
            if (f.memory.version() != encoded_version)
            {
                memory_encoding = encode_memory(f.memory.data());
                encoded_version = f.memory.version();
            }
            rec.memory = memory_encoding;
            if (!defined)
            {
                rec.op_name = "UNDEFINED";
                rec.gas_cost = f.gas_left;
                f.gas_left = 0;
                trace.steps.push_back(std::move(rec));
                halt = HaltReason::InvalidOpcode;
                break;
            }
            if (!entry.mnemonic)
                throw EngineCrash{"step recorder: handler " + entry.function + " has no attribute 'mnemonic'"};
            rec.op_name = *entry.mnemonic;
            trace.steps.push_back(std::move(rec));
            auto& step = trace.steps.back();

            f.spec = &spec_for(byte, ctx.fork);
            StorageDelta delta;
            const bool storage_op = affects_storage(byte);
            f.delta = storage_op ? &delta : nullptr;
            f.next_pc = f.pc + 1;
            const Gas before = f.gas_left;
            try
            {
                if (f.stack.size() < f.spec->op.pops)
                    throw Halt{HaltReason::StackUnderflow};
                entry.fn(f);
            }
            catch (const Halt& h)
            {
                step.gas_cost = before;
                f.gas_left = 0;
                if (storage_op)
                    step.storage_delta = StorageDelta{};
                halt = h.reason;
                break;
            }
            step.gas_cost = before - f.gas_left;
            if (storage_op)
                step.storage_delta = std::move(delta);
            if (f.stop)
            {
                halt = *f.stop;
                break;
            }
            f.pc = f.next_pc;
        }
    }
    catch (const EngineCrash& e)
    {
        halt = HaltReason::EngineError;
        trace.final.error_detail = e.detail;
    }
    catch (const std::exception& e)
    {
        halt = HaltReason::EngineError;
        trace.final.error_detail = e.what();
    }

    auto& fin = trace.final;
    fin.halt = halt;
    fin.gas_used = ctx.tx.gas_limit - f.gas_left;
    const bool committed = halt == HaltReason::Success;
    if (halt == HaltReason::Success || halt == HaltReason::Revert)
        fin.return_data = std::move(f.return_data);
    fin.storage_after = contract_storage(committed ? f.world.accounts : ctx.accounts, ctx.tx.to);
    return trace;
}
}  // namespace

EnginePtr make_interpreter(std::string id, const FaultSpec* fault)
{
    return std::make_shared<Interpreter>(std::move(id), fault ? mutant_set(*fault) : reference_set());
}
}  // namespace opdiff::detail

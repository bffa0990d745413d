// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/bytecode.hpp>
#include <opdiff/opspec.hpp>
#include <opdiff/word.hpp>

#include <cstdint>
#include <map>
#include <string>

namespace opdiff
{
struct Account
{
    Word balance;
    uint64_t nonce = 0;
    Bytes code;
    std::map<Word, Word> storage;
    bool warm = false;

    friend bool operator==(const Account&, const Account&) = default;
};

struct GlobalState
{
    Word chain_id;
    Word block_number;
    Word timestamp;
    Address coinbase;
    Word prev_randao;
    Word gas_limit;
    Word base_fee;

    friend bool operator==(const GlobalState&, const GlobalState&) = default;
};

struct TxState
{
    Address origin;
    Address caller;
    Address to;  ///< The executing contract.
    Word callvalue;
    Word gas_price;
    Bytes calldata;
    Gas gas_limit = 0;
    bool static_flag = false;

    friend bool operator==(const TxState&, const TxState&) = default;
};

/// Everything an engine may observe besides the program. Shared identically
/// by every engine in a comparison.
struct ExecContext
{
    Fork fork = latest_fork;
    std::map<Address, Account> accounts;
    GlobalState global;
    TxState tx;
    uint64_t rng_seed = 0;

    friend bool operator==(const ExecContext&, const ExecContext&) = default;
};

namespace addresses
{
Address contract();
Address origin();
/// Pre-funded accounts present in every generated context.
const std::vector<Address>& peers();
}  // namespace addresses

inline constexpr Gas ample_gas = 1'000'000;
inline constexpr uint64_t tight_gas_max = 64;
inline constexpr double tight_gas_probability = 0.2;

/// Deterministic in `rng_seed`.
ExecContext make_context(uint64_t rng_seed);

/// Canonical JSON; equal contexts serialize identically.
std::string serialize(const ExecContext& ctx);
/// Throws Error on malformed input.
ExecContext deserialize_context(std::string_view json);
/// Content address of the serialization (16 hex chars).
std::string context_key(const ExecContext& ctx);

/// BLOCKHASH value for `number` under `ctx` (zero outside the last 256 blocks).
Word block_hash(const ExecContext& ctx, const Word& number);
}  // namespace opdiff

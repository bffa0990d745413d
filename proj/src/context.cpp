// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/context.hpp>
#include <opdiff/errors.hpp>
#include <opdiff/keccak.hpp>

#include <optional>

#include <json.hpp>

#include <random>

namespace opdiff
{
namespace
{
using json = nlohmann::ordered_json;

Word random_word(std::mt19937_64& rng, unsigned bits)
{
    Word w = 0;
    for (unsigned i = 0; i < (bits + 63) / 64; ++i)
        w = (w << 64) | rng();
    if (bits < 256)
        w &= (Word{1} << bits) - 1;
    return w;
}

Word random_in(std::mt19937_64& rng, uint64_t lo, uint64_t hi_exclusive)
{
    return std::uniform_int_distribution<uint64_t>{lo, hi_exclusive - 1}(rng);
}

std::string q(const Word& w)
{
    return to_quantity(w);
}

Word parse_q(const json& j)
{
    const auto w = parse_quantity(j.get<std::string>());
    if (!w)
        throw Error{"context: bad quantity " + j.dump()};
    return *w;
}

Address parse_addr(const std::string& s)
{
    const auto a = Address::parse(s);
    if (!a)
        throw Error{"context: bad address " + s};
    return *a;
}

Bytes parse_bytes(const json& j)
{
    const auto b = from_hex(j.get<std::string>());
    if (!b)
        throw Error{"context: bad hex " + j.dump()};
    return *b;
}
}  // namespace

namespace addresses
{
Address contract()
{
    return Address{Word{0xc0de}};
}

Address origin()
{
    return Address{Word{0x0a11ce}};
}

const std::vector<Address>& peers()
{
    static const std::vector<Address> p = {Address{Word{0x1001}}, Address{Word{0x1002}}, Address{Word{0x1003}}};
    return p;
}
}  // namespace addresses

ExecContext make_context(uint64_t rng_seed)
{
    std::mt19937_64 rng{rng_seed};
    ExecContext ctx;
    ctx.rng_seed = rng_seed;
    ctx.fork = latest_fork;

    auto& g = ctx.global;
    g.chain_id = random_in(rng, 1, uint64_t{1} << 32);
    g.block_number = random_in(rng, 1, uint64_t{1} << 32);
    g.timestamp = random_in(rng, 1, uint64_t{1} << 32);
    g.coinbase = Address{random_word(rng, 160)};
    g.prev_randao = random_word(rng, 256);
    g.gas_limit = 30'000'000;
    g.base_fee = random_in(rng, 1, uint64_t{1} << 32);

    Account contract;
    contract.balance = random_word(rng, 64);
    contract.nonce = 1;
    contract.warm = true;
    for (unsigned slot = 0; slot < 8; ++slot)
        if (rng() & 1)
            contract.storage[slot] = random_word(rng, 256);
    ctx.accounts[addresses::contract()] = contract;

    Account origin;
    origin.balance = random_word(rng, 64);
    origin.nonce = random_in(rng, 0, 1000).convert_to<uint64_t>();
    origin.warm = true;
    ctx.accounts[addresses::origin()] = origin;

    for (const auto& peer : addresses::peers())
    {
        Account a;
        a.balance = random_word(rng, 64);
        a.warm = rng() & 1;
        ctx.accounts[peer] = a;
    }

    Account coinbase;
    coinbase.balance = random_word(rng, 64);
    coinbase.warm = true;
    ctx.accounts[g.coinbase] = coinbase;

    auto& tx = ctx.tx;
    tx.origin = addresses::origin();
    tx.caller = addresses::origin();
    tx.to = addresses::contract();
    tx.callvalue = random_in(rng, 0, 1'000'000);
    tx.gas_price = g.base_fee + random_in(rng, 0, 1'000'000'000);
    tx.calldata.resize(std::uniform_int_distribution<size_t>{0, 256}(rng));
    for (auto& b : tx.calldata)
        b = static_cast<uint8_t>(rng());
    const bool tight = std::bernoulli_distribution{tight_gas_probability}(rng);
    tx.gas_limit = tight ? std::uniform_int_distribution<Gas>{1, tight_gas_max}(rng) : ample_gas;
    tx.static_flag = false;
    return ctx;
}

std::string serialize(const ExecContext& ctx)
{
    json j;
    j["fork"] = fork_name(ctx.fork);
    j["rngSeed"] = ctx.rng_seed;
    json accounts = json::object();
    for (const auto& [addr, acc] : ctx.accounts)
    {
        json a;
        a["balance"] = q(acc.balance);
        a["nonce"] = acc.nonce;
        a["code"] = to_hex(acc.code);
        json storage = json::object();
        for (const auto& [k, v] : acc.storage)
            storage[q(k)] = q(v);
        a["storage"] = std::move(storage);
        a["warm"] = acc.warm;
        accounts[addr.hex()] = std::move(a);
    }
    j["accounts"] = std::move(accounts);
    const auto& g = ctx.global;
    j["global"] = {
        {"chainId", q(g.chain_id)},
        {"blockNumber", q(g.block_number)},
        {"timestamp", q(g.timestamp)},
        {"coinbase", g.coinbase.hex()},
        {"prevRandao", q(g.prev_randao)},
        {"gasLimit", q(g.gas_limit)},
        {"baseFee", q(g.base_fee)},
    };
    const auto& tx = ctx.tx;
    j["tx"] = {
        {"origin", tx.origin.hex()},
        {"caller", tx.caller.hex()},
        {"to", tx.to.hex()},
        {"callValue", q(tx.callvalue)},
        {"gasPrice", q(tx.gas_price)},
        {"calldata", to_hex(tx.calldata)},
        {"gasLimit", tx.gas_limit},
        {"static", tx.static_flag},
    };
    return j.dump();
}

ExecContext deserialize_context(std::string_view text)
{
    try
    {
        const auto j = json::parse(text);
        ExecContext ctx;
        ctx.fork = parse_fork(j.at("fork").get<std::string>());
        ctx.rng_seed = j.at("rngSeed").get<uint64_t>();
        for (const auto& [addr, a] : j.at("accounts").items())
        {
            Account acc;
            acc.balance = parse_q(a.at("balance"));
            acc.nonce = a.at("nonce").get<uint64_t>();
            acc.code = parse_bytes(a.at("code"));
            for (const auto& [k, v] : a.at("storage").items())
                acc.storage[*parse_quantity(k)] = parse_q(v);
            acc.warm = a.at("warm").get<bool>();
            ctx.accounts[parse_addr(addr)] = std::move(acc);
        }
        const auto& g = j.at("global");
        ctx.global.chain_id = parse_q(g.at("chainId"));
        ctx.global.block_number = parse_q(g.at("blockNumber"));
        ctx.global.timestamp = parse_q(g.at("timestamp"));
        ctx.global.coinbase = parse_addr(g.at("coinbase").get<std::string>());
        ctx.global.prev_randao = parse_q(g.at("prevRandao"));
        ctx.global.gas_limit = parse_q(g.at("gasLimit"));
        ctx.global.base_fee = parse_q(g.at("baseFee"));
        const auto& tx = j.at("tx");
        ctx.tx.origin = parse_addr(tx.at("origin").get<std::string>());
        ctx.tx.caller = parse_addr(tx.at("caller").get<std::string>());
        ctx.tx.to = parse_addr(tx.at("to").get<std::string>());
        ctx.tx.callvalue = parse_q(tx.at("callValue"));
        ctx.tx.gas_price = parse_q(tx.at("gasPrice"));
        ctx.tx.calldata = parse_bytes(tx.at("calldata"));
        ctx.tx.gas_limit = tx.at("gasLimit").get<Gas>();
        ctx.tx.static_flag = tx.at("static").get<bool>();
        return ctx;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error{std::string{"context: "} + e.what()};
    }
}

std::string context_key(const ExecContext& ctx)
{
    // Every engine asks for the key of the same context in turn; comparing is
    // far cheaper than serializing and hashing again.
    thread_local std::optional<std::pair<ExecContext, std::string>> last;
    if (last && last->first == ctx)
        return last->second;
    const auto s = serialize(ctx);
    auto key = keccak256_hex({reinterpret_cast<const uint8_t*>(s.data()), s.size()}).substr(0, 16);
    last.emplace(ctx, key);
    return key;
}

Word block_hash(const ExecContext& ctx, const Word& number)
{
    const auto& current = ctx.global.block_number;
    if (number >= current || current - number > 256)
        return 0;
    const auto be = word_to_be(number);
    const auto h = keccak256(be);
    return word_from_be(h);
}
}  // namespace opdiff

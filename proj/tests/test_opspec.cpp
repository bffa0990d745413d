// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/bytecode.hpp>
#include <opdiff/errors.hpp>
#include <opdiff/opspec.hpp>

#include <doctest.h>

#include <algorithm>

using namespace opdiff;

namespace
{
std::set<PathId> path_ids(uint8_t op)
{
    std::set<PathId> out;
    for (const auto& p : enumerate_paths(spec_for(op)))
        out.insert(p.id);
    return out;
}
}  // namespace

TEST_SUITE("opspec")
{
    TEST_CASE("path enumeration")
    {
        using enum PathId;
        CHECK(path_ids(op::BYTE) == std::set{Success, StackUnderflow, OutOfGas});
        CHECK(path_ids(op::EXP) == std::set{Success, StackUnderflow, OutOfGas});
        CHECK(path_ids(op::STOP) == std::set{Success});
        CHECK(path_ids(op::JUMP).contains(InvalidJumpdest));
        CHECK(path_ids(op::SSTORE).contains(WriteInStatic));
        CHECK(path_ids(op::PUSH1) == std::set{Success, StackOverflow, OutOfGas});
        CHECK(path_ids(op::INVALID) == std::set{InvalidOpcode});

        // Underflow is one path however many pops can fail.
        const auto& call = enumerate_paths(spec_for(op::CALL));
        CHECK(std::count_if(call.begin(), call.end(), [](const SpecPath& p) { return p.id == StackUnderflow; }) == 1);
    }

    TEST_CASE("every defined opcode has a spec whose paths start with its success case")
    {
        for (const auto op : defined_opcodes())
        {
            const auto& spec = spec_for(op);
            CAPTURE(spec.op.mnemonic);
            REQUIRE_FALSE(spec.paths.empty());
            if (op != op::INVALID)
                CHECK(spec.paths.front().id == PathId::Success);
            CHECK(&spec == &spec_for(op));
        }
        CHECK_THROWS_AS(spec_for(0x0c), UndefinedOpcode);
    }

    TEST_CASE("account access pricing")
    {
        const auto& balance = spec_for(op::BALANCE);
        CHECK(gas_cost(balance, {.warm = true}) == 100);
        CHECK(gas_cost(balance, {.warm = false}) == 2600);
        CHECK_THROWS_AS(gas_cost(balance, {}), MissingDynamicInput);
    }

    TEST_CASE("EXP pricing counts exponent bytes")
    {
        const auto& exp = spec_for(op::EXP);
        CHECK(gas_cost(exp, {.exponent = Word{0}}) == 10);
        CHECK(gas_cost(exp, {.exponent = Word{255}}) == 10 + 50);
        CHECK(gas_cost(exp, {.exponent = Word{256}}) == 10 + 2 * 50);
        CHECK(gas_cost(exp, {.exponent = ~Word{0}}) == 10 + 32 * 50);
    }

    TEST_CASE("memory expansion")
    {
        CHECK(memory_cost(0) == 0);
        CHECK(memory_cost(1) == 3);
        CHECK(memory_cost(32) == 32 * 3 + 2);
        CHECK(words_for_range(0, 0) == 0u);
        CHECK(words_for_range(1000, 0) == 0u);
        CHECK(words_for_range(0, 33) == 2u);
        CHECK_FALSE(words_for_range(~Word{0}, 1).has_value());

        const auto& mstore = spec_for(op::MSTORE);
        CHECK(gas_cost(mstore, {.memory = MemoryExpansion{0, 1}}) == 3 + 3);
        CHECK(gas_cost(mstore, {.memory = MemoryExpansion{2, 1}}) == 3);
        CHECK(gas_cost(mstore, {.memory = MemoryExpansion{0, std::nullopt}}) == gas_infinite);
    }

    TEST_CASE("storage pricing")
    {
        const auto& sstore = spec_for(op::SSTORE);
        CHECK(gas_cost(sstore, {.warm = false, .sstore = SstoreInputs{0, 0, 1}}) == 2100 + 20000);
        CHECK(gas_cost(sstore, {.warm = true, .sstore = SstoreInputs{5, 5, 6}}) == 2900);
        CHECK(gas_cost(sstore, {.warm = true, .sstore = SstoreInputs{5, 6, 7}}) == 100);
        CHECK(gas_cost(sstore, {.warm = true, .sstore = SstoreInputs{5, 5, 5}}) == 100);
        const auto& sload = spec_for(op::SLOAD);
        CHECK(gas_cost(sload, {.warm = false}) == 2100);
        CHECK(gas_cost(sload, {.warm = true}) == 100);
    }

    TEST_CASE("call and selfdestruct pricing")
    {
        const auto& call = spec_for(op::CALL);
        const MemoryExpansion none{0, 0};
        CHECK(gas_cost(call, {.warm = true, .memory = none, .value_transfer = false, .target_empty = true}) == 100);
        CHECK(gas_cost(call, {.warm = false, .memory = none, .value_transfer = true, .target_empty = true}) ==
              2600 + 9000 + 25000);
        CHECK(gas_cost(spec_for(op::CALLCODE),
                  {.warm = true, .memory = none, .value_transfer = true, .target_empty = true}) == 100 + 9000);
        const auto& sd = spec_for(op::SELFDESTRUCT);
        CHECK(gas_cost(sd, {.warm = true, .value_transfer = false, .target_empty = true}) == 5000);
        CHECK(gas_cost(sd, {.warm = false, .value_transfer = true, .target_empty = true}) == 5000 + 2600 + 25000);
    }
}

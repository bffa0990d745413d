// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/bytecode.hpp>
#include <opdiff/context.hpp>
#include <opdiff/engine.hpp>
#include <opdiff/errors.hpp>

#include <doctest.h>

using namespace opdiff;

namespace
{
ExecContext ample(uint64_t seed = 1)
{
    auto ctx = make_context(seed);
    ctx.tx.gas_limit = ample_gas;
    return ctx;
}

Trace run(std::string_view engine, const std::string& hex, const ExecContext& ctx = ample())
{
    return builtin_engine(engine)->execute(disassemble(*from_hex(hex)), ctx);
}

/// PUSH2 0x0100, PUSH1 2, EXP, then store and return the result.
const std::string exp_2_256 = "61010060020a60005260206000f3";
/// BALANCE of an address that no context warms.
const std::string cold_balance = "7312345678901234567890123456789012345678903100";
}  // namespace

TEST_SUITE("interpreter")
{
    TEST_CASE("EXP(2, 256) wraps to zero on the reference")
    {
        const auto t = run("reference", "61010060020a00");
        REQUIRE(t.final.halt == HaltReason::Success);
        CHECK(t.steps.back().stack.back() == 0);
        CHECK(run("reference", exp_2_256).final.return_data == Bytes(32, 0));
    }

    TEST_CASE("invalid jump target halts and consumes all gas")
    {
        const auto t = run("reference", "600356");
        CHECK(t.final.halt == HaltReason::InvalidJumpdest);
        CHECK(t.final.gas_used == ample_gas);
        CHECK(run("reference", "6003565b00").final.halt == HaltReason::Success);
    }

    TEST_CASE("PUSH1 at code end pushes zero and succeeds")
    {
        const auto t = run("reference", "60");
        CHECK(t.final.halt == HaltReason::Success);
        REQUIRE(t.steps.size() == 1);
        CHECK(run("reference", "6000").steps.size() == 1);
    }

    TEST_CASE("exceptional halts")
    {
        CHECK(run("reference", "01").final.halt == HaltReason::StackUnderflow);
        CHECK(run("reference", "0c").final.halt == HaltReason::InvalidOpcode);
        CHECK(run("reference", "fe").final.halt == HaltReason::InvalidOpcode);
        std::string overflow;
        for (int i = 0; i < 1025; ++i)
            overflow += "5f";
        CHECK(run("reference", overflow).final.halt == HaltReason::StackOverflow);
        CHECK(run("reference", overflow.substr(2)).final.halt == HaltReason::Success);

        auto stat = ample();
        stat.tx.static_flag = true;
        CHECK(run("reference", "6001600055", stat).final.halt == HaltReason::WriteInStatic);
        CHECK(run("reference", "6001600055", ample()).final.halt == HaltReason::Success);
    }

    TEST_CASE("REVERT returns data, keeps unused gas and rolls storage back")
    {
        const auto ctx = ample(3);
        const auto t = run("reference", "602a600155600a6000fd", ctx);
        CHECK(t.final.halt == HaltReason::Revert);
        CHECK(t.final.return_data.size() == 10);
        CHECK(t.final.gas_used < ample_gas);
        std::map<Word, Word> original;
        for (const auto& [k, v] : ctx.accounts.at(addresses::contract()).storage)
            if (v != 0)
                original.emplace(k, v);
        CHECK(t.final.storage_after == original);
        CHECK(run("reference", "602a600155", ctx).final.storage_after.at(1) == 0x2a);
    }

    TEST_CASE("steps are snapshots before execution")
    {
        const auto t = run("reference", "6001600201");
        REQUIRE(t.steps.size() == 3);
        CHECK(t.steps[0].stack.empty());
        CHECK(t.steps[2].stack == std::vector<Word>{1, 2});
        CHECK(t.steps[2].gas == ample_gas - 6);
        CHECK(t.steps[2].gas_cost == 3);
        CHECK(t.final.gas_used == 9);
    }

    TEST_CASE("fault catalog")
    {
        REQUIRE(fault_catalog().size() == 8);
        CHECK(find_fault("F3").target_opcode == op::BALANCE);
        CHECK_THROWS_AS(find_fault("F9"), UnknownFault);
        CHECK_THROWS_AS(builtin_engine("geth"), UnknownEngine);

        // F1: the result is not reduced.
        CHECK(run("mutant-F1", exp_2_256).final.return_data != Bytes(32, 0));
        // F2: JUMP skips the destination check.
        CHECK(run("mutant-F2", "600356").final.halt != HaltReason::InvalidJumpdest);
        // F3: cold account priced as warm.
        CHECK(run("reference", cold_balance).steps[1].gas_cost == 2600);
        CHECK(run("mutant-F3", cold_balance).steps[1].gas_cost == 100);
        // F4: PUSH1 advances one byte too far.
        CHECK(run("mutant-F4", "6001600200").steps[1].pc == 3);
        // F6: the engine itself fails.
        const auto sd = run("mutant-F6", "73" + std::string(40, '1') + "ff");
        CHECK(sd.final.halt == HaltReason::EngineError);
        CHECK(sd.final.error_detail.find("mnemonic") != std::string::npos);
        // F7: PREVRANDAO missing from the instruction set.
        CHECK(run("mutant-F7", "4400").final.halt == HaltReason::InvalidOpcode);
        CHECK(run("reference", "4400").final.halt == HaltReason::Success);
        // F8: MSIZE reports the unrounded extent.
        CHECK(run("reference", "60016003535900").steps.back().stack.back() == 32);
        CHECK(run("mutant-F8", "60016003535900").steps.back().stack.back() == 4);
    }

    TEST_CASE("every catalog mutant differs from the reference only on its target")
    {
        const auto reference = reference_engine()->handler_names();
        for (const auto& fault : fault_catalog())
        {
            const auto mutant = inject_fault(fault)->handler_names();
            CAPTURE(fault.fault_id);
            for (const auto& [op, name] : reference)
                if (op != fault.target_opcode)
                    CHECK(mutant.at(op) == name);
        }
        CHECK(reference.at(op::EXP) == "evm::handlers::op_exp");
    }
}

// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <opdiff/bytecode.hpp>
#include <opdiff/errors.hpp>

#include <doctest.h>

using namespace opdiff;

TEST_SUITE("bytecode")
{
    TEST_CASE("assemble")
    {
        CHECK(assemble({{"PUSH1", Bytes{0x03}}, {"JUMP", std::nullopt}}).bytes() == Bytes{0x60, 0x03, 0x56});
        const auto empty = assemble({});
        CHECK(empty.bytes().empty());
        CHECK(empty.instrs().empty());
        const auto p = assemble({{"PUSH32", Bytes(32, 0xff)}});
        CHECK(p.size() == 33);
        CHECK(p.instrs().size() == 1);
        CHECK_THROWS_AS(assemble({{"PUSH2", Bytes{0x01}}}), ImmediateLengthMismatch);
        CHECK_THROWS_AS(assemble({{"NOPE", std::nullopt}}), UnknownMnemonic);
        CHECK_THROWS_AS(assemble({{"PUSH0", std::nullopt}}, Fork::London), UnknownMnemonic);
    }

    TEST_CASE("disassemble")
    {
        const Bytes jump{0x60, 0x03, 0x56};
        const auto p = disassemble(jump);
        REQUIRE(p.instrs().size() == 2);
        CHECK(p.instrs()[0].info.mnemonic == "PUSH1");
        CHECK(p.instrs()[0].immediate == Bytes{0x03});
        CHECK(p.instrs()[1].info.mnemonic == "JUMP");
        CHECK(p.jumpdests().empty());

        const Bytes hidden{0x60, 0x5b, 0x56};
        CHECK(disassemble(hidden).jumpdests().empty());
        const Bytes real{0x5b, 0x00};
        CHECK(disassemble(real).jumpdests() == std::set<size_t>{0});

        const Bytes truncated{0x61, 0x01};
        CHECK(disassemble(truncated).has_truncated_immediate());
        const Bytes undefined{0x0c};
        CHECK_FALSE(disassemble(undefined).instrs()[0].info.defined);
    }

    TEST_CASE("listing round trip")
    {
        const Bytes code{0x60, 0x2a, 0x5b, 0x0c, 0x00};
        const auto p = disassemble(code);
        CHECK(assemble(to_listing(p)).bytes() == code);
        CHECK(assemble(parse_listing(format_listing(p))).bytes() == code);
    }

    TEST_CASE("valid jump targets")
    {
        const Bytes a{0x5b, 0x60, 0x00, 0x56};
        CHECK(valid_jump_targets(disassemble(a)) == std::set<size_t>{0});
        const Bytes b{0x60, 0x03, 0x56};
        CHECK(valid_jump_targets(disassemble(b)).empty());
        const Bytes c{0x61, 0x5b, 0x5b, 0x5b};
        CHECK(valid_jump_targets(disassemble(c)) == std::set<size_t>{3});
    }

    TEST_CASE("jump targets agree with a naive scan on every short program")
    {
        // Every program of up to two bytes, then every program of up to four
        // bytes over an alphabet of the bytes that matter to the analysis.
        size_t programs = 0;
        const auto check = [&](const Bytes& code) {
            ++programs;
            const auto got = valid_jump_targets(disassemble(code));
            if (got != oracle::naive_jumpdests(code))
                FAIL_CHECK("mismatch on 0x" << to_hex(code));
        };
        check({});
        for (int a = 0; a < 256; ++a)
        {
            check({uint8_t(a)});
            for (int b = 0; b < 256; ++b)
                check({uint8_t(a), uint8_t(b)});
        }
        const uint8_t alphabet[] = {0x00, 0x5b, 0x5f, 0x60, 0x61, 0x62, 0x7f, 0xfe};
        for (size_t len = 3; len <= 4; ++len)
        {
            size_t combos = 1;
            for (size_t i = 0; i < len; ++i)
                combos *= std::size(alphabet);
            for (size_t n = 0; n < combos; ++n)
            {
                Bytes code;
                for (size_t k = 0, m = n; k < len; ++k, m /= std::size(alphabet))
                    code.push_back(alphabet[m % std::size(alphabet)]);
                check(code);
            }
        }
        CHECK(programs == 1 + 256 + 65536 + 512 + 4096);
    }

    TEST_CASE("opcode table lookups")
    {
        const auto byte = opcode_info(0x1a, Fork::Cancun);
        REQUIRE(byte);
        CHECK(byte->mnemonic == "BYTE");
        CHECK(byte->pops == 2);
        CHECK(byte->pushes == 1);
        CHECK_FALSE(opcode_info(0x5f, Fork::London).has_value());
        CHECK(opcode_info(0x5f, Fork::Shanghai).has_value());
        const auto stop = opcode_info(0x00, "cancun");
        REQUIRE(stop);
        CHECK(stop->pops == 0);
        CHECK(stop->pushes == 0);
        CHECK_THROWS_AS(opcode_info(0x00, "atlantis"), UnknownFork);
        CHECK(opcode_by_mnemonic("SELFDESTRUCT").byte == 0xff);
        CHECK_FALSE(opcode_info(0x5c, Fork::Shanghai).has_value());
    }
}

// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0

#include <opdiff/differ.hpp>
#include <opdiff/errors.hpp>
#include <opdiff/hex.hpp>

#include <doctest.h>

#include <atomic>

using namespace opdiff;

namespace
{
BytecodeProgram prog(std::string_view hex)
{
    return disassemble(*from_hex(hex));
}

ExecContext ctx_for(uint64_t seed)
{
    auto ctx = make_context(seed);
    ctx.tx.gas_limit = ample_gas;
    ctx.tx.static_flag = false;
    return ctx;
}

std::map<std::string, Trace> pair_of(const std::string& suspect, const BytecodeProgram& p, const ExecContext& ctx)
{
    return {{"reference", reference_engine()->execute(p, ctx)}, {suspect, builtin_engine(suspect)->execute(p, ctx)}};
}

const std::string cold_balance = "73" + std::string(40, '1') + "3100";

/// Returns a different storage write on every other call.
class FlakyEngine final : public Engine
{
public:
    const std::string& id() const noexcept override { return id_; }
    Trace execute(const BytecodeProgram& program, const ExecContext& ctx) const override
    {
        auto t = reference_engine()->execute(program, ctx);
        t.engine_id = id_;
        if (calls_++ % 2 == 0)
            t.final.return_data.push_back(0x42);
        return t;
    }

private:
    std::string id_ = "flaky";
    mutable std::atomic<int> calls_{0};
};
}  // namespace

TEST_SUITE("differ")
{
    TEST_CASE("identical engines never diverge")
    {
        for (uint64_t s = 0; s < 20; ++s)
        {
            const auto p = prog("600160020160005260206000f3");
            const auto t = reference_engine()->execute(p, ctx_for(s));
            CHECK(compare({{"reference", t}, {"copy", t}}, "reference").empty());
            CHECK(first_divergent_step(t, t).kind == StepDivergence::Kind::None);
        }
    }

    TEST_CASE("cold BALANCE mischarge is a gas divergence")
    {
        const auto p = prog(cold_balance);
        const auto ds = compare(pair_of("mutant-F3", p, ctx_for(1)), "reference");
        REQUIRE(ds.size() == 1);
        CHECK(ds[0].metric == Metric::GasUsage);
        CHECK(ds[0].engine_a == "reference");
        CHECK(ds[0].engine_b == "mutant-F3");
        CHECK(ds[0].step_index == std::optional<size_t>{1});
        CHECK(ds[0].detail.field == "gas_cost");
        CHECK(ds[0].detail.value_a == "2600");
        CHECK(ds[0].detail.value_b == "100");
        CHECK(ds[0].program_ref == program_key(p.bytes()));
    }

    TEST_CASE("EXP without reduction changes return data")
    {
        const auto ds = compare(pair_of("mutant-F1", prog("61010060020a60005260206000f3"), ctx_for(1)), "reference");
        REQUIRE_FALSE(ds.empty());
        CHECK(ds[0].metric == Metric::ReturnData);
        CHECK(ds[0].detail.field == "return_data");
        CHECK_FALSE(ds[0].step_index.has_value());
    }

    TEST_CASE("lockstep scan locates the first differing step")
    {
        const auto p = prog("6001600201600052");
        const auto ctx = ctx_for(3);
        const auto a = reference_engine()->execute(p, ctx);
        const auto b = builtin_engine("mutant-F4")->execute(p, ctx);
        const auto sd = first_divergent_step(a, b);
        CHECK(sd.kind == StepDivergence::Kind::Step);
        CHECK(sd.index == 1);
        REQUIRE_FALSE(sd.fields.empty());
        CHECK(sd.fields.front() == "pc");
        CHECK(is_pre_state_field("pc"));
        CHECK_FALSE(is_pre_state_field("gas_cost"));
    }

    TEST_CASE("an engine crash ends its trace early")
    {
        const auto p = prog("73" + std::string(40, '1') + "ff");
        const auto ctx = ctx_for(4);
        const auto a = reference_engine()->execute(p, ctx);
        const auto b = builtin_engine("mutant-F6")->execute(p, ctx);
        CHECK(b.final.halt == HaltReason::EngineError);
        const auto sd = first_divergent_step(a, b);
        CHECK(sd.kind == StepDivergence::Kind::Truncation);
        CHECK(sd.index == 1);
    }

    TEST_CASE("inputs must match")
    {
        const auto a = reference_engine()->execute(prog("00"), ctx_for(1));
        const auto b = reference_engine()->execute(prog("6000"), ctx_for(1));
        CHECK_THROWS_AS(compare({{"reference", a}, {"other", b}}, "reference"), MismatchedInputs);
        auto c = a;
        c.fork = Fork::Shanghai;
        CHECK_THROWS_AS(compare({{"reference", a}, {"other", c}}, "reference"), ConfigError);
    }

    TEST_CASE("reproduction from stored artifacts")
    {
        const auto p = prog(cold_balance);
        const auto ctx = ctx_for(1);
        MemoryStore store;
        store.put(p.bytes());
        store.put(ctx);
        const auto ds = compare(pair_of("mutant-F3", p, ctx), "reference");
        REQUIRE(ds.size() == 1);
        const std::map<std::string, EnginePtr> engines{
            {"reference", reference_engine()}, {"mutant-F3", builtin_engine("mutant-F3")}};
        const auto r = reproduce(ds[0], engines, store);
        CHECK(r.confirmed);
        REQUIRE(r.fresh);
        CHECK(*r.fresh == ds[0]);

        store.erase_program(ds[0].program_ref);
        CHECK_THROWS_AS(reproduce(ds[0], engines, store), MissingArtifacts);
    }

    TEST_CASE("a nondeterministic engine is not confirmed")
    {
        const auto p = prog("600160020160005260206000f3");
        const auto ctx = ctx_for(2);
        auto flaky = std::make_shared<FlakyEngine>();
        MemoryStore store;
        store.put(p.bytes());
        store.put(ctx);
        const auto ds = compare(
            {{"reference", reference_engine()->execute(p, ctx)}, {"flaky", flaky->execute(p, ctx)}}, "reference");
        REQUIRE(ds.size() == 1);
        const std::map<std::string, EnginePtr> engines{{"reference", reference_engine()}, {"flaky", flaky}};
        CHECK_FALSE(reproduce(ds[0], engines, store).confirmed);
    }

    TEST_CASE("directory store round trip")
    {
        const auto root = std::filesystem::temp_directory_path() / "opdiff-store-test";
        std::filesystem::remove_all(root);
        DirectoryStore store{root};
        const auto ctx = make_context(7);
        const Bytes code{0x60, 0x01};
        const auto pk = store.put(code);
        const auto ck = store.put(ctx);
        CHECK(store.program(pk) == code);
        CHECK(store.context(ck) == ctx);
        CHECK_FALSE(store.program("0000000000000000").has_value());
        std::filesystem::remove_all(root);
    }

    TEST_CASE("metric names")
    {
        CHECK(metric_name(Metric::GasUsage) == "GAS_USAGE");
        CHECK(parse_metric("STORAGE") == Metric::Storage);
        CHECK_FALSE(parse_metric("gas").has_value());
    }
}

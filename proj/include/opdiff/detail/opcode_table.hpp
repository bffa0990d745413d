// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/bytecode.hpp>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace opdiff::detail
{
extern const std::string_view opcode_table_text;

struct TableRow
{
    OpInfo info;
    uint64_t static_gas = 0;
    std::string dynamic_rule;
    std::vector<std::string> extra_paths;
};

/// Parses a table in the data/opcodes.tsv schema. Throws Error with the line number on bad rows.
std::vector<TableRow> parse_opcode_table(std::string_view text);

/// The built-in table, indexed by byte.
const std::array<std::optional<TableRow>, 256>& builtin_table();
}  // namespace opdiff::detail

// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/trace.hpp>

#include <string>
#include <string_view>

namespace opdiff
{
/// JSON-lines rendering: one object per step, then the final summary object.
/// Every line ends with '\n'.
std::string to_jsonl(const Trace& trace);

/// Parses the step and summary lines of a JSON-lines trace. Metadata fields
/// (engine_id, program_key, context_key, fork) are left default.
/// Throws TraceParseError naming the 1-based line number.
Trace parse_jsonl(std::string_view text);

/// Like parse_jsonl, but malformed input becomes an ENGINE_ERROR trace whose
/// error_detail holds the parse diagnostic and the raw capture.
Trace parse_jsonl_lenient(std::string_view text);
}  // namespace opdiff

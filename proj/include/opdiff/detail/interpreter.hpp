// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <opdiff/engine.hpp>

namespace opdiff::detail
{
/// Built-in interpreter; `fault == nullptr` gives the reference behaviour.
EnginePtr make_interpreter(std::string id, const FaultSpec* fault);
}  // namespace opdiff::detail

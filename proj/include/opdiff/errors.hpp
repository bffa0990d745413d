// opdiff: differential testing for EVM implementations
// Copyright 2026 The opdiff Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace opdiff
{
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

#define OPDIFF_ERROR(Name)          \
    class Name : public Error       \
    {                               \
    public:                         \
        using Error::Error;         \
    }

OPDIFF_ERROR(UnknownMnemonic);
OPDIFF_ERROR(ImmediateLengthMismatch);
OPDIFF_ERROR(UnknownFork);
OPDIFF_ERROR(UndefinedOpcode);
OPDIFF_ERROR(MissingDynamicInput);
OPDIFF_ERROR(UnsupportedOpcode);
OPDIFF_ERROR(AdapterUnavailable);
OPDIFF_ERROR(UnknownFault);
OPDIFF_ERROR(UnknownEngine);
OPDIFF_ERROR(MismatchedInputs);
OPDIFF_ERROR(MissingArtifacts);
OPDIFF_ERROR(NotReproducible);
OPDIFF_ERROR(NoDivergence);
OPDIFF_ERROR(EngineUnhealthy);
OPDIFF_ERROR(ConfigError);
OPDIFF_ERROR(IoFailure);
OPDIFF_ERROR(SpawnFailure);
OPDIFF_ERROR(TraceParseError);

#undef OPDIFF_ERROR
}  // namespace opdiff

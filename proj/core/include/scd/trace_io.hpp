// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scd/decode.hpp"

namespace scd {

/// One trace as a JSON-lines record with a fixed field order:
///   {"iter":..,"drafted":[..],"uniforms":[..],"k":..,"emitted":[..],
///    "entropy_amateur":[..],"entropy_expert":[..],"bonus":..}
/// Per-position distributions are never serialized.
std::string trace_to_jsonl(const IterationTrace& trace);

void write_traces(std::ostream& out, const std::vector<IterationTrace>& traces);

/// Parse one JSONL line back into a trace (distributions stay empty).
IterationTrace trace_from_jsonl(const std::string& line);

std::vector<IterationTrace> read_traces(const std::string& path);

}  // namespace scd

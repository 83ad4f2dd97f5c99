// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#include "scd/trace_io.hpp"

#include <fstream>
#include <ostream>

#include <json.hpp>

#include "scd/errors.hpp"

namespace scd {

namespace {
using ordered_json = nlohmann::ordered_json;
}

std::string trace_to_jsonl(const IterationTrace& trace) {
  ordered_json line;
  line["iter"] = trace.iter;
  line["drafted"] = trace.drafted;
  line["uniforms"] = trace.uniforms;
  line["k"] = trace.k;
  line["emitted"] = trace.emitted;
  line["entropy_amateur"] = trace.entropy_amateur;
  line["entropy_expert"] = trace.entropy_expert;
  line["bonus"] = trace.bonus;
  return line.dump();
}

void write_traces(std::ostream& out, const std::vector<IterationTrace>& traces) {
  for (const auto& trace : traces) out << trace_to_jsonl(trace) << '\n';
}

IterationTrace trace_from_jsonl(const std::string& line) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw config_error(std::string("bad trace line: ") + e.what());
  }
  IterationTrace trace;
  try {
    trace.iter = doc.at("iter").get<int>();
    trace.drafted = doc.at("drafted").get<std::vector<TokenId>>();
    trace.uniforms = doc.at("uniforms").get<std::vector<double>>();
    trace.k = doc.at("k").get<int>();
    trace.emitted = doc.at("emitted").get<std::vector<TokenId>>();
    trace.entropy_amateur = doc.at("entropy_amateur").get<std::vector<double>>();
    trace.entropy_expert = doc.at("entropy_expert").get<std::vector<double>>();
    trace.bonus = doc.at("bonus").get<bool>();
  } catch (const ordered_json::exception& e) {
    throw config_error(std::string("trace line misses a field: ") + e.what());
  }
  return trace;
}

std::vector<IterationTrace> read_traces(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open trace file: " + path);
  std::vector<IterationTrace> traces;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    traces.push_back(trace_from_jsonl(line));
  }
  return traces;
}

}  // namespace scd

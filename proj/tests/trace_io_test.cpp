// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scd Authors

#include <doctest.h>

#include <sstream>

#include "scd/errors.hpp"
#include "scd/trace_io.hpp"

using namespace scd;

TEST_CASE("trace jsonl keeps the fixed field order") {
  IterationTrace trace;
  trace.iter = 3;
  trace.drafted = {1, 0, 2, 1};
  trace.uniforms = {0.25, 0.5, 0.75, 0.125};
  trace.k = 2;
  trace.emitted = {1, 2};
  trace.entropy_amateur = {1.0, 0.5, 0.25, 0.125};
  trace.entropy_expert = {0.75, 0.5, 0.25, 0.125};
  trace.bonus = false;

  const auto line = trace_to_jsonl(trace);
  CHECK(line ==
        R"({"iter":3,"drafted":[1,0,2,1],"uniforms":[0.25,0.5,0.75,0.125],"k":2,)"
        R"("emitted":[1,2],"entropy_amateur":[1.0,0.5,0.25,0.125],)"
        R"("entropy_expert":[0.75,0.5,0.25,0.125],"bonus":false})");
}

TEST_CASE("property: jsonl round trip preserves every serialized field") {
  // Uniforms are exact dyadic doubles above; here use awkward ones too.
  IterationTrace trace;
  trace.iter = 7;
  trace.drafted = {0, 1};
  trace.uniforms = {0.1234567890123456, 0.9876543210987654};
  trace.k = 3;
  trace.emitted = {0, 1, 0};
  trace.entropy_amateur = {1.0986122886681098, 0.6931471805599453};
  trace.entropy_expert = {0.5004024235381879, 1.3862943611198906};
  trace.bonus = true;

  const auto back = trace_from_jsonl(trace_to_jsonl(trace));
  CHECK(back.iter == trace.iter);
  CHECK(back.drafted == trace.drafted);
  CHECK(back.uniforms == trace.uniforms);  // shortest-round-trip doubles
  CHECK(back.k == trace.k);
  CHECK(back.emitted == trace.emitted);
  CHECK(back.entropy_amateur == trace.entropy_amateur);
  CHECK(back.entropy_expert == trace.entropy_expert);
  CHECK(back.bonus == trace.bonus);
}

TEST_CASE("malformed trace lines are rejected") {
  CHECK_THROWS_AS(trace_from_jsonl("not json"), config_error);
  CHECK_THROWS_AS(trace_from_jsonl(R"({"iter":1})"), config_error);
}

TEST_CASE("write_traces emits one line per iteration") {
  std::vector<IterationTrace> traces(3);
  for (int i = 0; i < 3; ++i) traces[static_cast<std::size_t>(i)].iter = i;
  std::ostringstream out;
  write_traces(out, traces);
  int lines = 0;
  for (char ch : out.str()) lines += ch == '\n';
  CHECK(lines == 3);
}

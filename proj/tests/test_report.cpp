#include "doctest.h"
#include "json.hpp"
#include "pnorm/report.hpp"

using namespace pnorm;

TEST_CASE("report JSON uses the field names and round trips") {
  SolveReport r{3, 7, {4, 2, 1}, {8, 4}, 0.125};
  nlohmann::json j = r;
  for (const char* key : {"iterations", "oracle_calls", "objective_trace", "nu_trace", "wall_time"})
    CHECK(j.contains(key));
  auto back = j.get<SolveReport>();
  CHECK(back.iterations == 3);
  CHECK(back.oracle_calls == 7);
  CHECK(back.objective_trace == r.objective_trace);
  CHECK(back.nu_trace == r.nu_trace);
  CHECK(back.wall_time == 0.125);
}

TEST_CASE("fingerprint ignores wall time only") {
  SolveReport a{1, 2, {3}, {4}, 0.5};
  SolveReport b = a;
  b.wall_time = 9;
  CHECK(deterministic_fingerprint(a) == deterministic_fingerprint(b));
  b.oracle_calls = 3;
  CHECK(deterministic_fingerprint(a) != deterministic_fingerprint(b));
}

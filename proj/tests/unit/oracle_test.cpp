#include "doctest.h"

#include "leakscan/oracle.hpp"
#include "support/fixtures.hpp"
#include "support/harness.hpp"

using namespace leakscan;

namespace {

std::vector<ConcreteRun> runs_of(const Program &p, const std::string &fn,
                                 OracleLimits lim = {}) {
  auto f = p.find_function(fn);
  REQUIRE(f);
  return enumerate_runs(p, *f, lim);
}

std::uint32_t line_of(const Program &p, Span s) { return p.sources.line_col(s).line; }

} // namespace

TEST_CASE("one unknown branch splits the runs in two") {
  Program p = fixtures::load_source(R"(
void f(int c)
{
  int *p = malloc(1);
  if (c)
    return;
  free(p);
}
)");
  std::vector<ConcreteRun> runs = runs_of(p, "f");
  // c ranges over {-1, 0, 1, 2}; only the zero run reaches the free
  REQUIRE(runs.size() == 4);
  std::set<Span> leaks = oracle_leak_sites(runs);
  REQUIRE(leaks.size() == 1);
  CHECK(line_of(p, *leaks.begin()) == 4);
  for (const ConcreteRun &r : runs) {
    CHECK(r.end == RunEnd::Returned);
    REQUIRE(r.inputs.size() == 1);
    CHECK(r.verdicts.at(*leaks.begin()) == (r.inputs[0] != 0));
  }
}

TEST_CASE("straight-line code has one run") {
  Program p = fixtures::load_source("void f(void) { int *p = malloc(4); free(p); }");
  std::vector<ConcreteRun> runs = runs_of(p, "f");
  CHECK(runs.size() == 1);
  CHECK(oracle_leak_sites(runs).empty());
}

TEST_CASE("returned and stored objects do not leak") {
  Program p = fixtures::load_source(R"(
int *g = NULL;
int *ret(void) { return malloc(4); }
void out(int **o) { *o = malloc(4); }
void glob(void) { g = malloc(4); }
)");
  for (const char *fn : {"ret", "out", "glob"}) {
    CAPTURE(fn);
    CHECK(oracle_leak_sites(runs_of(p, fn)).empty());
  }
}

TEST_CASE("null dereference ends a run as crashed") {
  Program p = fixtures::load_source(R"(
int f(int *q)
{
  return *q;
}
)");
  std::vector<ConcreteRun> runs = runs_of(p, "f");
  std::size_t crashed = 0;
  for (const ConcreteRun &r : runs)
    crashed += r.end == RunEnd::Crashed;
  CHECK(crashed == 1);
  CHECK(runs.size() >= 2);
}

TEST_CASE("freeing a parent frees its inner allocations") {
  Program p = fixtures::load_source(R"(
struct S { int *inner; };
void f(void)
{
  struct S *s = malloc(sizeof(struct S));
  s->inner = malloc(4);
  free(s);
}
)");
  CHECK(oracle_leak_sites(runs_of(p, "f")).empty());
}

TEST_CASE("the run budget reports divergence") {
  Program p = fixtures::load_source(R"(
void f(int a, int b, int c, int d, int e, int g)
{
  if (a) a = 1;
  if (b) b = 1;
  if (c) c = 1;
  if (d) d = 1;
  if (e) e = 1;
  if (g) g = 1;
}
)");
  OracleLimits lim;
  lim.max_runs = 10;
  auto f = p.find_function("f");
  CHECK_THROWS_AS(enumerate_runs(p, *f, lim), Diverged);
}

TEST_CASE("frame_ack leaks only when decoding fails") {
  Program p = fixtures::load_project("projects/quic_ack");
  std::vector<ConcreteRun> runs = runs_of(p, "frame_ack");
  std::set<Span> leaks = oracle_leak_sites(runs);
  REQUIRE(leaks.size() == 1);
  for (const ConcreteRun &r : runs) {
    auto it = r.verdicts.find(*leaks.begin());
    if (it == r.verdicts.end() || !it->second)
      continue;
    // the leaking runs never reach the free
    CHECK(r.end == RunEnd::Returned);
  }
}

TEST_CASE("compare classifies sites") {
  Program p = fixtures::load_source(R"(
void f(int c)
{
  int *p = malloc(1);
  int *q = malloc(1);
  free(q);
  if (c)
    return;
  free(p);
}
)");
  std::vector<ConcreteRun> runs = runs_of(p, "f");
  Span leak = *oracle_leak_sites(runs).begin();
  Span fine;
  for (const auto &[s, v] : runs[0].verdicts)
    if (s != leak)
      fine = s;

  DiffReport exact = compare({{leak, false}}, runs);
  CHECK(exact.agree.size() == 1);
  CHECK(exact.gate_passes());

  DiffReport missed = compare({}, runs);
  CHECK(missed.false_negatives.size() == 1);
  CHECK_FALSE(missed.gate_passes());

  DiffReport spurious = compare({{leak, false}, {fine, false}}, runs);
  CHECK(spurious.false_positives.size() == 1);
  CHECK_FALSE(spurious.gate_passes());

  DiffReport tolerated = compare({{leak, false}, {fine, true}}, runs);
  CHECK(tolerated.gate_passes());
}

TEST_CASE("corpus sidecars agree with the oracle") {
  harness::CorpusOptions opt;
  opt.with_oracle = true;
  harness::CorpusRun run = harness::run_corpus(opt);
  CHECK(run.cases >= 40);
  for (const harness::Variant &v : run.variants) {
    CAPTURE(v.name);
    CHECK(v.oracle == v.expected);
    CHECK(v.positive == !v.expected.empty());
  }
}

TEST_CASE("random programs: no missed leak and no confirmed false positive") {
  harness::DiffRun d = harness::differential(1000, 100);
  for (const std::string &f : d.failures)
    FAIL_CHECK(f);
  CHECK(d.programs == 100);
  CHECK(d.false_negatives == 0);
  CHECK(d.sat_false_positives == 0);
  CHECK(d.agree > 0);
}

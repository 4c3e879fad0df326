#include "doctest.h"

#include "leakscan/graphs.hpp"
#include "leakscan/parser.hpp"
#include "support/fixtures.hpp"
#include "support/progen.hpp"

#include <algorithm>
#include <random>

using namespace leakscan;

namespace {

Cfg cfg_of(const Program &p, const char *name) {
  return build_cfg(*p.function_named(name)->def);
}

std::size_t count_edges(const Cfg &cfg, EdgeKind k) {
  return std::count_if(cfg.edges.begin(), cfg.edges.end(),
                       [&](const CfgEdge &e) { return e.kind == k; });
}

bool block_calls(const Cfg &cfg, BlockId b, const std::string &callee) {
  bool found = false;
  for (const BlockItem &it : cfg.block(b).items)
    if (it.expr)
      for_each_expr(*it.expr, [&](const Expr &e) {
        found |= e.kind == ExprKind::Call && e.name == callee;
      });
  return found;
}

} // namespace

TEST_CASE("build_cfg: empty body") {
  Program p = fixtures::load_source("void f() { }");
  Cfg cfg = cfg_of(p, "f");
  CHECK(cfg.interior_count() == 0);
  REQUIRE(cfg.edges.size() == 1);
  CHECK(cfg.edges[0].from == cfg.entry);
  CHECK(cfg.edges[0].to == cfg.exit);
}

TEST_CASE("build_cfg: while loop has three blocks and one back-edge") {
  Program p = fixtures::load_source("void f(int c) { while (c) { c = c - 1; } }");
  Cfg cfg = cfg_of(p, "f");
  CHECK(cfg.interior_count() == 3);
  CHECK(count_edges(cfg, EdgeKind::LoopBack) == 1);
  CHECK(cfg.back_edge_count() == 1);
  const CfgEdge &back = *std::find_if(
      cfg.edges.begin(), cfg.edges.end(),
      [](const CfgEdge &e) { return e.kind == EdgeKind::LoopBack; });
  CHECK(cfg.block(back.to).term == Terminator::Branch);
  CHECK(back.loop_exit >= 0);
  CHECK(cfg.dead_blocks().empty());
}

TEST_CASE("build_cfg: loop body with an if still has a single back-edge") {
  Program p = fixtures::load_source(
      "void f(int c) { for (int i = 0; i < c; i++) { if (i == 2) continue; c = c - 1; } }");
  Cfg cfg = cfg_of(p, "f");
  CHECK(cfg.back_edge_count() == 1);
}

TEST_CASE("build_cfg: dec_alloc gotos share the cleanup block") {
  Program p = fixtures::load_project("projects/ffmpeg_dec");
  Cfg cfg = cfg_of(p, "dec_alloc");
  std::vector<BlockId> targets;
  for (const CfgEdge &e : cfg.edges)
    if (e.kind == EdgeKind::Goto)
      targets.push_back(e.to);
  REQUIRE(targets.size() == 2);
  CHECK(targets[0] == targets[1]);
  CHECK(block_calls(cfg, targets[0], "dec_free"));
  CHECK(cfg.back_edge_count() == 0);
}

TEST_CASE("build_cfg: every return block reaches exit") {
  for (const char *dir : {"projects/openssl_addr", "projects/ffmpeg_dec", "projects/quic_ack", "projects/redis_acl"}) {
    Program p = fixtures::load_project(dir);
    for (FunctionId id : p.defined_functions()) {
      Cfg cfg = build_cfg(*p.function(id).def);
      for (const BasicBlock &b : cfg.blocks)
        if (b.term == Terminator::Return) {
          REQUIRE(b.out.size() == 1);
          CHECK(cfg.edge(b.out[0]).to == cfg.exit);
        }
      for (const CfgEdge &e : cfg.edges)
        CHECK(e.to >= 0);
    }
  }
}

TEST_CASE("build_cfg: short-circuit conditions split into atomic branches") {
  Program p = fixtures::load_source(
      "int f(int a, int b) { if (a < 0 || !(b > 1 && a == 2)) return 1; return 0; }");
  Cfg cfg = cfg_of(p, "f");
  std::size_t branches = 0;
  for (const BasicBlock &b : cfg.blocks)
    if (b.term == Terminator::Branch) {
      ++branches;
      CHECK(b.term_expr->kind == ExprKind::Binary);
      CHECK(b.term_expr->bin != BinOp::LogAnd);
      CHECK(b.term_expr->bin != BinOp::LogOr);
    }
  CHECK(branches == 3);
  CHECK(count_edges(cfg, EdgeKind::TrueArm) == 3);
  CHECK(count_edges(cfg, EdgeKind::FalseArm) == 3);
}

TEST_CASE("build_cfg: switch with fallthrough and implicit default") {
  Program p = fixtures::load_source(R"(
int f(int k) {
  int r = 0;
  switch (k) {
  case 1:
    r = 1;
  case 2:
    r = r + 2;
    break;
  case -3:
    return 9;
  }
  return r;
})");
  Cfg cfg = cfg_of(p, "f");
  CHECK(count_edges(cfg, EdgeKind::SwitchCase) == 3);
  CHECK(count_edges(cfg, EdgeKind::SwitchDefault) == 1);
  std::vector<std::int64_t> values;
  for (const CfgEdge &e : cfg.edges)
    if (e.kind == EdgeKind::SwitchCase)
      values.push_back(e.case_value);
  CHECK(values == std::vector<std::int64_t>{1, 2, -3});
  // case 1 falls through into case 2
  for (const CfgEdge &e : cfg.edges)
    if (e.kind == EdgeKind::SwitchCase && e.case_value == 1) {
      const BasicBlock &b = cfg.block(e.to);
      REQUIRE(b.out.size() == 1);
      const CfgEdge &next = cfg.edge(b.out[0]);
      CHECK(next.kind == EdgeKind::Unconditional);
      CHECK(cfg.block(next.to).in.size() == 2);
    }
}

TEST_CASE("build_cfg: code after return is dead") {
  Program p = fixtures::load_source("int f() { return 1; f(); }");
  Cfg cfg = cfg_of(p, "f");
  CHECK(cfg.dead_blocks().size() == 1);
}

TEST_CASE("build_cfg: backward goto forming a cycle is tagged") {
  Program p = fixtures::load_source(
      "void f(int n) { again: n = n - 1; if (n > 0) goto again; }");
  Cfg cfg = cfg_of(p, "f");
  CHECK(cfg.back_edge_count() == 1);
  for (const CfgEdge &e : cfg.edges)
    if (e.back_edge) {
      CHECK(e.kind == EdgeKind::Goto);
      CHECK(e.loop_exit == -1);
    }
}

TEST_CASE("build_cfg: generated programs are acyclic and fully reachable from entry") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    auto gen = progen::generate(rng);
    Program p = load_program(gen.files);
    for (FunctionId id : p.defined_functions()) {
      Cfg cfg = build_cfg(*p.function(id).def);
      CHECK(cfg.back_edge_count() == 0);
    }
  }
}

TEST_CASE("build_call_graph: IPAddressOrRange_new chain") {
  Program p = fixtures::load_project("projects/openssl_addr");
  CallGraph cg = build_call_graph(p);
  std::vector<std::string> chain{"make_addressPrefix", "IPAddressOrRange_new",
                                 "ASN1_item_new", "ASN1_item_ex_new",
                                 "asn1_item_ex_new", "calloc"};
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    CAPTURE(chain[i]);
    auto callees = cg.callees_of(*p.find_function(chain[i]));
    CHECK(std::find(callees.begin(), callees.end(),
                    *p.find_function(chain[i + 1])) != callees.end());
  }
  for (std::size_t i = 1; i < cg.edges.size(); ++i)
    CHECK(cg.edges[i - 1].site < cg.edges[i].site);
}

TEST_CASE("build_call_graph: no calls, recursion") {
  CHECK(build_call_graph(fixtures::load_source("int f() { return 0; }")).edges.empty());
  Program p = fixtures::load_source("int f(int n) { return f(n - 1); }");
  CallGraph cg = build_call_graph(p);
  REQUIRE(cg.edges.size() == 1);
  CHECK(cg.edges[0].caller == cg.edges[0].callee);
}

TEST_CASE("build_call_graph: one edge per call expression") {
  std::mt19937_64 rng(11);
  std::vector<Program> programs;
  for (const char *dir : {"projects/openssl_addr", "projects/ffmpeg_dec", "projects/quic_ack", "projects/redis_acl"})
    programs.push_back(fixtures::load_project(dir));
  for (int i = 0; i < 50; ++i)
    programs.push_back(load_program(progen::generate(rng).files));
  for (const Program &p : programs) {
    CallGraph cg = build_call_graph(p);
    for (FunctionId id : p.defined_functions()) {
      std::size_t calls = 0;
      for_each_expr(*p.function(id).def->body,
                    [&](const Expr &e) { calls += e.kind == ExprKind::Call; });
      CHECK(cg.calls_from(id).size() == calls);
    }
  }
}

TEST_CASE("call graph DOT output names every node") {
  Program p = fixtures::load_project("projects/quic_ack");
  std::string dot = build_call_graph(p).to_dot(p);
  CHECK(dot.find("digraph") == 0);
  CHECK(dot.find("\"frame_ack\"") != std::string::npos);
  CHECK(dot.find("\"OPENSSL_zalloc\"") != std::string::npos);
}

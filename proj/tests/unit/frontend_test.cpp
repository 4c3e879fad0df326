#include "doctest.h"

#include "leakscan/lexer.hpp"
#include "leakscan/parser.hpp"
#include "leakscan/program.hpp"
#include "support/fixtures.hpp"
#include "support/progen.hpp"

#include <random>

using namespace leakscan;

namespace {

std::string kinds(const std::vector<Token> &toks) {
  std::string out;
  for (const Token &t : toks) {
    if (!out.empty())
      out += ", ";
    out += t.debug();
  }
  return out;
}

std::size_t count_kind(const Stmt &s, StmtKind k) {
  std::size_t n = 0;
  for_each_stmt(s, [&](const Stmt &x) { n += x.kind == k; });
  return n;
}

void check_spans_nested(const Expr &e) {
  for (const auto &k : e.kids) {
    CHECK(e.span.contains(k->span));
    check_spans_nested(*k);
  }
}

void check_spans_nested(const Stmt &s) {
  auto inside = [&](Span child) { CHECK(s.span.contains(child)); };
  if (s.expr) {
    inside(s.expr->span);
    check_spans_nested(*s.expr);
  }
  if (s.step)
    inside(s.step->span);
  if (s.init)
    inside(s.init->span);
  for (const auto &b : s.body) {
    inside(b->span);
    check_spans_nested(*b);
  }
}

} // namespace

TEST_CASE("tokenize: empty input is just the end marker") {
  auto toks = tokenize("", 0);
  REQUIRE(toks.size() == 1);
  CHECK(toks[0].is(TokenKind::End));
}

TEST_CASE("tokenize: declaration with call") {
  auto toks = tokenize("int *p = malloc(n);", 0);
  CHECK(kinds(toks) == "Kw(int), Star, Ident(p), Assign, Ident(malloc), "
                       "LParen, Ident(n), RParen, Semi, End");
}

TEST_CASE("tokenize: maximal munch and comments") {
  auto toks = tokenize("a->b /* x */ -- c >= d // tail\n!=", 0);
  CHECK(kinds(toks) == "Ident(a), Arrow, Ident(b), MinusMinus, Ident(c), "
                       "GreaterEq, Ident(d), NotEq, End");
}

TEST_CASE("tokenize: token text round-trips to the source") {
  std::string src = "struct S { int x; };\nint f(struct S *s) { return s->x + 0x1f; }";
  auto toks = tokenize(src, 3);
  std::uint32_t last_end = 0;
  for (const Token &t : toks) {
    CHECK(t.span.file == 3);
    CHECK(t.span.offset >= last_end);
    CHECK(src.substr(t.span.offset, t.span.length) == t.text);
    last_end = t.span.end();
  }
}

TEST_CASE("tokenize: errors carry a span") {
  try {
    tokenize("\"unterminated", 0);
    FAIL("expected LexError");
  } catch (const LexError &e) {
    CHECK(e.span().offset == 0);
  }
  CHECK_THROWS_AS(tokenize("int x; /* open", 0), LexError);
  CHECK_THROWS_AS(tokenize("int @x;", 0), LexError);
}

TEST_CASE("parse_unit: minimal function") {
  auto toks = tokenize("int f(){return 0;}", 0);
  Unit u = parse_unit(toks);
  REQUIRE(u.functions.size() == 1);
  const Function &f = *u.functions[0];
  CHECK(f.name == "f");
  REQUIRE(f.body->body.size() == 1);
  CHECK(f.body->body[0]->kind == StmtKind::Return);
}

TEST_CASE("parse_unit: dec_alloc") {
  auto src = fixtures::read("projects/ffmpeg_dec/ffmpeg_dec.mc");
  Unit u = parse_source(src, 0);
  const Function *dec_alloc = nullptr;
  for (const auto &f : u.functions)
    if (f->name == "dec_alloc")
      dec_alloc = f.get();
  REQUIRE(dec_alloc);
  CHECK(dec_alloc->params.size() == 3);
  std::size_t gotos = 0;
  for_each_stmt(*dec_alloc->body, [&](const Stmt &s) {
    gotos += s.kind == StmtKind::Goto && s.name == "fail";
  });
  CHECK(gotos == 2);
  CHECK(count_kind(*dec_alloc->body, StmtKind::Label) == 1);
}

TEST_CASE("parse_unit: errors") {
  CHECK_THROWS_AS(parse_source("int f( { }", 0), ParseError);
  CHECK_THROWS_AS(parse_source("int f() { goto nowhere; }", 0), ParseError);
  CHECK_THROWS_AS(parse_source("int f() { break; }", 0), ParseError);
  CHECK_THROWS_AS(parse_source("int f() { int x; int x; }", 0), ParseError);
  CHECK_THROWS_AS(parse_source("int f() { return a[1]; }", 0), ParseError);
  try {
    parse_source("int f() {\n  return 1 +;\n}", 0);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.span().offset == 22);
  }
}

TEST_CASE("parse_unit: locals and params are resolved, scopes nest") {
  Unit u = parse_source(R"(
int f(int a) {
  int x = a;
  { int x = 2; x = x + 1; }
  for (int i = 0; i < 3; i++) x = x + i;
  return x;
})",
                        0);
  const Function &f = *u.functions[0];
  CHECK(f.locals.size() == 3);
  std::vector<std::pair<std::string, int>> refs;
  for_each_expr(*f.body, [&](const Expr &e) {
    if (e.kind == ExprKind::Ident)
      refs.emplace_back(e.name, e.ref == RefKind::Param ? -1 : e.index);
  });
  // `x = x + 1` inside the nested block binds to slot 1, the final return to slot 0
  CHECK(refs.front() == std::make_pair(std::string("a"), -1));
  CHECK(refs.back() == std::make_pair(std::string("x"), 0));
  CHECK(std::count(refs.begin(), refs.end(), std::make_pair(std::string("x"), 1)) == 2);
}

TEST_CASE("round-trip: every project fixture re-parses to the same structure") {
  for (const char *path :
       {"projects/openssl_addr/v3_addr.mc", "projects/openssl_addr/tasn_new.mc",
        "projects/ffmpeg_dec/ffmpeg_dec.mc", "projects/quic_ack/quic_trace.mc",
        "projects/redis_acl/acl.mc"}) {
    CAPTURE(path);
    Unit a = parse_source(fixtures::read(path), 0);
    std::string printed = print_unit(a);
    Unit b = parse_source(printed, 0);
    CHECK(same_structure(a, b));
    CHECK(print_unit(b) == printed);
  }
}

TEST_CASE("round-trip: generated programs") {
  std::mt19937_64 rng(20261017);
  for (int i = 0; i < 200; ++i) {
    auto gen = progen::generate(rng);
    for (const auto &[path, text] : gen.files) {
      Unit a = parse_source(text, 0);
      Unit b = parse_source(print_unit(a), 0);
      REQUIRE(same_structure(a, b));
    }
  }
}

TEST_CASE("span fidelity: children lie within parents") {
  for (const char *path : {"projects/openssl_addr/v3_addr.mc", "projects/quic_ack/quic_trace.mc",
                           "projects/redis_acl/acl.mc"}) {
    Unit u = parse_source(fixtures::read(path), 0);
    for (const auto &f : u.functions)
      if (f->has_body()) {
        CHECK(f->span.contains(f->body->span));
        check_spans_nested(*f->body);
      }
  }
}

TEST_CASE("link_program: openssl_addr resolves across units") {
  Program p = fixtures::load_project("projects/openssl_addr");
  CHECK(p.units.size() == 2);
  CHECK(p.defined_functions().size() == 5);
  const FunctionInfo *ipa = p.function_named("IPAddressOrRange_new");
  REQUIRE(ipa);
  bool resolved = false;
  for_each_expr(*ipa->def->body, [&](const Expr &e) {
    if (e.kind == ExprKind::Call && e.name == "ASN1_item_new") {
      CHECK(e.ref == RefKind::Function);
      const FunctionInfo &callee = p.function(e.index);
      CHECK(callee.defined());
      CHECK(callee.unit->path.find("tasn_new") != std::string::npos);
      resolved = true;
    }
  });
  CHECK(resolved);
  CHECK(p.function_named("calloc")->kind == FunctionKind::Seed);
  auto ext = p.externals();
  CHECK(std::find(ext.begin(), ext.end(), "addr_expand") != ext.end());
}

TEST_CASE("link_program: single unit without calls has no externals") {
  std::vector<Unit> units;
  units.push_back(parse_source("int f(int a) { return a + 1; }", 0));
  Program p = link_program(std::move(units));
  CHECK(p.externals().empty());
  CHECK(p.defined_functions().size() == 1);
}

TEST_CASE("link_program: undefined callee becomes external") {
  std::vector<Unit> units;
  units.push_back(parse_source("int f() { return custom_alloc(4); }", 0));
  Program p = link_program(std::move(units));
  REQUIRE(p.function_named("custom_alloc"));
  CHECK(p.function_named("custom_alloc")->kind == FunctionKind::External);
}

TEST_CASE("link_program: reports every problem at once") {
  std::vector<Unit> units;
  units.push_back(parse_source("int g; int f() { return 1; }", 0));
  units.push_back(parse_source(
      "char *g; int f() { return 2; } int h() { return missing; }\n"
      "struct S { int a; }; int k(struct S *s) { return s->b; }",
      1));
  try {
    link_program(std::move(units));
    FAIL("expected LinkError");
  } catch (const LinkError &e) {
    CHECK(e.problems().size() == 4);
  }
}

TEST_CASE("resolution totality on fixtures") {
  for (const char *dir : {"projects/openssl_addr", "projects/ffmpeg_dec", "projects/quic_ack", "projects/redis_acl"}) {
    Program p = fixtures::load_project(dir);
    for (FunctionId id : p.defined_functions())
      for_each_expr(*p.function(id).def->body, [&](const Expr &e) {
        if (e.kind == ExprKind::Ident)
          CHECK(e.ref != RefKind::Unresolved);
        if (e.kind == ExprKind::Call)
          CHECK(e.index >= 0);
      });
  }
}

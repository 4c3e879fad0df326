#include "doctest.h"

#include "leakscan/heapmodel.hpp"
#include "support/ltl_tables.hpp"

#include <functional>

using namespace leakscan;

namespace {

Span at(std::uint32_t offset) { return Span{0, offset, 1}; }

} // namespace

TEST_CASE("allocate") {
  Heap h;
  ObjectId a = allocate(h, at(1));
  ObjectId b = allocate(h, at(2));
  CHECK(a == 0);
  CHECK(b == 1);
  CHECK(h.at(a).refcount == 1);
  CHECK(h.at(a).state == ObjState::Allocated);
  CHECK(h.at(a).owners == std::set<Owner>{Owner::caller()});
  CHECK_FALSE(h.at(a).escaped);
  CHECK(h.trace.events.size() == 2);
}

TEST_CASE("free_object and the cascade") {
  Heap h;
  ObjectId p = allocate(h, at(1));
  free_object(h, p, at(2));
  CHECK(h.at(p).state == ObjState::Freed);
  CHECK(h.at(p).refcount == 0);
  CHECK_FALSE(h.at(p).owners.count(Owner::caller()));

  SUBCASE("child at refcount 1 is freed with its parent") {
    Heap g;
    ObjectId parent = allocate(g, at(1));
    ObjectId child = allocate(g, at(2));
    attach_inner(g, parent, "frame", child, at(3));
    free_object(g, parent, at(4));
    CHECK(g.at(child).state == ObjState::Freed);
    CHECK(g.at(child).refcount == 0);
  }
  SUBCASE("copied child survives with refcount 1") {
    Heap g;
    ObjectId parent = allocate(g, at(1));
    ObjectId child = allocate(g, at(2));
    attach_inner(g, parent, "frame", child, at(3));
    copy_ref(g, child, at(4));
    free_object(g, parent, at(5));
    CHECK(g.at(child).state == ObjState::Allocated);
    CHECK(g.at(child).refcount == 1);
  }
  SUBCASE("double free is a diagnostic") {
    free_object(h, p, at(3));
    REQUIRE(h.diagnostics.size() == 1);
    CHECK(h.diagnostics[0].kind == HeapDiagKind::DoubleFree);
  }
}

TEST_CASE("copy_ref and drop_ref") {
  Heap h;
  ObjectId p = allocate(h, at(1));
  copy_ref(h, p);
  CHECK(h.at(p).refcount == 2);
  copy_ref(h, p);
  CHECK(h.at(p).refcount == 3);
  drop_ref(h, p);
  drop_ref(h, p);
  CHECK(h.at(p).refcount == 1);
  CHECK(h.at(p).state == ObjState::Allocated);
  drop_ref(h, p);
  CHECK(h.at(p).refcount == 0);
  CHECK(h.at(p).state == ObjState::Freed);
  copy_ref(h, p);
  CHECK(h.diagnostics.back().kind == HeapDiagKind::UseAfterFree);
  CHECK(h.at(p).refcount == 0);
}

TEST_CASE("drop_ref cascades through children") {
  Heap h;
  ObjectId parent = allocate(h, at(1));
  ObjectId a = allocate(h, at(2));
  ObjectId b = allocate(h, at(3));
  attach_inner(h, parent, "frame", a);
  attach_inner(h, parent, "pkt", b);
  copy_ref(h, b);
  drop_ref(h, parent, at(9));
  CHECK(h.at(parent).state == ObjState::Freed);
  CHECK(h.at(a).state == ObjState::Freed);
  CHECK(h.at(b).refcount == 1);
}

TEST_CASE("transfer_ownership") {
  Heap h;
  ObjectId g = allocate(h, at(1));
  transfer_ownership(h, g, Owner::global("gp"), at(2));
  CHECK(h.at(g).owners.count(Owner::global("gp")));
  CHECK(h.at(g).escaped);
  CHECK(h.at(g).refcount == 2);
  CHECK(h.trace.events.back().kind == EventKind::StoreGlobal);

  ObjectId d = allocate(h, at(3));
  transfer_ownership(h, d, Owner::param_slot("pdec"), at(4));
  CHECK(h.at(d).escaped);
  CHECK(h.at(d).refcount == 1);

  ObjectId r = allocate(h, at(5));
  record_return(h, r, at(6));
  CHECK(h.at(r).escaped);
  CHECK(h.trace.events[h.trace.events.size() - 2].kind == EventKind::Return);

  release_owner(h, g, Owner::global("gp"), at(7));
  CHECK_FALSE(h.at(g).escaped);
  CHECK(h.at(g).refcount == 1);
}

TEST_CASE("attach_inner keeps children a forest") {
  Heap h;
  ObjectId dp = allocate(h, at(1));
  ObjectId frame = allocate(h, at(2));
  ObjectId pkt = allocate(h, at(3));
  attach_inner(h, dp, "frame", frame);
  attach_inner(h, dp, "pkt", pkt);
  CHECK(h.at(dp).children ==
        std::map<std::string, ObjectId>{{"frame", frame}, {"pkt", pkt}});
  CHECK(h.at(frame).owners.count(Owner::heap_parent(dp)));
  ObjectId other = allocate(h, at(4));
  CHECK_THROWS_AS(attach_inner(h, other, "x", frame), ForestViolation);
}

TEST_CASE("escapes follows heap parents") {
  Heap h;
  ObjectId dp = allocate(h, at(1));
  ObjectId frame = allocate(h, at(2));
  attach_inner(h, dp, "frame", frame);
  CHECK_FALSE(escapes(h, frame));
  transfer_ownership(h, dp, Owner::param_slot("pdec"));
  CHECK(escapes(h, frame));
  detach_inner(h, dp, "frame");
  CHECK_FALSE(escapes(h, frame));
}

TEST_CASE("check_trace: documented examples") {
  OwnershipTrace t;
  t.events.push_back({EventKind::Allocate, 0});
  CHECK_FALSE(check_trace(t, LtlPattern::AROR));
  t.events.push_back({EventKind::Return, 0});
  t.events.push_back({EventKind::TransferOwnership, 0, {}, Owner::caller()});
  CHECK(check_trace(t, LtlPattern::AROR));
}

TEST_CASE("check_trace: heap operations produce model traces") {
  Heap h;
  ObjectId dp = allocate(h, at(1));
  ObjectId frame = allocate(h, at(2));
  attach_inner(h, dp, "frame", frame, at(3));
  record_return(h, dp, at(4));
  CHECK(check_trace(h.trace, LtlPattern::AROR));
  CHECK(check_trace(h.trace, LtlPattern::IAROR));

  Heap g;
  ObjectId p = allocate(g, at(1));
  ObjectId q = allocate(g, at(2));
  attach_inner(g, p, "frame", q, at(3));
  record_return(g, p, at(4));
  free_object(g, p, at(5));
  CHECK(check_trace(g.trace, LtlPattern::IAROR));

  Heap d;
  ObjectId x = allocate(d, at(1));
  record_call_arg(d, x, "dec_free", at(2));
  CHECK_FALSE(check_trace(d.trace, LtlPattern::DAOR, "dec_free"));
  free_object(d, x, at(3));
  CHECK(check_trace(d.trace, LtlPattern::DAOR, "dec_free"));

  Heap gl;
  ObjectId y = allocate(gl, at(1));
  transfer_ownership(gl, y, Owner::global("g"), at(2));
  CHECK(check_trace(gl.trace, LtlPattern::AGOR));
  CHECK_FALSE(check_trace(gl.trace, LtlPattern::DAGOR));
  free_object(gl, y, at(3));
  CHECK(check_trace(gl.trace, LtlPattern::DAGOR));
  copy_ref(gl, allocate(gl, at(4)), at(5));
  CHECK(check_trace(gl.trace, LtlPattern::ACR));
}

TEST_CASE("check_trace: DAOOR frees an inner object while the parent stays owned") {
  Heap h;
  ObjectId dp = allocate(h, at(1));
  ObjectId frame = allocate(h, at(2));
  attach_inner(h, dp, "frame", frame, at(3));
  record_call_arg(h, dp, "release_frame", at(4));
  CHECK_FALSE(check_trace(h.trace, LtlPattern::DAOOR, "release_frame"));
  free_object(h, frame, at(5));
  CHECK(check_trace(h.trace, LtlPattern::DAOOR, "release_frame"));
}

TEST_CASE("check_trace: exhaustive single-object traces agree with the truth table") {
  ltl_tables::Result r = ltl_tables::single_object(3);
  for (const std::string &m : r.mismatches)
    FAIL_CHECK(m);
  // 1 + 9 + 8*9 + 8*8*9: traces stop growing after Free
  CHECK(r.traces == 1 + 9 + 72 + 576);
}

TEST_CASE("check_trace: exhaustive two-object traces agree with the truth table") {
  ltl_tables::Result r = ltl_tables::two_objects();
  for (const std::string &m : r.mismatches)
    FAIL_CHECK(m);
  // empty, ten single steps, eight by eight one-event pairs
  CHECK(r.traces == 1 + 10 + 64);
  // the inner-allocation patterns are decided both ways
  for (const char *name : {"IAROR", "DAOOR", "DAOR", "AROR", "ACR"}) {
    CAPTURE(name);
    CHECK(r.satisfied[name] > 0);
    CHECK(r.satisfied[name] < r.traces);
  }
}

TEST_CASE("refcount invariants under random operation sequences") {
  ltl_tables::Result r = ltl_tables::refcount_invariants(7, 500);
  for (const std::string &m : r.mismatches)
    FAIL_CHECK(m);
  CHECK(r.checks > 1000);
}

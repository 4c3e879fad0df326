#include "leakscan/heapmodel.hpp"

#include <functional>

namespace leakscan {

std::string Owner::str() const {
  switch (kind) {
  case OwnerKind::Caller: return "caller";
  case OwnerKind::Global: return "global(" + name + ")";
  case OwnerKind::ParamSlot: return "param(" + name + ")";
  case OwnerKind::HeapParent: return "parent(#" + std::to_string(parent) + ")";
  case OwnerKind::ReturnSlot: return "return";
  case OwnerKind::Collection: return "collection(" + name + ")";
  }
  return "?";
}

std::string_view event_kind_name(EventKind k) {
  switch (k) {
  case EventKind::Allocate: return "allocate";
  case EventKind::Free: return "free";
  case EventKind::Copy: return "copy";
  case EventKind::Return: return "return";
  case EventKind::StoreGlobal: return "store_global";
  case EventKind::StoreParam: return "store_param";
  case EventKind::TransferOwnership: return "transfer_ownership";
  case EventKind::Release: return "release";
  case EventKind::Disown: return "disown";
  case EventKind::CallArg: return "call_arg";
  }
  return "?";
}

std::string_view pattern_name(LtlPattern p) {
  switch (p) {
  case LtlPattern::AROR: return "AROR";
  case LtlPattern::IAROR: return "IAROR";
  case LtlPattern::DAOR: return "DAOR";
  case LtlPattern::DAOOR: return "DAOOR";
  case LtlPattern::AGOR: return "AGOR";
  case LtlPattern::DAGOR: return "DAGOR";
  case LtlPattern::ACR: return "ACR";
  }
  return "?";
}

namespace {

void emit(Heap &heap, EventKind kind, ObjectId id, Span site, Owner entity = {},
          std::string callee = {}) {
  heap.trace.events.push_back({kind, id, site, std::move(entity), std::move(callee)});
}

void refresh_escaped(MemoryObject &o) {
  o.escaped = false;
  for (const Owner &w : o.owners)
    o.escaped |= w.is_escape();
}

} // namespace

ObjectId allocate(Heap &heap, Span site,
                  std::shared_ptr<const PathConstraint> condition) {
  MemoryObject o;
  o.id = static_cast<ObjectId>(heap.objects.size());
  o.alloc_site = site;
  o.entry_site = site;
  o.owners.insert(Owner::caller());
  o.alloc_condition = std::move(condition);
  heap.objects.push_back(std::move(o));
  emit(heap, EventKind::Allocate, heap.objects.back().id, site);
  return heap.objects.back().id;
}

void free_object(Heap &heap, ObjectId id, Span site) {
  MemoryObject &o = heap.at(id);
  if (o.state == ObjState::Freed) {
    heap.diagnostics.push_back({HeapDiagKind::DoubleFree, id, site});
    return;
  }
  o.state = ObjState::Freed;
  o.refcount = 0;
  o.owners.erase(Owner::caller());
  refresh_escaped(o);
  emit(heap, EventKind::Free, id, site);
  // Children are released exactly once each.
  auto children = o.children;
  for (const auto &[field, child] : children) {
    MemoryObject &c = heap.at(child);
    if (c.state == ObjState::Freed)
      continue;
    drop_ref(heap, child, site);
  }
}

void copy_ref(Heap &heap, ObjectId id, Span site) {
  MemoryObject &o = heap.at(id);
  if (o.state == ObjState::Freed) {
    heap.diagnostics.push_back({HeapDiagKind::UseAfterFree, id, site});
    return;
  }
  ++o.refcount;
  emit(heap, EventKind::Copy, id, site);
}

void drop_ref(Heap &heap, ObjectId id, Span site) {
  MemoryObject &o = heap.at(id);
  if (o.state == ObjState::Freed || o.refcount <= 0)
    return;
  if (o.refcount == 1) {
    free_object(heap, id, site);
    return;
  }
  --o.refcount;
  emit(heap, EventKind::Release, id, site);
}

void transfer_ownership(Heap &heap, ObjectId id, const Owner &entity, Span site) {
  MemoryObject &o = heap.at(id);
  if (o.state == ObjState::Freed) {
    heap.diagnostics.push_back({HeapDiagKind::UseAfterFree, id, site});
    return;
  }
  o.owners.insert(entity);
  refresh_escaped(o);
  switch (entity.kind) {
  case OwnerKind::Global:
    ++o.refcount;
    emit(heap, EventKind::StoreGlobal, id, site, entity);
    break;
  case OwnerKind::ParamSlot:
    emit(heap, EventKind::StoreParam, id, site, entity);
    break;
  default:
    emit(heap, EventKind::TransferOwnership, id, site, entity);
    break;
  }
}

void release_owner(Heap &heap, ObjectId id, const Owner &entity, Span site) {
  MemoryObject &o = heap.at(id);
  if (!o.owners.erase(entity))
    return;
  refresh_escaped(o);
  emit(heap, EventKind::Disown, id, site, entity);
  if (entity.kind == OwnerKind::Global)
    drop_ref(heap, id, site);
}

void attach_inner(Heap &heap, ObjectId parent, const std::string &field,
                  ObjectId child, Span site) {
  MemoryObject &c = heap.at(child);
  if (c.parent >= 0)
    throw ForestViolation(child, c.parent);
  detach_inner(heap, parent, field);
  heap.at(parent).children[field] = child;
  heap.at(child).parent = parent;
  transfer_ownership(heap, child, Owner::heap_parent(parent), site);
}

void detach_inner(Heap &heap, ObjectId parent, const std::string &field) {
  MemoryObject &p = heap.at(parent);
  auto it = p.children.find(field);
  if (it == p.children.end())
    return;
  ObjectId child = it->second;
  p.children.erase(it);
  MemoryObject &c = heap.at(child);
  c.parent = -1;
  if (c.owners.erase(Owner::heap_parent(parent)))
    emit(heap, EventKind::Disown, child, {}, Owner::heap_parent(parent));
}

void record_return(Heap &heap, ObjectId id, Span site) {
  emit(heap, EventKind::Return, id, site);
  transfer_ownership(heap, id, Owner::return_slot(), site);
}

void record_call_arg(Heap &heap, ObjectId id, const std::string &callee,
                     Span site) {
  emit(heap, EventKind::CallArg, id, site, {}, callee);
}

bool escapes(const Heap &heap, ObjectId id) {
  for (int guard = 0; id >= 0 && guard <= static_cast<int>(heap.objects.size());
       ++guard) {
    const MemoryObject &o = heap.at(id);
    if (o.escaped)
      return true;
    if (!o.owners.count(Owner::heap_parent(o.parent)))
      return false;
    id = o.parent;
  }
  return false;
}

//===----------------------------------------------------------------------===//
// Finite-trace LTL
//===----------------------------------------------------------------------===//

namespace {

struct Snap {
  bool live = false;  // allocated at or before this step, not freed earlier
  int refcount = 0;
  std::set<Owner> owners;
};

/// The trace regrouped into steps with per-object state before/after each.
struct Timeline {
  std::vector<std::pair<std::size_t, std::size_t>> steps;  // event ranges
  std::vector<std::vector<Snap>> before, after;           // [step][object]
  const OwnershipTrace *trace = nullptr;
  std::size_t objects = 0;

  bool has_event(std::size_t step, const std::function<bool(const OwnershipEvent &)> &pred) const {
    auto [b, e] = steps[step];
    for (std::size_t i = b; i < e; ++i)
      if (pred(trace->events[i]))
        return true;
    return false;
  }
};

Timeline replay(const OwnershipTrace &trace) {
  Timeline tl;
  tl.trace = &trace;
  for (const auto &ev : trace.events)
    tl.objects = std::max<std::size_t>(tl.objects, ev.object + 1);
  for (std::size_t i = 0; i < trace.events.size();) {
    std::size_t j = i + 1;
    while (j < trace.events.size() && trace.events[j].site == trace.events[i].site)
      ++j;
    tl.steps.emplace_back(i, j);
    i = j;
  }
  std::vector<Snap> cur(tl.objects);
  std::vector<bool> freed(tl.objects, false);
  for (auto [b, e] : tl.steps) {
    // An object freed in the previous step is no longer live.
    for (std::size_t o = 0; o < tl.objects; ++o)
      if (freed[o])
        cur[o].live = false;
    tl.before.push_back(cur);
    for (std::size_t i = b; i < e; ++i) {
      const OwnershipEvent &ev = trace.events[i];
      Snap &s = cur[ev.object];
      switch (ev.kind) {
      case EventKind::Allocate:
        s = Snap{true, 1, {Owner::caller()}};
        break;
      case EventKind::Free:
        s.refcount = 0;
        s.owners.erase(Owner::caller());
        freed[ev.object] = true;
        break;
      case EventKind::Copy:
        ++s.refcount;
        break;
      case EventKind::Release:
        --s.refcount;
        break;
      case EventKind::StoreGlobal:
        s.owners.insert(ev.entity);
        ++s.refcount;
        break;
      case EventKind::StoreParam:
        s.owners.insert(ev.entity);
        break;
      case EventKind::TransferOwnership:
        s.owners.insert(ev.entity);
        if (ev.entity.kind == OwnerKind::Global)
          ++s.refcount;
        break;
      case EventKind::Disown:
        s.owners.erase(ev.entity);
        break;
      case EventKind::Return:
      case EventKind::CallArg:
        break;
      }
    }
    tl.after.push_back(cur);
  }
  return tl;
}

/// Variable binding: p and q are object ids.
struct Env {
  ObjectId p = -1, q = -1;
};

using Formula = std::function<bool(const Env &, std::size_t)>;

class Ltl {
public:
  explicit Ltl(const Timeline &tl) : tl_(tl) {}

  Formula F(Formula f) const {
    return [this, f](const Env &env, std::size_t i) {
      for (std::size_t j = i; j < tl_.steps.size(); ++j)
        if (f(env, j))
          return true;
      return false;
    };
  }
  Formula G(Formula f) const {
    return [this, f](const Env &env, std::size_t i) {
      for (std::size_t j = i; j < tl_.steps.size(); ++j)
        if (!f(env, j))
          return false;
      return true;
    };
  }
  static Formula And(Formula a, Formula b) {
    return [a, b](const Env &e, std::size_t i) { return a(e, i) && b(e, i); };
  }
  static Formula Implies(Formula a, Formula b) {
    return [a, b](const Env &e, std::size_t i) { return !a(e, i) || b(e, i); };
  }
  static Formula Iff(Formula a, Formula b) {
    return [a, b](const Env &e, std::size_t i) { return a(e, i) == b(e, i); };
  }
  static Formula Not(Formula a) {
    return [a](const Env &e, std::size_t i) { return !a(e, i); };
  }

  // Event atoms. `which` picks p or q from the binding.
  Formula event(EventKind k, bool on_q = false,
                std::function<bool(const OwnershipEvent &)> extra = {}) const {
    return [this, k, on_q, extra](const Env &env, std::size_t i) {
      ObjectId id = on_q ? env.q : env.p;
      return tl_.has_event(i, [&](const OwnershipEvent &ev) {
        return ev.kind == k && ev.object == id && (!extra || extra(ev));
      });
    };
  }

  Formula shared(int n, bool on_q = false) const {
    return [this, n, on_q](const Env &env, std::size_t i) {
      const Snap &s = tl_.after[i][on_q ? env.q : env.p];
      return s.live && s.refcount == n;
    };
  }
  /// shared(x, n) before the step and shared(x, n + delta) after it.
  Formula refcount_step(int delta, bool on_q = false) const {
    return [this, delta, on_q](const Env &env, std::size_t i) {
      ObjectId id = on_q ? env.q : env.p;
      const Snap &b = tl_.before[i][id];
      const Snap &a = tl_.after[i][id];
      return b.live && a.live && a.refcount == b.refcount + delta;
    };
  }
  Formula owns(OwnerKind kind, bool on_q = false) const {
    return [this, kind, on_q](const Env &env, std::size_t i) {
      const Snap &s = tl_.after[i][on_q ? env.q : env.p];
      if (!s.live)
        return false;
      for (const Owner &w : s.owners)
        if (w.kind == kind)
          return true;
      return false;
    };
  }
  /// owns(p, q): q is an inner allocation held by p.
  Formula parent_owns() const {
    return [this](const Env &env, std::size_t i) {
      const Snap &s = tl_.after[i][env.q];
      return s.live && s.owners.count(Owner::heap_parent(env.p));
    };
  }

private:
  const Timeline &tl_;
};

} // namespace

bool check_trace(const OwnershipTrace &trace, LtlPattern pattern,
                 const std::string &callee) {
  Timeline tl = replay(trace);
  if (tl.steps.empty())
    return pattern == LtlPattern::DAOR || pattern == LtlPattern::DAOOR ||
           pattern == LtlPattern::DAGOR || pattern == LtlPattern::ACR;
  Ltl L(tl);
  auto ids = static_cast<ObjectId>(tl.objects);
  auto exists1 = [&](const Formula &f) {
    for (ObjectId p = 0; p < ids; ++p)
      if (f(Env{p, -1}, 0))
        return true;
    return false;
  };
  auto forall1 = [&](const Formula &f) {
    for (ObjectId p = 0; p < ids; ++p)
      if (!f(Env{p, -1}, 0))
        return false;
    return true;
  };
  auto exists2 = [&](const Formula &f) {
    for (ObjectId p = 0; p < ids; ++p)
      for (ObjectId q = 0; q < ids; ++q)
        if (p != q && f(Env{p, q}, 0))
          return true;
    return false;
  };
  auto forall2 = [&](const Formula &f) {
    for (ObjectId p = 0; p < ids; ++p)
      for (ObjectId q = 0; q < ids; ++q)
        if (p != q && !f(Env{p, q}, 0))
          return false;
    return true;
  };
  auto call_arg = L.event(EventKind::CallArg, false, [&](const OwnershipEvent &ev) {
    return callee.empty() || ev.callee == callee;
  });
  auto transfer_caller = L.event(EventKind::TransferOwnership, false,
                                 [](const OwnershipEvent &ev) {
                                   return ev.entity.kind == OwnerKind::Caller ||
                                          ev.entity.kind == OwnerKind::ReturnSlot;
                                 });
  auto free_iff_zero = L.G(Ltl::Iff(L.event(EventKind::Free), L.shared(0)));

  switch (pattern) {
  case LtlPattern::AROR:
    // F(allocate(p) ∧ shared(p,1) ∧ F(return(p) ∧ transfer(caller,p)))
    //   ∧ G(free(p) ↔ shared(p,0))
    return exists1(Ltl::And(
        L.F(Ltl::And(Ltl::And(L.event(EventKind::Allocate), L.shared(1)),
                     L.F(Ltl::And(L.event(EventKind::Return), transfer_caller)))),
        free_iff_zero));
  case LtlPattern::IAROR:
    // F(allocate(q) ∧ shared(q,1) ∧ F(return(p) ∧ owns(p,q)))
    //   ∧ G(free(p) → shared(q,n) ∧ shared(q,n-1))
    return exists2(Ltl::And(
        L.F(Ltl::And(Ltl::And(L.event(EventKind::Allocate, true), L.shared(1, true)),
                     L.F(Ltl::And(L.event(EventKind::Return), L.parent_owns())))),
        L.G(Ltl::Implies(L.event(EventKind::Free), L.refcount_step(-1, true)))));
  case LtlPattern::DAOR:
    // G(call(f) ∧ arg(p) → F(shared(p,0) ∧ free(p) ∧ ¬owns(caller,p)))
    return forall1(L.G(Ltl::Implies(
        call_arg,
        L.F(Ltl::And(Ltl::And(L.shared(0), L.event(EventKind::Free)),
                     Ltl::Not(L.owns(OwnerKind::Caller)))))));
  case LtlPattern::DAOOR: {
    // G(call(f) ∧ arg(p) ∧ shared(p+off, n)
    //   → F(free(p+off) ∧ shared(p+off, n-1) ∧ owns(caller, p)))
    auto child_live = [&tl](const Env &env, std::size_t i) {
      const Snap &s = tl.after[i][env.q];
      return s.live && s.owners.count(Owner::heap_parent(env.p)) > 0;
    };
    return forall2(L.G(Ltl::Implies(
        Ltl::And(call_arg, child_live),
        L.F(Ltl::And(Ltl::And(L.event(EventKind::Free, true),
                              L.refcount_step(-1, true)),
                     L.owns(OwnerKind::Caller))))));
  }
  case LtlPattern::AGOR:
    return exists1(Ltl::And(
        L.F(Ltl::And(Ltl::And(L.event(EventKind::Allocate), L.shared(1)),
                     L.F(Ltl::And(L.event(EventKind::StoreGlobal),
                                  L.owns(OwnerKind::Global))))),
        free_iff_zero));
  case LtlPattern::DAGOR:
    // G(owns(global,p) → F(free(p) ∧ shared(p,0)))
    return forall1(L.G(Ltl::Implies(
        L.owns(OwnerKind::Global),
        L.F(Ltl::And(L.event(EventKind::Free), L.shared(0))))));
  case LtlPattern::ACR:
    // G(copy(p,q) → F(shared(p,n) ∧ shared(p,n+1)))
    return forall1(L.G(Ltl::Implies(L.event(EventKind::Copy),
                                    L.F(L.refcount_step(+1)))));
  }
  return false;
}

nlohmann::json trace_to_json(const OwnershipTrace &trace,
                             const SourceManager *sources) {
  nlohmann::json out = nlohmann::json::array();
  for (const OwnershipEvent &ev : trace.events) {
    nlohmann::json j{{"event", event_kind_name(ev.kind)}, {"object", ev.object}};
    if (sources && ev.site.file < sources->size() && ev.site.length)
      j["site"] = sources->describe(ev.site);
    if (ev.kind == EventKind::StoreGlobal || ev.kind == EventKind::StoreParam ||
        ev.kind == EventKind::TransferOwnership || ev.kind == EventKind::Disown)
      j["entity"] = ev.entity.str();
    if (ev.kind == EventKind::CallArg)
      j["callee"] = ev.callee;
    out.push_back(std::move(j));
  }
  return out;
}

} // namespace leakscan

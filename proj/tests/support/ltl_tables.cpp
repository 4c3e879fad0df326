#include "support/ltl_tables.hpp"

#include "leakscan/heapmodel.hpp"

#include <algorithm>
#include <functional>
#include <random>

using namespace leakscan;

namespace ltl_tables {
namespace {

Span at(std::uint32_t offset) { return Span{0, offset, 1}; }

std::string describe(const char *what, const std::vector<int> &steps, LtlPattern p,
                     bool got) {
  std::string s = std::string(what) + " [";
  for (std::size_t i = 0; i < steps.size(); ++i)
    s += (i ? "," : "") + std::to_string(steps[i]);
  return s + "] " + std::string(pattern_name(p)) + " got " + (got ? "true" : "false");
}

//===----------------------------------------------------------------------===//
// One object
//===----------------------------------------------------------------------===//

enum class Step {
  Free, Copy, ReturnTransfer, ReturnOnly, StoreGlobal, StoreParam, Release,
  CallArg, DisownGlobal,
};
constexpr Step kSteps[] = {Step::Free,       Step::Copy,        Step::ReturnTransfer,
                           Step::ReturnOnly, Step::StoreGlobal, Step::StoreParam,
                           Step::Release,    Step::CallArg,     Step::DisownGlobal};

OwnershipTrace to_trace(const std::vector<Step> &steps) {
  OwnershipTrace t;
  t.events.push_back({EventKind::Allocate, 0, at(0)});
  std::uint32_t pos = 1;
  for (Step s : steps) {
    Span site = at(pos++);
    switch (s) {
    case Step::Free: t.events.push_back({EventKind::Free, 0, site}); break;
    case Step::Copy: t.events.push_back({EventKind::Copy, 0, site}); break;
    case Step::ReturnTransfer:
      t.events.push_back({EventKind::Return, 0, site});
      t.events.push_back({EventKind::TransferOwnership, 0, site, Owner::return_slot()});
      break;
    case Step::ReturnOnly: t.events.push_back({EventKind::Return, 0, site}); break;
    case Step::StoreGlobal:
      t.events.push_back({EventKind::StoreGlobal, 0, site, Owner::global("g")});
      break;
    case Step::StoreParam:
      t.events.push_back({EventKind::StoreParam, 0, site, Owner::param_slot("o")});
      break;
    case Step::Release: t.events.push_back({EventKind::Release, 0, site}); break;
    case Step::CallArg:
      t.events.push_back({EventKind::CallArg, 0, site, {}, "f"});
      break;
    case Step::DisownGlobal:
      t.events.push_back({EventKind::Disown, 0, site, Owner::global("g")});
      break;
    }
  }
  return t;
}

bool expected_single(const std::vector<Step> &steps, LtlPattern p) {
  // Refcount after the allocation step and after each later step.
  std::vector<int> rc{1};
  bool global_owner = false;
  std::vector<bool> global_after{false};
  for (Step s : steps) {
    int r = rc.back();
    if (s == Step::Copy || s == Step::StoreGlobal)
      ++r;
    if (s == Step::Release)
      --r;
    if (s == Step::Free)
      r = 0;
    if (s == Step::StoreGlobal)
      global_owner = true;
    if (s == Step::DisownGlobal)
      global_owner = false;
    rc.push_back(r);
    global_after.push_back(global_owner);
  }
  auto has = [&](Step k) {
    return std::find(steps.begin(), steps.end(), k) != steps.end();
  };
  bool free_iff_zero = rc[0] != 0;
  for (std::size_t i = 0; i < steps.size(); ++i)
    free_iff_zero = free_iff_zero && ((steps[i] == Step::Free) == (rc[i + 1] == 0));
  bool any_global = std::find(global_after.begin(), global_after.end(), true) !=
                    global_after.end();
  switch (p) {
  case LtlPattern::AROR: return has(Step::ReturnTransfer) && free_iff_zero;
  case LtlPattern::IAROR: return false;  // needs two objects
  case LtlPattern::DAOR: return !has(Step::CallArg) || has(Step::Free);
  case LtlPattern::DAOOR: return true;   // no inner objects
  case LtlPattern::AGOR: return has(Step::StoreGlobal) && free_iff_zero;
  case LtlPattern::DAGOR: return !any_global || has(Step::Free);
  case LtlPattern::ACR: return true;     // every copy bumps the count in its step
  }
  return false;
}

//===----------------------------------------------------------------------===//
// Two objects: p = 0 allocated first, q = 1 second
//===----------------------------------------------------------------------===//

enum class Two {
  Attach,        // q becomes an inner allocation of p
  Return,        // return(p) and transfer to the return slot (2 events)
  ReturnOnly,    // return(p) without an ownership transfer
  FreeP,         // raw free of p, no cascade
  FreeCascade,   // free of p releasing q in the same step (2 events)
  FreeQ,
  CallP,
  CallQ,
  CopyQ,
  ReleaseQ,
};
constexpr Two kTwo[] = {Two::Attach, Two::Return, Two::ReturnOnly, Two::FreeP,  Two::FreeCascade,
                        Two::FreeQ,  Two::CallP,  Two::CallQ,  Two::CopyQ,
                        Two::ReleaseQ};

int cost(Two s) { return s == Two::Return || s == Two::FreeCascade ? 2 : 1; }

OwnershipTrace to_trace(const std::vector<Two> &steps) {
  OwnershipTrace t;
  t.events.push_back({EventKind::Allocate, 0, at(0)});
  t.events.push_back({EventKind::Allocate, 1, at(1)});
  std::uint32_t pos = 2;
  for (Two s : steps) {
    Span site = at(pos++);
    switch (s) {
    case Two::Attach:
      t.events.push_back(
          {EventKind::TransferOwnership, 1, site, Owner::heap_parent(0)});
      break;
    case Two::Return:
      t.events.push_back({EventKind::Return, 0, site});
      t.events.push_back({EventKind::TransferOwnership, 0, site, Owner::return_slot()});
      break;
    case Two::ReturnOnly: t.events.push_back({EventKind::Return, 0, site}); break;
    case Two::FreeP: t.events.push_back({EventKind::Free, 0, site}); break;
    case Two::FreeCascade:
      t.events.push_back({EventKind::Free, 0, site});
      t.events.push_back({EventKind::Release, 1, site});
      break;
    case Two::FreeQ: t.events.push_back({EventKind::Free, 1, site}); break;
    case Two::CallP: t.events.push_back({EventKind::CallArg, 0, site, {}, "f"}); break;
    case Two::CallQ: t.events.push_back({EventKind::CallArg, 1, site, {}, "f"}); break;
    case Two::CopyQ: t.events.push_back({EventKind::Copy, 1, site}); break;
    case Two::ReleaseQ: t.events.push_back({EventKind::Release, 1, site}); break;
    }
  }
  return t;
}

bool frees_p(Two s) { return s == Two::FreeP || s == Two::FreeCascade; }

bool expected_two(const std::vector<Two> &s, LtlPattern p) {
  const std::size_t n = s.size();
  auto first = [&](const std::function<bool(Two)> &pred) {
    for (std::size_t i = 0; i < n; ++i)
      if (pred(s[i]))
        return i;
    return n;
  };
  std::size_t first_free_p = first(frees_p);
  std::size_t first_free_q = first([](Two x) { return x == Two::FreeQ; });
  std::size_t attach = first([](Two x) { return x == Two::Attach; });
  // q's reference count before step i.
  auto rc_q_before = [&](std::size_t i) {
    int rc = 1;
    for (std::size_t k = 0; k < i; ++k) {
      if (s[k] == Two::CopyQ)
        ++rc;
      if (s[k] == Two::ReleaseQ || s[k] == Two::FreeCascade)
        --rc;
      if (s[k] == Two::FreeQ)
        rc = 0;
    }
    return rc;
  };
  // q is live at step i (before and after) when no earlier step freed it.
  auto q_live = [&](std::size_t i) { return first_free_q >= i; };

  switch (p) {
  case LtlPattern::AROR: {
    std::size_t frees = std::count_if(s.begin(), s.end(), frees_p);
    return first([](Two x) { return x == Two::Return; }) < n && frees <= 1;
  }
  case LtlPattern::IAROR: {
    std::size_t ret = n;
    for (std::size_t i = 0; i < n; ++i)
      if ((s[i] == Two::Return || s[i] == Two::ReturnOnly) && attach <= i &&
          q_live(i) && ret == n)
        ret = i;
    if (ret == n)
      return false;
    for (std::size_t i = 0; i < n; ++i)
      if (frees_p(s[i]) && (s[i] != Two::FreeCascade || !q_live(i)))
        return false;
    return true;
  }
  case LtlPattern::DAOR: {
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i] == Two::CallP && first_free_p < i)
        return false;
      if (s[i] == Two::CallP && first_free_p == n)
        return false;
      if (s[i] == Two::CallQ && (first_free_q < i || first_free_q == n))
        return false;
    }
    return true;
  }
  case LtlPattern::DAOOR: {
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i] != Two::CallP || attach > i || !q_live(i))
        continue;
      // Some later free of q drops its count by one while p is still
      // owned by the caller.
      bool ok = false;
      for (std::size_t j = i; j < n && !ok; ++j)
        ok = s[j] == Two::FreeQ && q_live(j) && rc_q_before(j) == 1 &&
             first_free_p > j;
      if (!ok)
        return false;
    }
    return true;
  }
  case LtlPattern::AGOR: return false;
  case LtlPattern::DAGOR: return true;
  case LtlPattern::ACR:
    for (std::size_t i = 0; i < n; ++i)
      if (s[i] == Two::CopyQ && !q_live(i))
        return false;
    return true;
  }
  return false;
}

template <typename T>
void enumerate(std::vector<T> &prefix, int budget, const std::vector<T> &alphabet,
               const std::function<int(T)> &weight, bool stop_after_free,
               const std::function<bool(T)> &is_free,
               const std::function<void(const std::vector<T> &)> &visit) {
  visit(prefix);
  if (stop_after_free && !prefix.empty() && is_free(prefix.back()))
    return;
  for (T s : alphabet)
    if (weight(s) <= budget) {
      prefix.push_back(s);
      enumerate(prefix, budget - weight(s), alphabet, weight, stop_after_free, is_free,
                visit);
      prefix.pop_back();
    }
}

} // namespace

Result single_object(std::size_t max_steps) {
  Result r;
  std::vector<Step> prefix;
  std::vector<Step> alphabet(std::begin(kSteps), std::end(kSteps));
  enumerate<Step>(
      prefix, static_cast<int>(max_steps), alphabet, [](Step) { return 1; }, true,
      [](Step s) { return s == Step::Free; },
      [&](const std::vector<Step> &steps) {
        ++r.traces;
        OwnershipTrace t = to_trace(steps);
        for (LtlPattern p : kAllPatterns) {
          ++r.checks;
          bool got = check_trace(t, p);
          r.satisfied[std::string(pattern_name(p))] += got;
          if (got != expected_single(steps, p)) {
            std::vector<int> ids;
            for (Step s : steps)
              ids.push_back(static_cast<int>(s));
            r.mismatches.push_back(describe("single", ids, p, got));
          }
        }
      });
  return r;
}

Result two_objects() {
  Result r;
  std::vector<Two> prefix;
  std::vector<Two> alphabet(std::begin(kTwo), std::end(kTwo));
  enumerate<Two>(
      prefix, 2, alphabet, cost, false, [](Two) { return false; },
      [&](const std::vector<Two> &steps) {
        ++r.traces;
        OwnershipTrace t = to_trace(steps);
        for (LtlPattern p : kAllPatterns) {
          ++r.checks;
          bool got = check_trace(t, p);
          r.satisfied[std::string(pattern_name(p))] += got;
          if (got != expected_two(steps, p)) {
            std::vector<int> ids;
            for (Two s : steps)
              ids.push_back(static_cast<int>(s));
            r.mismatches.push_back(describe("two", ids, p, got));
          }
        }
      });
  return r;
}

Result refcount_invariants(std::uint64_t seed, int sequences) {
  Result r;
  std::mt19937_64 rng(seed);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  for (int seq = 0; seq < sequences; ++seq) {
    Heap h;
    ++r.traces;
    for (int op = 0; op < 12; ++op) {
      int n = static_cast<int>(h.objects.size());
      int kind = n == 0 ? 0 : pick(7);
      ObjectId a = n ? pick(n) : -1, b = n ? pick(n) : -1;
      switch (kind) {
      case 0: allocate(h, at(op)); break;
      case 1: free_object(h, a, at(op)); break;
      case 2: copy_ref(h, a, at(op)); break;
      case 3: drop_ref(h, a, at(op)); break;
      case 4: transfer_ownership(h, a, Owner::global("g"), at(op)); break;
      case 5:
        if (a != b && h.at(b).parent < 0 && h.at(a).state == ObjState::Allocated &&
            h.at(b).state == ObjState::Allocated) {
          bool cycle = false;
          for (ObjectId x = a; x >= 0; x = h.at(x).parent)
            cycle = cycle || x == b;
          if (!cycle)
            attach_inner(h, a, "f" + std::to_string(pick(2)), b, at(op));
        }
        break;
      case 6: release_owner(h, a, Owner::global("g"), at(op)); break;
      }
      for (const MemoryObject &o : h.objects) {
        ++r.checks;
        std::string where = "seq " + std::to_string(seq) + " op " + std::to_string(op) +
                            " object " + std::to_string(o.id) + ": ";
        if (o.refcount < 0)
          r.mismatches.push_back(where + "negative refcount");
        if (o.state == ObjState::Freed && o.refcount != 0)
          r.mismatches.push_back(where + "freed with nonzero refcount");
        if (o.state == ObjState::Allocated && o.refcount < 1)
          r.mismatches.push_back(where + "allocated with zero refcount");
        if (o.state == ObjState::Freed && o.owners.count(Owner::caller()))
          r.mismatches.push_back(where + "freed but still caller-owned");
        if (o.parent >= 0) {
          bool listed = false;
          for (const auto &[f, c] : h.at(o.parent).children)
            listed = listed || c == o.id;
          if (!listed)
            r.mismatches.push_back(where + "parent does not list child");
        }
        for (const auto &[f, c] : o.children)
          if (h.at(c).parent != o.id)
            r.mismatches.push_back(where + "child points elsewhere");
      }
    }
  }
  return r;
}

} // namespace ltl_tables

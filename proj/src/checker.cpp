#include "leakscan/checker.hpp"

#include <algorithm>
#include <map>

namespace leakscan {

std::string_view escape_reason_name(EscapeReason r) {
  switch (r) {
  case EscapeReason::ReturnedValue: return "returned";
  case EscapeReason::StoredToParam: return "stored-to-param";
  case EscapeReason::StoredToGlobal: return "stored-to-global";
  case EscapeReason::GlobalCollectionCall: return "global-collection";
  }
  return "?";
}

std::string_view leak_rule_name(LeakRule r) {
  return r == LeakRule::ScopeExit ? "scope-exit" : "global-overwrite";
}

EscapeVerdict escape_analysis(const Heap &heap, ObjectId object) {
  for (ObjectId o = object; o >= 0; o = heap.at(o).parent) {
    for (const Owner &w : heap.at(o).owners) {
      switch (w.kind) {
      case OwnerKind::ReturnSlot:
        return {true, EscapeReason::ReturnedValue, "return"};
      case OwnerKind::ParamSlot:
        return {true, EscapeReason::StoredToParam, w.name};
      case OwnerKind::Global:
        return {true, EscapeReason::StoredToGlobal, w.name};
      case OwnerKind::Collection:
        return {true, EscapeReason::GlobalCollectionCall, w.name};
      default:
        break;
      }
    }
  }
  return EscapeVerdict::local();
}

namespace {

bool lost_global(const Heap &heap, ObjectId o) {
  for (const OwnershipEvent &e : heap.trace.events)
    if (e.object == o && e.kind == EventKind::Disown &&
        e.entity.kind == OwnerKind::Global)
      return true;
  return false;
}

bool leaked(const Heap &heap, ObjectId o) {
  const MemoryObject &m = heap.at(o);
  return m.state == ObjState::Allocated && m.refcount > 0 && !m.orphaned &&
         !escape_analysis(heap, o).escaped;
}

std::string holder_name(const PathState &state, const SymTable &syms, ObjectId o,
                        int guard = 0) {
  const Loc *best = nullptr;
  for (const auto &[loc, v] : state.store)
    if (loc.root == RootKind::Local && loc.frame == 0 &&
        v.kind == ValKind::HeapRef && v.num == o &&
        (!best || loc.fields.size() < best->fields.size()))
      best = &loc;
  if (best)
    return syms.render(*best);
  const MemoryObject &m = state.heap.at(o);
  if (m.parent >= 0 && guard < 16)
    for (const auto &[field, child] : state.heap.at(m.parent).children)
      if (child == o)
        return holder_name(state, syms, m.parent, guard + 1) + "->" + field;
  return (m.alloc_chain.empty() ? std::string("?") : m.alloc_chain.front()) + "()";
}

Finding make_finding(const PathState &state, const SymTable &syms,
                     const std::string &function, ObjectId o, LeakRule rule) {
  const MemoryObject &m = state.heap.at(o);
  Finding f;
  f.function = function;
  f.alloc_site = m.entry_site;
  f.origin_site = m.alloc_site;
  f.alloc_chain = m.alloc_chain;
  f.leaked_path = holder_name(state, syms, o);
  f.trigger = state.constraint.render(syms);
  f.witness = state.witness;
  f.alternates = {f.trigger};
  f.rule = rule;
  f.low_confidence = state.verdict == SolverVerdict::Unknown;
  f.trace = state.heap.trace;
  return f;
}

} // namespace

std::vector<Finding> check_path(const PathState &state, const SymTable &syms,
                                const std::string &function) {
  std::vector<Finding> out;
  for (const MemoryObject &m : state.heap.objects)
    if (leaked(state.heap, m.id) && !lost_global(state.heap, m.id))
      out.push_back(make_finding(state, syms, function, m.id, LeakRule::ScopeExit));
  return out;
}

std::vector<Finding> global_slot_check(const PathState &state, const SymTable &syms,
                                       const std::string &function) {
  std::vector<Finding> out;
  for (const MemoryObject &m : state.heap.objects)
    if (leaked(state.heap, m.id) && lost_global(state.heap, m.id))
      out.push_back(
          make_finding(state, syms, function, m.id, LeakRule::GlobalOverwrite));
  return out;
}

std::vector<Finding> dedupe(std::vector<Finding> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Finding &a, const Finding &b) {
                     if (a.function != b.function)
                       return a.function < b.function;
                     if (a.alloc_site != b.alloc_site)
                       return a.alloc_site < b.alloc_site;
                     return a.witness < b.witness;
                   });
  std::vector<Finding> out;
  for (Finding &c : candidates) {
    if (!out.empty() && out.back().function == c.function &&
        out.back().alloc_site == c.alloc_site) {
      Finding &kept = out.back();
      for (std::string &t : c.alternates)
        if (std::find(kept.alternates.begin(), kept.alternates.end(), t) ==
            kept.alternates.end())
          kept.alternates.push_back(std::move(t));
      kept.low_confidence = kept.low_confidence && c.low_confidence;
      continue;
    }
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const Finding &a, const Finding &b) {
    if (a.alloc_site != b.alloc_site)
      return a.alloc_site < b.alloc_site;
    return a.function < b.function;
  });
  return out;
}

CandidateAnalysis analyze_candidate(FunctionId function, const Program &program,
                                    const SummaryStore &store,
                                    const AnalysisConfig &config) {
  const std::string &name = program.function(function).name;
  ExecResult r = execute_candidate(function, program, store, config);
  CandidateAnalysis out;
  out.diagnostics = std::move(r.diagnostics);
  out.paths = r.paths.size();
  out.truncated = r.truncated;
  std::vector<Finding> all;
  for (const PathState &p : r.paths) {
    for (Finding &f : check_path(p, *r.syms, name))
      all.push_back(std::move(f));
    for (Finding &f : global_slot_check(p, *r.syms, name))
      all.push_back(std::move(f));
  }
  out.findings = dedupe(std::move(all));
  return out;
}

} // namespace leakscan

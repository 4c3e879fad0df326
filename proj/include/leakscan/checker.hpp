//===- checker.hpp - Leak verdicts over terminal path states ------*- C++ -*-===//
#pragma once

#include "leakscan/symex.hpp"

#include <optional>
#include <string>
#include <vector>

namespace leakscan {

enum class EscapeReason {
  ReturnedValue,
  StoredToParam,
  StoredToGlobal,
  GlobalCollectionCall,
};

std::string_view escape_reason_name(EscapeReason r);

struct EscapeVerdict {
  bool escaped = false;
  EscapeReason reason = EscapeReason::ReturnedValue;
  std::string detail;  // slot, global or collection function

  static EscapeVerdict local() { return {}; }
};

/// Escaped when the object, or a heap ancestor, still has a Return, param
/// slot, global or collection owner.
EscapeVerdict escape_analysis(const Heap &heap, ObjectId object);

enum class LeakRule {
  ScopeExit,        // unreleased and unescaped when the function returns
  GlobalOverwrite,  // lost when the global slot holding it was overwritten
};

std::string_view leak_rule_name(LeakRule r);

struct Finding {
  std::string function;
  Span alloc_site;   // call in `function` that produced the object
  Span origin_site;  // the allocation itself, possibly inside a callee
  std::vector<std::string> alloc_chain;
  std::string leaked_path;
  std::string trigger;
  std::vector<Span> witness;
  /// Triggers of every path that leaked this site, in witness order.
  std::vector<std::string> alternates;
  LeakRule rule = LeakRule::ScopeExit;
  bool low_confidence = false;  // only Unknown-feasibility paths leak it
  OwnershipTrace trace;         // events of the retained path

  bool operator==(const Finding &) const = default;
};

/// Scope-exit leaks on one terminal state. Objects lost by a global
/// overwrite are left to global_slot_check.
std::vector<Finding> check_path(const PathState &state, const SymTable &syms,
                                const std::string &function);
std::vector<Finding> global_slot_check(const PathState &state, const SymTable &syms,
                                       const std::string &function);

/// One finding per (function, alloc_site). Keeps the lexicographically
/// first witness and collects every trigger as an alternate.
std::vector<Finding> dedupe(std::vector<Finding> candidates);

struct CandidateAnalysis {
  std::vector<Finding> findings;
  std::vector<Diagnostic> diagnostics;
  std::size_t paths = 0;
  bool truncated = false;
};

CandidateAnalysis analyze_candidate(FunctionId function, const Program &program,
                                    const SummaryStore &store,
                                    const AnalysisConfig &config);

} // namespace leakscan

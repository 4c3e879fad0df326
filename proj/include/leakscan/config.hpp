#pragma once

#include "leakscan/source.hpp"

#include <string>
#include <string_view>

namespace leakscan {

struct AnalysisConfig {
  int loop_bound = 3;
  int inline_bb_limit = 100;
  int max_call_depth = 4;
  int path_budget = 4096;
  int solver_timeout_atoms = 256;
  /// Summary-mode limits per summarized function.
  int summary_path_budget = 256;
  int summary_block_budget = 10000;
  /// Block visits per candidate in detection mode.
  int block_budget = 200000;

  bool operator==(const AnalysisConfig &) const = default;
};

enum class DiagKind {
  BudgetExceeded,
  PrecisionLoss,  // conditional summary applied without deepening
  LoopBound,      // path dropped at an unrolling bound with no loop exit
  SummaryShape,   // summary path does not fit the call
  DoubleFree,
  FixpointLimit,
};

std::string_view diag_kind_name(DiagKind k);

struct Diagnostic {
  DiagKind kind = DiagKind::BudgetExceeded;
  std::string function;
  Span site;
  std::string message;

  auto operator<=>(const Diagnostic &) const = default;
};

} // namespace leakscan

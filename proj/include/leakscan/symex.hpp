//===- symex.hpp - Under-constrained symbolic execution -----------*- C++ -*-===//
//
// Executes one function from its entry with symbolic parameters. Calls are
// handled by kind: seed allocators and free are built in, functions with an
// unconditional summary are applied from the summary, conditional ones are
// inlined while depth and size limits allow, and everything else returns a
// fresh symbol with no heap effect.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "leakscan/config.hpp"
#include "leakscan/graphs.hpp"
#include "leakscan/heapmodel.hpp"
#include "leakscan/solver.hpp"
#include "leakscan/summaries.hpp"
#include "leakscan/values.hpp"

#include <map>
#include <memory>
#include <set>
#include <vector>

namespace leakscan {

enum class ExecMode { Detect, Summary };

struct Activation {
  FunctionId function = -1;
  int frame = 0;
};

struct PathState {
  std::map<Loc, SymValue> store;
  Heap heap;
  PathConstraint constraint;
  std::vector<Activation> frames;
  int next_frame = 0;
  int depth = 0;  // inlining depth; 0 in the analyzed function
  /// Call expressions being inlined, outermost first, with callee names.
  std::vector<std::pair<Span, std::string>> calls;
  std::vector<Span> witness;
  std::set<ObjectId> zeroed;  // calloc'd objects: unset fields read as 0
  /// Input symbols passed to a deallocator (summary mode bookkeeping).
  std::vector<SymId> freed_inputs;

  // Set on terminal states.
  SymValue ret;
  SolverVerdict verdict = SolverVerdict::Sat;

  int frame() const { return frames.back().frame; }
  FunctionId function() const { return frames.back().function; }
};

struct ExecResult {
  std::vector<PathState> paths;  // terminal, feasible (Sat or Unknown)
  std::vector<Diagnostic> diagnostics;
  bool truncated = false;
  std::shared_ptr<SymTable> syms;
  std::vector<SymValue> params;  // entry values of the parameters
};

/// Value reached by following `steps` from `base`, and the location that
/// holds it (Invalid when the value is the base itself).
struct Resolved {
  SymValue value;
  Loc slot;
};

class Engine {
public:
  Engine(const Program &program, const SummaryStore &store,
         const AnalysisConfig &config, ExecMode mode = ExecMode::Detect);

  ExecResult run(FunctionId function);

  /// Apply a summary at a call with evaluated arguments. Returns the call's
  /// value: the new object for a Return allocation, otherwise a fresh
  /// symbol.
  SymValue apply_summary(PathState &state, const Expr &call,
                         const FunctionSummary &summary,
                         const std::vector<SymValue> &args);

  /// Inline a defined callee. Each outcome carries the returned value.
  std::vector<std::pair<PathState, SymValue>>
  deepen(PathState state, const Expr &call, FunctionId callee,
         const std::vector<SymValue> &args);

  const SymTable &syms() const { return *syms_; }

private:
  struct Out {
    PathState state;
    SymValue value;
  };
  struct LOut {
    PathState state;
    Loc loc;
  };
  using Outs = std::vector<Out>;

  const Cfg &cfg(FunctionId f);
  Outs exec_body(PathState state, FunctionId f, const std::vector<SymValue> &args);
  Outs eval(PathState state, const Expr &e);
  std::vector<LOut> lvalue(PathState state, const Expr &e);
  Outs eval_call(PathState state, const Expr &e);
  Outs dispatch_call(PathState state, const Expr &e, std::vector<SymValue> args);
  Outs eval_binary(PathState state, const Expr &e);
  /// Feasible arms of a truth test, false arm first.
  std::vector<std::pair<PathState, bool>> split_truth(PathState state,
                                                      const SymValue &v);
  Resolved resolve(PathState &state, const SymValue &base,
                   const std::vector<PathStep> &steps);
  int param_index(const FunctionSummary &summary, const AccessPath &path);

  SymValue load(PathState &state, const Loc &loc);
  void store(PathState &state, const Loc &loc, SymValue value, Span site);
  SymValue combine(BinOp op, const SymValue &a, const SymValue &b);
  ObjectId new_object(PathState &state, Span site, const std::string &callee);
  void free_value(PathState &state, const SymValue &v, Span site);
  Owner slot_owner(const Loc &loc) const;
  void mark_orphans(PathState &state, ObjectId first_new, int first_frame,
                    const SymValue &ret);

  /// Add an atom if it keeps the path feasible.
  bool assume(PathState &state, const Atom &atom);
  bool budget_fork();
  void diag(DiagKind kind, Span site, std::string message);

  const Program &program_;
  const SummaryStore &store_;
  AnalysisConfig config_;
  ExecMode mode_;
  std::shared_ptr<SymTable> syms_;
  std::map<FunctionId, Cfg> cfgs_;
  std::vector<Diagnostic> diags_;
  std::string current_;
  int paths_ = 1;
  long blocks_ = 0;
  bool truncated_ = false;
};

ExecResult execute_candidate(FunctionId function, const Program &program,
                             const SummaryStore &store,
                             const AnalysisConfig &config,
                             ExecMode mode = ExecMode::Detect);

} // namespace leakscan

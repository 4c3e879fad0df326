//===- graphs.hpp - Control-flow and call graphs ------------------*- C++ -*-===//
#pragma once

#include "leakscan/ast.hpp"
#include "leakscan/program.hpp"

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace leakscan {

using BlockId = int;

enum class EdgeKind {
  Unconditional,
  TrueArm,
  FalseArm,
  SwitchCase,
  SwitchDefault,
  Goto,
  LoopBack,
};

std::string_view edge_kind_name(EdgeKind k);

struct CfgEdge {
  BlockId from = -1;
  BlockId to = -1;
  EdgeKind kind = EdgeKind::Unconditional;
  const Expr *cond = nullptr;   // TrueArm / FalseArm
  std::int64_t case_value = 0;  // SwitchCase
  /// Closes a cycle. Set on LoopBack edges and on backward gotos that form
  /// a cycle.
  bool back_edge = false;
  /// For structured loops: where control goes once the unrolling bound is
  /// reached. -1 for goto cycles.
  BlockId loop_exit = -1;
};

enum class Terminator { Jump, Branch, Switch, Return };

/// One straight-line step: a declaration (with optional initializer) or an
/// expression evaluated for its effects.
struct BlockItem {
  const Stmt *decl = nullptr;  // Decl statement, or null
  const Expr *expr = nullptr;  // initializer / expression, may be null for decls
  Span span;
};

struct BasicBlock {
  BlockId id = -1;
  std::vector<BlockItem> items;
  Terminator term = Terminator::Jump;
  /// Branch condition, switch scrutinee, or returned value (may be null).
  const Expr *term_expr = nullptr;
  Span term_span;
  std::vector<int> out;  // indices into Cfg::edges, in creation order
  std::vector<int> in;
};

struct Cfg {
  const Function *function = nullptr;
  std::vector<BasicBlock> blocks;
  std::vector<CfgEdge> edges;
  BlockId entry = 0;
  BlockId exit = 1;

  const BasicBlock &block(BlockId id) const { return blocks.at(id); }
  const CfgEdge &edge(int index) const { return edges.at(index); }
  /// Blocks other than the synthetic entry and exit.
  std::size_t interior_count() const { return blocks.size() - 2; }
  /// Blocks not reachable from entry (code after return, unused labels).
  std::vector<BlockId> dead_blocks() const;
  std::size_t back_edge_count() const;
};

/// Lower a function body to basic blocks. Short-circuit `&&`, `||` and `!`
/// in branch conditions become separate blocks, so every TrueArm/FalseArm
/// edge carries an atomic condition.
Cfg build_cfg(const Function &function);

struct CallEdge {
  FunctionId caller = -1;
  FunctionId callee = -1;
  Span site;
  const Expr *call = nullptr;
};

class CallGraph {
public:
  std::vector<FunctionId> nodes;
  std::vector<std::string> names;  // indexed by FunctionId
  std::vector<CallEdge> edges;  // sorted by call-site span

  std::vector<const CallEdge *> calls_from(FunctionId f) const;
  std::vector<FunctionId> callers_of(FunctionId f) const;
  std::vector<FunctionId> callees_of(FunctionId f) const;
  std::string to_dot(const Program &program) const;
};

CallGraph build_call_graph(const Program &program);

struct CandidateSet {
  std::set<FunctionId> functions;
  bool contains(FunctionId f) const { return functions.count(f) != 0; }
};

class SummaryStore;

/// Direct callers of allocator functions.
CandidateSet identify_candidates(const CallGraph &cg, const SummaryStore &store);
CandidateSet identify_candidates(const CallGraph &cg,
                                 const std::function<bool(FunctionId)> &is_allocator);

/// Integer value of a constant expression (literals, unary minus, arithmetic).
std::optional<std::int64_t> fold_constant(const Expr &e);

} // namespace leakscan

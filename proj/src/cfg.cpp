#include "leakscan/graphs.hpp"

#include <map>

namespace leakscan {

std::string_view edge_kind_name(EdgeKind k) {
  switch (k) {
  case EdgeKind::Unconditional: return "unconditional";
  case EdgeKind::TrueArm: return "true";
  case EdgeKind::FalseArm: return "false";
  case EdgeKind::SwitchCase: return "case";
  case EdgeKind::SwitchDefault: return "default";
  case EdgeKind::Goto: return "goto";
  case EdgeKind::LoopBack: return "loop-back";
  }
  return "?";
}

std::optional<std::int64_t> fold_constant(const Expr &e) {
  switch (e.kind) {
  case ExprKind::IntLit:
    return e.value;
  case ExprKind::Cast:
    return fold_constant(e.kid(0));
  case ExprKind::Unary: {
    auto v = fold_constant(e.kid(0));
    if (!v)
      return std::nullopt;
    switch (e.un) {
    case UnOp::Neg: return -*v;
    case UnOp::Not: return *v == 0;
    case UnOp::BitNot: return ~*v;
    }
    return std::nullopt;
  }
  case ExprKind::Binary: {
    auto a = fold_constant(e.kid(0));
    auto b = fold_constant(e.kid(1));
    if (!a || !b)
      return std::nullopt;
    switch (e.bin) {
    case BinOp::Add: return *a + *b;
    case BinOp::Sub: return *a - *b;
    case BinOp::Mul: return *a * *b;
    case BinOp::Div: return *b ? std::optional(*a / *b) : std::nullopt;
    case BinOp::Mod: return *b ? std::optional(*a % *b) : std::nullopt;
    case BinOp::Shl: return *a << *b;
    case BinOp::Shr: return *a >> *b;
    case BinOp::BitAnd: return *a & *b;
    case BinOp::BitOr: return *a | *b;
    case BinOp::BitXor: return *a ^ *b;
    default: return std::nullopt;
    }
  }
  default:
    return std::nullopt;
  }
}

namespace {

/// An edge whose source is known but whose target is not yet created.
struct Pending {
  BlockId from;
  EdgeKind kind;
  const Expr *cond = nullptr;
  std::int64_t case_value = 0;
};

using PendingList = std::vector<Pending>;

class Builder {
public:
  explicit Builder(const Function &fn) {
    cfg_.function = &fn;
    new_block(); // entry
    new_block(); // exit
    pending_.push_back({cfg_.entry, EdgeKind::Unconditional});
  }

  Cfg run() {
    stmt(*cfg_.function->body);
    // Falling off the end returns.
    patch(pending_, cfg_.exit);
    pending_.clear();
    if (cur_ >= 0)
      link(cur_, cfg_.exit, EdgeKind::Unconditional);
    for (auto &[edge, label] : gotos_)
      attach_target(edge, labels_.at(label));
    tag_goto_cycles();
    return std::move(cfg_);
  }

private:
  BlockId new_block() {
    BasicBlock b;
    b.id = static_cast<BlockId>(cfg_.blocks.size());
    cfg_.blocks.push_back(std::move(b));
    return cfg_.blocks.back().id;
  }

  int link(BlockId from, BlockId to, EdgeKind kind, const Expr *cond = nullptr,
           std::int64_t value = 0) {
    CfgEdge e;
    e.from = from;
    e.to = to;
    e.kind = kind;
    e.cond = cond;
    e.case_value = value;
    e.back_edge = kind == EdgeKind::LoopBack;
    int index = static_cast<int>(cfg_.edges.size());
    cfg_.edges.push_back(e);
    cfg_.blocks[from].out.push_back(index);
    if (to >= 0)
      cfg_.blocks[to].in.push_back(index);
    return index;
  }

  void attach_target(int edge, BlockId to) {
    cfg_.edges[edge].to = to;
    cfg_.blocks[to].in.push_back(edge);
  }

  void patch(const PendingList &list, BlockId to) {
    for (const Pending &p : list)
      link(p.from, to, p.kind, p.cond, p.case_value);
  }

  /// Close the current block (if any) into the pending list.
  void seal() {
    if (cur_ >= 0) {
      pending_.push_back({cur_, EdgeKind::Unconditional});
      cur_ = -1;
    }
  }

  /// Start a fresh block that all pending edges flow into.
  BlockId start() {
    seal();
    cur_ = new_block();
    patch(pending_, cur_);
    pending_.clear();
    return cur_;
  }

  BlockId current() {
    if (cur_ < 0)
      start();
    return cur_;
  }

  /// Lower a branch condition starting in the current block. Returns the
  /// pending true and false exits.
  std::pair<PendingList, PendingList> cond(const Expr &e) {
    if (e.kind == ExprKind::Binary &&
        (e.bin == BinOp::LogAnd || e.bin == BinOp::LogOr)) {
      auto [ta, fa] = cond(e.kid(0));
      bool is_and = e.bin == BinOp::LogAnd;
      pending_ = is_and ? ta : fa;
      start();
      auto [tb, fb] = cond(e.kid(1));
      if (is_and) {
        fa.insert(fa.end(), fb.begin(), fb.end());
        return {tb, fa};
      }
      ta.insert(ta.end(), tb.begin(), tb.end());
      return {ta, fb};
    }
    if (e.kind == ExprKind::Unary && e.un == UnOp::Not &&
        is_logical(e.kid(0))) {
      auto [t, f] = cond(e.kid(0));
      return {f, t};
    }
    BlockId b = current();
    BasicBlock &blk = cfg_.blocks[b];
    blk.term = Terminator::Branch;
    blk.term_expr = &e;
    blk.term_span = e.span;
    cur_ = -1;
    return {{{b, EdgeKind::TrueArm, &e}}, {{b, EdgeKind::FalseArm, &e}}};
  }

  static bool is_logical(const Expr &e) {
    return (e.kind == ExprKind::Binary &&
            (e.bin == BinOp::LogAnd || e.bin == BinOp::LogOr)) ||
           (e.kind == ExprKind::Unary && e.un == UnOp::Not &&
            is_logical(e.kid(0)));
  }

  struct LoopCtx {
    PendingList *continues = nullptr;
    PendingList breaks;
    bool is_switch = false;
  };

  struct SwitchCtx {
    BlockId block;
    bool has_default = false;
  };

  void stmt(const Stmt &s) {
    switch (s.kind) {
    case StmtKind::Block:
      for (const auto &b : s.body)
        stmt(*b);
      return;
    case StmtKind::Decl:
      cfg_.blocks[current()].items.push_back({&s, s.expr.get(), s.span});
      return;
    case StmtKind::ExprStmt:
      cfg_.blocks[current()].items.push_back({nullptr, s.expr.get(), s.span});
      return;
    case StmtKind::Empty:
      return;
    case StmtKind::If: {
      auto [t, f] = cond(*s.expr);
      pending_ = t;
      start();
      stmt(*s.body[0]);
      seal();
      PendingList after = std::move(pending_);
      pending_ = f;
      if (s.body.size() > 1) {
        start();
        stmt(*s.body[1]);
        seal();
      }
      pending_.insert(pending_.end(), after.begin(), after.end());
      return;
    }
    case StmtKind::While:
      loop(s.expr.get(), nullptr, *s.body[0]);
      return;
    case StmtKind::For:
      if (s.init)
        stmt(*s.init);
      loop(s.expr.get(), s.step.get(), *s.body[0]);
      return;
    case StmtKind::Switch:
      switch_stmt(s);
      return;
    case StmtKind::Case:
    case StmtKind::Default: {
      SwitchCtx &sw = switches_.back();
      start();
      if (s.kind == StmtKind::Case)
        link(sw.block, cur_, EdgeKind::SwitchCase, nullptr,
             fold_constant(*s.expr).value_or(0));
      else {
        link(sw.block, cur_, EdgeKind::SwitchDefault);
        sw.has_default = true;
      }
      return;
    }
    case StmtKind::Label:
      start();
      labels_[s.name] = cur_;
      return;
    case StmtKind::Goto: {
      BlockId b = current();
      gotos_.emplace_back(link(b, -1, EdgeKind::Goto), s.name);
      cur_ = -1;
      return;
    }
    case StmtKind::Return: {
      BlockId b = current();
      BasicBlock &blk = cfg_.blocks[b];
      blk.term = Terminator::Return;
      blk.term_expr = s.expr.get();
      blk.term_span = s.span;
      link(b, cfg_.exit, EdgeKind::Unconditional);
      cur_ = -1;
      return;
    }
    case StmtKind::Break: {
      BlockId b = current();
      loops_.back().breaks.push_back({b, EdgeKind::Unconditional});
      cur_ = -1;
      return;
    }
    case StmtKind::Continue: {
      BlockId b = current();
      for (auto it = loops_.rbegin(); it != loops_.rend(); ++it)
        if (!it->is_switch) {
          it->continues->push_back({b, EdgeKind::Unconditional});
          break;
        }
      cur_ = -1;
      return;
    }
    }
  }

  void loop(const Expr *condition, const Expr *step, const Stmt &body) {
    BlockId header = start();
    PendingList exits;
    if (condition) {
      auto [t, f] = cond(*condition);
      exits = f;
      pending_ = t;
    } else {
      seal();
    }
    PendingList continues;
    loops_.push_back({&continues, {}, false});
    start();
    stmt(body);
    seal();
    LoopCtx ctx = std::move(loops_.back());
    loops_.pop_back();

    // Body ends and continues meet in a latch unless a single plain edge
    // already reaches the header, so each loop has exactly one back-edge.
    std::vector<int> back_edges;
    pending_.insert(pending_.end(), continues.begin(), continues.end());
    bool single = pending_.size() == 1 &&
                  pending_[0].kind == EdgeKind::Unconditional;
    if (step || (!pending_.empty() && !single)) {
      BlockId latch = start();
      if (step)
        cfg_.blocks[latch].items.push_back({nullptr, step, step->span});
      back_edges.push_back(link(latch, header, EdgeKind::LoopBack));
      cur_ = -1;
    } else {
      for (const Pending &p : pending_)
        back_edges.push_back(link(p.from, header, EdgeKind::LoopBack));
    }
    pending_ = exits;
    pending_.insert(pending_.end(), ctx.breaks.begin(), ctx.breaks.end());
    BlockId join = start();
    for (int e : back_edges)
      cfg_.edges[e].loop_exit = join;
  }

  void switch_stmt(const Stmt &s) {
    BlockId b = current();
    BasicBlock &blk = cfg_.blocks[b];
    blk.term = Terminator::Switch;
    blk.term_expr = s.expr.get();
    blk.term_span = s.expr->span;
    cur_ = -1;
    switches_.push_back({b});
    loops_.push_back({nullptr, {}, true});
    stmt(*s.body[0]);
    seal();
    LoopCtx ctx = std::move(loops_.back());
    loops_.pop_back();
    SwitchCtx sw = switches_.back();
    switches_.pop_back();
    pending_.insert(pending_.end(), ctx.breaks.begin(), ctx.breaks.end());
    if (!sw.has_default)
      pending_.push_back({sw.block, EdgeKind::SwitchDefault});
  }

  void tag_goto_cycles() {
    // Iterative DFS from entry; an edge into a block on the stack closes a
    // cycle.
    std::vector<int> state(cfg_.blocks.size(), 0); // 0 new, 1 on stack, 2 done
    std::vector<std::pair<BlockId, std::size_t>> stack{{cfg_.entry, 0}};
    state[cfg_.entry] = 1;
    while (!stack.empty()) {
      auto &[b, i] = stack.back();
      const auto &out = cfg_.blocks[b].out;
      if (i == out.size()) {
        state[b] = 2;
        stack.pop_back();
        continue;
      }
      CfgEdge &e = cfg_.edges[out[i++]];
      if (e.back_edge)
        continue;
      if (state[e.to] == 1)
        e.back_edge = true;
      else if (state[e.to] == 0) {
        state[e.to] = 1;
        stack.emplace_back(e.to, 0);
      }
    }
  }

  Cfg cfg_;
  BlockId cur_ = -1;
  PendingList pending_;
  std::vector<LoopCtx> loops_;
  std::vector<SwitchCtx> switches_;
  std::map<std::string, BlockId> labels_;
  std::vector<std::pair<int, std::string>> gotos_;
};

} // namespace

std::vector<BlockId> Cfg::dead_blocks() const {
  std::vector<bool> seen(blocks.size(), false);
  std::vector<BlockId> work{entry};
  seen[entry] = true;
  while (!work.empty()) {
    BlockId b = work.back();
    work.pop_back();
    for (int e : blocks[b].out) {
      BlockId to = edges[e].to;
      if (!seen[to]) {
        seen[to] = true;
        work.push_back(to);
      }
    }
  }
  std::vector<BlockId> dead;
  for (const auto &b : blocks)
    if (!seen[b.id] && b.id != exit)
      dead.push_back(b.id);
  return dead;
}

std::size_t Cfg::back_edge_count() const {
  std::size_t n = 0;
  for (const auto &e : edges)
    n += e.back_edge;
  return n;
}

Cfg build_cfg(const Function &function) { return Builder(function).run(); }

} // namespace leakscan

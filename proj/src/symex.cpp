//===- symex.cpp - Under-constrained symbolic execution ------------------===//

#include "leakscan/symex.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace leakscan {

std::string_view diag_kind_name(DiagKind k) {
  switch (k) {
  case DiagKind::BudgetExceeded: return "budget-exceeded";
  case DiagKind::PrecisionLoss: return "precision-loss";
  case DiagKind::LoopBound: return "loop-bound";
  case DiagKind::SummaryShape: return "summary-shape";
  case DiagKind::DoubleFree: return "double-free";
  case DiagKind::FixpointLimit: return "fixpoint-limit";
  }
  return "?";
}

namespace {

bool contains_ci(std::string_view hay, std::string_view needle) {
  auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(),
                        [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a)) ==
                                 std::tolower(static_cast<unsigned char>(b));
                        });
  return it != hay.end();
}

bool collection_name(std::string_view name) {
  return contains_ci(name, "add") || contains_ci(name, "insert") ||
         contains_ci(name, "create");
}

bool rooted_at_global(const Expr &e) {
  switch (e.kind) {
  case ExprKind::Ident:
    return e.ref == RefKind::Global;
  case ExprKind::Member:
  case ExprKind::AddrOf:
  case ExprKind::Deref:
  case ExprKind::Cast:
    return rooted_at_global(e.kid(0));
  default:
    return false;
  }
}

Loc param_loc(int frame, int index, const std::string &name) {
  return Loc::local(frame, -(index + 1), name);
}

std::optional<bool> known_truth(const SymValue &v) {
  switch (v.kind) {
  case ValKind::Int: return v.num != 0;
  case ValKind::Null: return false;
  case ValKind::HeapRef:
  case ValKind::LocRef: return true;
  default: return std::nullopt;
  }
}

bool is_pointer_value(const SymValue &v) {
  return v.kind == ValKind::HeapRef || v.kind == ValKind::LocRef;
}

std::optional<std::int64_t> concrete(const SymValue &v) {
  if (v.kind == ValKind::Int)
    return v.num;
  if (v.kind == ValKind::Null)
    return 0;
  return std::nullopt;
}

BinOp flipped(BinOp op) {
  switch (op) {
  case BinOp::Eq: return BinOp::Ne;
  case BinOp::Ne: return BinOp::Eq;
  case BinOp::Lt: return BinOp::Ge;
  case BinOp::Le: return BinOp::Gt;
  case BinOp::Gt: return BinOp::Le;
  case BinOp::Ge: return BinOp::Lt;
  default: return op;
  }
}

std::optional<std::int64_t> fold(BinOp op, std::int64_t a, std::int64_t b) {
  switch (op) {
  case BinOp::Add: return a + b;
  case BinOp::Sub: return a - b;
  case BinOp::Mul: return a * b;
  case BinOp::Div: return b == 0 ? std::nullopt : std::optional(a / b);
  case BinOp::Mod: return b == 0 ? std::nullopt : std::optional(a % b);
  case BinOp::Shl: return b < 0 || b > 62 ? std::nullopt : std::optional(a << b);
  case BinOp::Shr: return b < 0 || b > 62 ? std::nullopt : std::optional(a >> b);
  case BinOp::BitAnd: return a & b;
  case BinOp::BitOr: return a | b;
  case BinOp::BitXor: return a ^ b;
  case BinOp::Eq: return a == b;
  case BinOp::Ne: return a != b;
  case BinOp::Lt: return a < b;
  case BinOp::Le: return a <= b;
  case BinOp::Gt: return a > b;
  case BinOp::Ge: return a >= b;
  case BinOp::LogAnd: return a && b;
  case BinOp::LogOr: return a || b;
  }
  return std::nullopt;
}

std::string join(const std::vector<std::string> &parts) {
  std::string out;
  for (const auto &p : parts)
    out += (out.empty() ? "" : ".") + p;
  return out;
}

} // namespace

Engine::Engine(const Program &program, const SummaryStore &store,
               const AnalysisConfig &config, ExecMode mode)
    : program_(program), store_(store), config_(config), mode_(mode),
      syms_(std::make_shared<SymTable>()) {}

const Cfg &Engine::cfg(FunctionId f) {
  auto it = cfgs_.find(f);
  if (it == cfgs_.end())
    it = cfgs_.emplace(f, build_cfg(*program_.function(f).def)).first;
  return it->second;
}

void Engine::diag(DiagKind kind, Span site, std::string message) {
  Diagnostic d{kind, current_, site, std::move(message)};
  if (std::find(diags_.begin(), diags_.end(), d) == diags_.end())
    diags_.push_back(std::move(d));
}

bool Engine::budget_fork() {
  int limit = mode_ == ExecMode::Summary ? config_.summary_path_budget
                                         : config_.path_budget;
  if (paths_ >= limit) {
    if (!truncated_)
      diag(DiagKind::BudgetExceeded, {}, "path budget of " + std::to_string(limit) +
                                             " reached; remaining forks dropped");
    truncated_ = true;
    return false;
  }
  ++paths_;
  return true;
}

bool Engine::assume(PathState &state, const Atom &atom) {
  state.constraint.add(atom);
  SolverLimits limits;
  limits.max_atoms = static_cast<std::size_t>(config_.solver_timeout_atoms);
  return solve(state.constraint, limits) != SolverVerdict::Unsat;
}

ExecResult Engine::run(FunctionId function) {
  const FunctionInfo &fi = program_.function(function);
  current_ = fi.name;
  paths_ = 1;
  blocks_ = 0;
  truncated_ = false;
  diags_.clear();

  ExecResult res;
  res.syms = syms_;
  std::vector<SymValue> args;
  for (std::size_t i = 0; i < fi.def->params.size(); ++i) {
    const Param &p = fi.def->params[i];
    if (p.type.is_record_value())
      args.push_back(SymValue::unknown());
    else
      args.push_back(SymValue::sym(syms_->fresh_param(static_cast<int>(i), p.name)));
  }
  res.params = args;

  SolverLimits limits;
  limits.max_atoms = static_cast<std::size_t>(config_.solver_timeout_atoms);
  for (Out &o : exec_body(PathState{}, function, args)) {
    o.state.ret = o.value;
    o.state.verdict = solve(o.state.constraint, limits);
    if (o.state.verdict == SolverVerdict::Unsat)
      continue;
    res.paths.push_back(std::move(o.state));
  }
  for (const PathState &p : res.paths)
    for (const HeapDiagnostic &h : p.heap.diagnostics)
      if (h.kind == HeapDiagKind::DoubleFree)
        diag(DiagKind::DoubleFree, h.site, "object freed twice");
  res.diagnostics = diags_;
  res.truncated = truncated_;
  return res;
}

ExecResult execute_candidate(FunctionId function, const Program &program,
                             const SummaryStore &store,
                             const AnalysisConfig &config, ExecMode mode) {
  Engine engine(program, store, config, mode);
  return engine.run(function);
}

//===----------------------------------------------------------------------===//
// Function bodies
//===----------------------------------------------------------------------===//

Engine::Outs Engine::exec_body(PathState state, FunctionId f,
                               const std::vector<SymValue> &args) {
  const Cfg &g = cfg(f);
  const Function &fn = *program_.function(f).def;
  Activation act{f, state.next_frame++};
  state.frames.push_back(act);
  for (std::size_t i = 0; i < fn.params.size() && i < args.size(); ++i)
    state.store[param_loc(act.frame, static_cast<int>(i), fn.params[i].name)] = args[i];

  struct Item {
    PathState st;
    BlockId block;
    std::map<int, int> loops;  // back-edge index -> traversals
  };
  std::vector<Item> stack;
  stack.push_back({std::move(state), g.entry, {}});
  Outs done;
  long block_limit = mode_ == ExecMode::Summary ? config_.summary_block_budget
                                                : config_.block_budget;

  auto finish = [&](PathState st, SymValue value, Span site) {
    if (st.depth == 0 && value.kind == ValKind::HeapRef &&
        st.heap.at(static_cast<ObjectId>(value.num)).state == ObjState::Allocated)
      record_return(st.heap, static_cast<ObjectId>(value.num), site);
    st.frames.pop_back();
    done.push_back({std::move(st), std::move(value)});
  };

  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    if (it.block == g.exit) {
      finish(std::move(it.st), SymValue::unknown(), fn.span);
      continue;
    }
    if (++blocks_ > block_limit) {
      if (!truncated_)
        diag(DiagKind::BudgetExceeded, {}, "block budget reached");
      truncated_ = true;
      continue;
    }
    const BasicBlock &b = g.block(it.block);

    std::vector<PathState> cur;
    cur.push_back(std::move(it.st));
    for (const BlockItem &item : b.items) {
      std::vector<PathState> next;
      for (PathState &s : cur) {
        s.witness.push_back(item.span);
        if (item.decl) {
          Loc l = Loc::local(s.frame(), item.decl->slot, item.decl->name);
          if (item.expr) {
            for (Out &o : eval(std::move(s), *item.expr)) {
              store(o.state, l, o.value, item.span);
              next.push_back(std::move(o.state));
            }
          } else {
            s.store.erase(l);
            next.push_back(std::move(s));
          }
        } else if (item.expr) {
          for (Out &o : eval(std::move(s), *item.expr))
            next.push_back(std::move(o.state));
        } else {
          next.push_back(std::move(s));
        }
      }
      cur = std::move(next);
    }

    std::vector<std::pair<PathState, int>> succ;  // (state, edge index)
    for (PathState &s : cur) {
      switch (b.term) {
      case Terminator::Jump:
        if (!b.out.empty())
          succ.emplace_back(std::move(s), b.out.front());
        else
          finish(std::move(s), SymValue::unknown(), b.term_span);
        break;
      case Terminator::Return: {
        s.witness.push_back(b.term_span);
        if (!b.term_expr) {
          finish(std::move(s), SymValue::unknown(), b.term_span);
          break;
        }
        for (Out &o : eval(std::move(s), *b.term_expr))
          finish(std::move(o.state), std::move(o.value), b.term_span);
        break;
      }
      case Terminator::Branch: {
        s.witness.push_back(b.term_span);
        int f_edge = -1, t_edge = -1;
        for (int e : b.out) {
          if (g.edge(e).kind == EdgeKind::FalseArm)
            f_edge = e;
          else if (g.edge(e).kind == EdgeKind::TrueArm)
            t_edge = e;
        }
        for (Out &o : eval(std::move(s), *b.term_expr))
          for (auto &[arm, taken] : split_truth(std::move(o.state), o.value))
            succ.emplace_back(std::move(arm), taken ? t_edge : f_edge);
        break;
      }
      case Terminator::Switch: {
        s.witness.push_back(b.term_span);
        int def = -1;
        std::vector<int> cases;
        for (int e : b.out) {
          if (g.edge(e).kind == EdgeKind::SwitchDefault)
            def = e;
          else if (g.edge(e).kind == EdgeKind::SwitchCase)
            cases.push_back(e);
        }
        for (Out &o : eval(std::move(s), *b.term_expr)) {
          const SymValue &v = o.value;
          if (auto c = concrete(v)) {
            int pick = def;
            for (int e : cases)
              if (g.edge(e).case_value == *c) {
                pick = e;
                break;
              }
            if (pick >= 0)
              succ.emplace_back(std::move(o.state), pick);
            continue;
          }
          bool symbolic = v.symbolic();
          std::vector<std::pair<PathState, int>> arms;
          if (def >= 0) {
            PathState d = o.state;
            bool ok = true;
            if (symbolic)
              for (int e : cases)
                ok = ok && assume(d, {BinOp::Ne, v, SymValue::integer(g.edge(e).case_value)});
            if (ok)
              arms.emplace_back(std::move(d), def);
          }
          for (int e : cases) {
            PathState c = o.state;
            if (!symbolic || assume(c, {BinOp::Eq, v, SymValue::integer(g.edge(e).case_value)}))
              arms.emplace_back(std::move(c), e);
          }
          for (std::size_t i = 0; i < arms.size(); ++i)
            if (i == 0 || budget_fork())
              succ.push_back(std::move(arms[i]));
        }
        break;
      }
      }
    }

    std::vector<Item> pending;
    for (auto &[st, edge_index] : succ) {
      if (edge_index < 0)
        continue;
      const CfgEdge &e = g.edge(edge_index);
      Item next{std::move(st), e.to, it.loops};
      if (e.back_edge) {
        int &n = next.loops[edge_index];
        if (++n >= config_.loop_bound) {
          if (e.loop_exit < 0) {
            diag(DiagKind::LoopBound, b.term_span,
                 "path dropped after " + std::to_string(config_.loop_bound) +
                     " traversals of a goto cycle");
            continue;
          }
          next.block = e.loop_exit;
        }
      }
      pending.push_back(std::move(next));
    }
    for (auto r = pending.rbegin(); r != pending.rend(); ++r)
      stack.push_back(std::move(*r));
  }
  return done;
}

std::vector<std::pair<PathState, bool>> Engine::split_truth(PathState state,
                                                            const SymValue &v) {
  std::vector<std::pair<PathState, bool>> out;
  if (auto t = known_truth(v)) {
    out.emplace_back(std::move(state), *t);
    return out;
  }
  if (v.kind == ValKind::Unknown) {
    PathState f = state;
    out.emplace_back(std::move(f), false);
    if (budget_fork())
      out.emplace_back(std::move(state), true);
    return out;
  }
  Atom a = Atom::truth(v);
  PathState f = state;
  bool f_ok = assume(f, a.negated());
  bool t_ok = assume(state, a);
  if (f_ok && t_ok && !budget_fork())
    t_ok = false;
  if (f_ok)
    out.emplace_back(std::move(f), false);
  if (t_ok)
    out.emplace_back(std::move(state), true);
  return out;
}

//===----------------------------------------------------------------------===//
// Memory
//===----------------------------------------------------------------------===//

SymValue Engine::load(PathState &state, const Loc &loc) {
  if (loc.root == RootKind::Invalid)
    return SymValue::unknown();
  auto it = state.store.find(loc);
  if (it != state.store.end())
    return it->second;
  switch (loc.root) {
  case RootKind::Global:
  case RootKind::Deref: {
    SymValue s = SymValue::sym(syms_->fresh_loaded(loc));
    state.store[loc] = s;
    return s;
  }
  case RootKind::Object:
    if (state.zeroed.count(loc.id))
      return SymValue::integer(0);
    return SymValue::unknown();
  default:
    return SymValue::unknown();
  }
}

Owner Engine::slot_owner(const Loc &loc) const {
  std::string name = syms_->render(loc);
  if (loc.root == RootKind::Global)
    return Owner::global(name);
  // Memory reached from a global pointer belongs to the global.
  SymId s = loc.id;
  for (int guard = 0; guard < 64; ++guard) {
    const SymInfo &info = syms_->info(s);
    if (info.origin != SymOrigin::Loaded)
      break;
    if (info.from.root == RootKind::Global)
      return Owner::global(name);
    if (info.from.root != RootKind::Deref)
      break;
    s = info.from.id;
  }
  return Owner::param_slot(name);
}

void Engine::store(PathState &state, const Loc &loc, SymValue value, Span site) {
  if (loc.root == RootKind::Invalid)
    return;
  Heap &heap = state.heap;
  auto it = state.store.find(loc);
  if (it != state.store.end()) {
    if (it->second == value)
      return;
    if (it->second.kind == ValKind::HeapRef) {
      auto old = static_cast<ObjectId>(it->second.num);
      if (heap.at(old).state == ObjState::Allocated) {
        if (loc.root == RootKind::Object) {
          const MemoryObject &parent = heap.at(loc.id);
          auto c = parent.children.find(join(loc.fields));
          if (c != parent.children.end() && c->second == old)
            detach_inner(heap, loc.id, c->first);
        } else if (loc.root == RootKind::Global || loc.root == RootKind::Deref) {
          Owner o = slot_owner(loc);
          if (heap.at(old).owners.count(o))
            release_owner(heap, old, o, site);
        }
      }
    }
  }
  if (value.kind == ValKind::HeapRef) {
    auto o = static_cast<ObjectId>(value.num);
    if (heap.at(o).state == ObjState::Allocated) {
      switch (loc.root) {
      case RootKind::Global:
      case RootKind::Deref:
        transfer_ownership(heap, o, slot_owner(loc), site);
        break;
      case RootKind::Object: {
        if (heap.at(loc.id).state != ObjState::Allocated)
          break;
        bool cycle = false;
        for (ObjectId a = loc.id; a >= 0; a = heap.at(a).parent)
          if (a == o) {
            cycle = true;
            break;
          }
        if (cycle)
          break;
        if (heap.at(o).parent < 0)
          attach_inner(heap, loc.id, join(loc.fields), o, site);
        else
          copy_ref(heap, o, site);
        break;
      }
      default:
        break;
      }
    }
  }
  state.store[loc] = std::move(value);
}

ObjectId Engine::new_object(PathState &state, Span site, const std::string &callee) {
  ObjectId id = allocate(state.heap, site,
                         std::make_shared<PathConstraint>(state.constraint));
  MemoryObject &m = state.heap.at(id);
  m.entry_site = state.calls.empty() ? site : state.calls.front().first;
  for (const auto &c : state.calls)
    m.alloc_chain.push_back(c.second);
  m.alloc_chain.push_back(callee);
  return id;
}

void Engine::free_value(PathState &state, const SymValue &v, Span site) {
  if (v.kind == ValKind::HeapRef)
    free_object(state.heap, static_cast<ObjectId>(v.num), site);
  else if (v.kind == ValKind::Sym)
    state.freed_inputs.push_back(static_cast<SymId>(v.num));
}

void Engine::mark_orphans(PathState &state, ObjectId first_new, int first_frame,
                          const SymValue &ret) {
  Heap &heap = state.heap;
  auto count = static_cast<ObjectId>(heap.objects.size());
  if (first_new >= count)
    return;
  std::vector<char> seen(count, 0);
  std::vector<ObjectId> work;
  auto add = [&](const SymValue &v) {
    ObjectId o = -1;
    if (v.kind == ValKind::HeapRef)
      o = static_cast<ObjectId>(v.num);
    else if (v.kind == ValKind::LocRef && v.loc->root == RootKind::Object)
      o = v.loc->id;
    if (o >= 0 && !seen[o]) {
      seen[o] = 1;
      work.push_back(o);
    }
  };
  add(ret);
  for (const auto &[loc, v] : state.store) {
    if (loc.root == RootKind::Local && loc.frame >= first_frame)
      continue;
    if (loc.root == RootKind::Object && loc.id >= first_new)
      continue;
    add(v);
  }
  for (ObjectId o = first_new; o < count; ++o)
    if (escapes(heap, o))
      add(SymValue::heap(o));
  while (!work.empty()) {
    ObjectId o = work.back();
    work.pop_back();
    for (const auto &[f, c] : heap.at(o).children)
      add(SymValue::heap(c));
    for (auto it = state.store.lower_bound(Loc::object(o));
         it != state.store.end() && it->first.root == RootKind::Object &&
         it->first.id == o;
         ++it)
      add(it->second);
  }
  for (ObjectId o = first_new; o < count; ++o)
    if (!seen[o] && heap.at(o).state == ObjState::Allocated)
      heap.at(o).orphaned = true;
}

//===----------------------------------------------------------------------===//
// Expressions
//===----------------------------------------------------------------------===//

SymValue Engine::combine(BinOp op, const SymValue &a, const SymValue &b) {
  auto ca = concrete(a), cb = concrete(b);
  if (ca && cb) {
    auto r = fold(op, *ca, *cb);
    return r ? SymValue::integer(*r) : SymValue::unknown();
  }
  if (a.kind == ValKind::Unknown || b.kind == ValKind::Unknown)
    return SymValue::unknown();
  if (is_comparison(op)) {
    if (is_pointer_value(a) || is_pointer_value(b)) {
      if (op != BinOp::Eq && op != BinOp::Ne)
        return SymValue::unknown();
      // Distinct allocations, frame addresses and unconstrained inputs
      // never alias; a valid pointer is never null.
      bool eq = is_pointer_value(a) && is_pointer_value(b) && a == b;
      return SymValue::integer((op == BinOp::Eq) == eq ? 1 : 0);
    }
    return SymValue::binary(op, a, b);
  }
  if (is_pointer_value(a) || is_pointer_value(b))
    return SymValue::unknown();
  if ((op == BinOp::Add || op == BinOp::Sub) && cb && *cb == 0)
    return a;
  if (op == BinOp::Add && ca && *ca == 0)
    return b;
  return SymValue::binary(op, a, b);
}

std::vector<Engine::LOut> Engine::lvalue(PathState state, const Expr &e) {
  std::vector<LOut> out;
  switch (e.kind) {
  case ExprKind::Ident: {
    Loc l;
    if (e.ref == RefKind::Local)
      l = Loc::local(state.frame(), e.index, e.name);
    else if (e.ref == RefKind::Param)
      l = param_loc(state.frame(), e.index, e.name);
    else if (e.ref == RefKind::Global)
      l = Loc::global(e.name);
    out.push_back({std::move(state), std::move(l)});
    return out;
  }
  case ExprKind::Deref:
    for (Out &o : eval(std::move(state), e.kid(0)))
      out.push_back({std::move(o.state), pointee(o.value)});
    return out;
  case ExprKind::Member:
    if (e.arrow) {
      for (Out &o : eval(std::move(state), e.kid(0))) {
        Loc l = pointee(o.value);
        out.push_back({std::move(o.state),
                       l.root == RootKind::Invalid ? l : l.field(e.name)});
      }
    } else {
      for (LOut &o : lvalue(std::move(state), e.kid(0)))
        out.push_back({std::move(o.state),
                       o.loc.root == RootKind::Invalid ? o.loc : o.loc.field(e.name)});
    }
    return out;
  case ExprKind::Cast:
    return lvalue(std::move(state), e.kid(0));
  default:
    for (Out &o : eval(std::move(state), e))
      out.push_back({std::move(o.state), Loc::invalid()});
    return out;
  }
}

Engine::Outs Engine::eval(PathState state, const Expr &e) {
  Outs out;
  switch (e.kind) {
  case ExprKind::Ident:
    if (e.ref == RefKind::Function || e.ref == RefKind::External ||
        e.ref == RefKind::Unresolved) {
      out.push_back({std::move(state), SymValue::unknown()});
      return out;
    }
    [[fallthrough]];
  case ExprKind::Member:
  case ExprKind::Deref:
    for (LOut &l : lvalue(std::move(state), e)) {
      SymValue v = load(l.state, l.loc);
      out.push_back({std::move(l.state), std::move(v)});
    }
    return out;
  case ExprKind::IntLit:
    out.push_back({std::move(state), SymValue::integer(e.value)});
    return out;
  case ExprKind::NullLit:
    out.push_back({std::move(state), SymValue::null()});
    return out;
  case ExprKind::StringLit:
    out.push_back({std::move(state), SymValue::address(Loc::global("<string>"))});
    return out;
  case ExprKind::AddrOf:
    for (LOut &l : lvalue(std::move(state), e.kid(0)))
      out.push_back({std::move(l.state), l.loc.root == RootKind::Invalid
                                             ? SymValue::unknown()
                                             : SymValue::address(l.loc)});
    return out;
  case ExprKind::Unary:
    for (Out &o : eval(std::move(state), e.kid(0))) {
      SymValue v;
      switch (e.un) {
      case UnOp::Neg:
        v = combine(BinOp::Sub, SymValue::integer(0), o.value);
        break;
      case UnOp::Not:
        if (auto t = known_truth(o.value))
          v = SymValue::integer(*t ? 0 : 1);
        else if (o.value.kind == ValKind::Unknown)
          v = SymValue::unknown();
        else if (o.value.kind == ValKind::Expr && is_comparison(o.value.expr->op))
          v = SymValue::binary(flipped(o.value.expr->op), o.value.expr->lhs,
                               o.value.expr->rhs);
        else
          v = SymValue::binary(BinOp::Eq, o.value, SymValue::integer(0));
        break;
      case UnOp::BitNot:
        if (auto c = concrete(o.value))
          v = SymValue::integer(~*c);
        break;
      }
      out.push_back({std::move(o.state), std::move(v)});
    }
    return out;
  case ExprKind::Binary:
    return eval_binary(std::move(state), e);
  case ExprKind::Assign:
    for (LOut &l : lvalue(std::move(state), e.kid(0))) {
      for (Out &r : eval(std::move(l.state), e.kid(1))) {
        SymValue v = r.value;
        if (e.assign != AssignOp::Set)
          v = combine(e.assign == AssignOp::AddSet ? BinOp::Add : BinOp::Sub,
                      load(r.state, l.loc), v);
        store(r.state, l.loc, v, e.span);
        out.push_back({std::move(r.state), std::move(v)});
      }
    }
    return out;
  case ExprKind::IncDec:
    for (LOut &l : lvalue(std::move(state), e.kid(0))) {
      SymValue old = load(l.state, l.loc);
      SymValue nv = combine(e.increment ? BinOp::Add : BinOp::Sub, old,
                            SymValue::integer(1));
      store(l.state, l.loc, nv, e.span);
      out.push_back({std::move(l.state), e.prefix ? nv : old});
    }
    return out;
  case ExprKind::Call:
    return eval_call(std::move(state), e);
  case ExprKind::Cast:
    return eval(std::move(state), e.kid(0));
  case ExprKind::SizeofType:
    out.push_back({std::move(state), SymValue::integer(type_size(program_, e.type))});
    return out;
  case ExprKind::SizeofExpr:
    out.push_back({std::move(state), SymValue::integer(8)});
    return out;
  }
  out.push_back({std::move(state), SymValue::unknown()});
  return out;
}

Engine::Outs Engine::eval_binary(PathState state, const Expr &e) {
  Outs out;
  if (e.bin == BinOp::LogAnd || e.bin == BinOp::LogOr) {
    bool short_value = e.bin == BinOp::LogOr;  // result when lhs decides
    for (Out &l : eval(std::move(state), e.kid(0)))
      for (auto &[s, t] : split_truth(std::move(l.state), l.value)) {
        if (t == short_value) {
          out.push_back({std::move(s), SymValue::integer(short_value ? 1 : 0)});
          continue;
        }
        for (Out &r : eval(std::move(s), e.kid(1)))
          for (auto &[s2, t2] : split_truth(std::move(r.state), r.value))
            out.push_back({std::move(s2), SymValue::integer(t2 ? 1 : 0)});
      }
    return out;
  }
  for (Out &l : eval(std::move(state), e.kid(0)))
    for (Out &r : eval(std::move(l.state), e.kid(1)))
      out.push_back({std::move(r.state), combine(e.bin, l.value, r.value)});
  return out;
}

//===----------------------------------------------------------------------===//
// Calls
//===----------------------------------------------------------------------===//

Engine::Outs Engine::eval_call(PathState state, const Expr &e) {
  std::vector<std::pair<PathState, std::vector<SymValue>>> partial;
  partial.emplace_back(std::move(state), std::vector<SymValue>{});
  for (const auto &k : e.kids) {
    std::vector<std::pair<PathState, std::vector<SymValue>>> next;
    for (auto &[s, args] : partial)
      for (Out &o : eval(std::move(s), *k)) {
        auto a = args;
        a.push_back(std::move(o.value));
        next.emplace_back(std::move(o.state), std::move(a));
      }
    partial = std::move(next);
  }
  Outs out;
  for (auto &[s, args] : partial)
    for (Out &o : dispatch_call(std::move(s), e, std::move(args)))
      out.push_back(std::move(o));
  return out;
}

Engine::Outs Engine::dispatch_call(PathState state, const Expr &e,
                                   std::vector<SymValue> args) {
  const std::string &name = e.name;
  Heap &heap = state.heap;
  for (const SymValue &a : args)
    if (a.kind == ValKind::HeapRef)
      record_call_arg(heap, static_cast<ObjectId>(a.num), name, e.span);

  if (collection_name(name) &&
      std::any_of(e.kids.begin(), e.kids.end(),
                  [](const ExprPtr &k) { return rooted_at_global(*k); }))
    for (const SymValue &a : args)
      if (a.kind == ValKind::HeapRef &&
          heap.at(static_cast<ObjectId>(a.num)).state == ObjState::Allocated)
        transfer_ownership(heap, static_cast<ObjectId>(a.num),
                           Owner::collection(name), e.span);

  Outs out;
  auto single = [&](SymValue v) {
    out.push_back({std::move(state), std::move(v)});
    return std::move(out);
  };

  if (name == "malloc" || name == "calloc" || name == "strdup") {
    ObjectId id = new_object(state, e.span, name);
    if (name == "calloc")
      state.zeroed.insert(id);
    return single(SymValue::heap(id));
  }
  if (name == "realloc") {
    if (!args.empty() && args[0].kind != ValKind::Null) {
      const SymValue &old = args[0];
      if (old.kind != ValKind::HeapRef ||
          heap.at(static_cast<ObjectId>(old.num)).state == ObjState::Allocated)
        free_value(state, old, e.span);
    }
    return single(SymValue::heap(new_object(state, e.span, name)));
  }
  if (name == "free") {
    if (!args.empty())
      free_value(state, args[0], e.span);
    return single(SymValue::unknown());
  }

  const FunctionSummary *summary = store_.find(name);
  bool mad = summary && summary->type != FunctionType::None;
  const FunctionInfo *fi = program_.function_named(name);
  if (mad && fi && fi->defined() && summary->conditional) {
    const Cfg &c = cfg(fi->id);
    if (state.depth + 1 <= config_.max_call_depth &&
        c.interior_count() <= static_cast<std::size_t>(config_.inline_bb_limit)) {
      for (auto &[s, v] : deepen(std::move(state), e, fi->id, args))
        out.push_back({std::move(s), std::move(v)});
      return out;
    }
    diag(DiagKind::PrecisionLoss, e.span,
         "conditional summary of " + name + " applied without inlining");
  }
  if (mad) {
    SymValue v = apply_summary(state, e, *summary, args);
    return single(std::move(v));
  }
  return single(SymValue::sym(syms_->fresh_call(name)));
}

std::vector<std::pair<PathState, SymValue>>
Engine::deepen(PathState state, const Expr &call, FunctionId callee,
               const std::vector<SymValue> &args) {
  auto first_new = static_cast<ObjectId>(state.heap.objects.size());
  int first_frame = state.next_frame;
  state.depth++;
  state.calls.emplace_back(call.span, program_.function(callee).name);
  std::vector<std::pair<PathState, SymValue>> out;
  for (Out &o : exec_body(std::move(state), callee, args)) {
    PathState &s = o.state;
    s.depth--;
    s.calls.pop_back();
    mark_orphans(s, first_new, first_frame, o.value);
    for (auto it = s.store.begin(); it != s.store.end();) {
      if (it->first.root == RootKind::Local && it->first.frame >= first_frame)
        it = s.store.erase(it);
      else
        ++it;
    }
    out.emplace_back(std::move(s), std::move(o.value));
  }
  return out;
}

int Engine::param_index(const FunctionSummary &summary, const AccessPath &path) {
  if (path.index >= 0)
    return path.index;
  if (const FunctionInfo *fi = program_.function_named(summary.name); fi && fi->def)
    for (std::size_t i = 0; i < fi->def->params.size(); ++i)
      if (fi->def->params[i].name == path.name)
        return static_cast<int>(i);
  return -1;
}

Resolved Engine::resolve(PathState &state, const SymValue &base,
                         const std::vector<PathStep> &steps) {
  if (steps.empty())
    return {base, Loc::invalid()};
  bool at_value = true;
  SymValue val = base;
  Loc loc;
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    const PathStep &step = steps[i];
    if (step.deref) {
      if (!at_value)
        val = load(state, loc);
      loc = pointee(val);
      at_value = false;
    } else {
      if (at_value)
        return {SymValue::unknown(), Loc::invalid()};
      loc = loc.field(step.field);
    }
    if (loc.root == RootKind::Invalid)
      return {SymValue::unknown(), Loc::invalid()};
  }
  if (at_value)
    return {val, Loc::invalid()};
  return {load(state, loc), loc};
}

SymValue Engine::apply_summary(PathState &state, const Expr &call,
                               const FunctionSummary &summary,
                               const std::vector<SymValue> &args) {
  auto base_of = [&](const AccessPath &p) -> std::optional<SymValue> {
    if (p.base == PathBase::Global)
      return SymValue::address(Loc::global(p.name));
    int idx = param_index(summary, p);
    if (idx < 0 || idx >= static_cast<int>(args.size())) {
      diag(DiagKind::SummaryShape, call.span,
           summary.name + ": no argument for " + p.render());
      return std::nullopt;
    }
    return args[idx];
  };
  auto by_length = [](const AccessPath *a, const AccessPath *b) {
    if (a->steps.size() != b->steps.size())
      return a->steps.size() < b->steps.size();
    return *a < *b;
  };

  std::vector<const AccessPath *> frees;
  for (const AccessPath &p : summary.freed_params)
    frees.push_back(&p);
  std::sort(frees.begin(), frees.end(), by_length);
  std::reverse(frees.begin(), frees.end());
  for (const AccessPath *p : frees) {
    auto base = base_of(*p);
    if (!base)
      continue;
    Resolved r = resolve(state, *base, p->steps);
    if (r.value.kind == ValKind::HeapRef &&
        state.heap.at(static_cast<ObjectId>(r.value.num)).state != ObjState::Allocated)
      continue;
    free_value(state, r.value, call.span);
  }

  SymValue result;
  std::vector<const AccessPath *> rets;
  for (const AccessPath &p : summary.ret_objects)
    rets.push_back(&p);
  std::sort(rets.begin(), rets.end(), by_length);
  for (const AccessPath *p : rets) {
    if (p->steps.size() == 1) {
      if (result.kind != ValKind::HeapRef)
        result = SymValue::heap(new_object(state, call.span, summary.name));
      continue;
    }
    if (result.kind != ValKind::HeapRef)
      continue;
    Resolved r = resolve(state, result, p->steps);
    if (r.slot.root != RootKind::Invalid)
      store(state, r.slot, SymValue::heap(new_object(state, call.span, summary.name)),
            call.span);
  }
  if (result.kind != ValKind::HeapRef)
    result = SymValue::sym(syms_->fresh_call(summary.name));

  std::vector<const AccessPath *> outs;
  for (const AccessPath &p : summary.para_objects)
    outs.push_back(&p);
  for (const AccessPath &p : summary.global_objects)
    outs.push_back(&p);
  std::stable_sort(outs.begin(), outs.end(), by_length);
  for (const AccessPath *p : outs) {
    auto base = base_of(*p);
    if (!base)
      continue;
    Resolved r = resolve(state, *base, p->steps);
    if (r.slot.root == RootKind::Invalid) {
      if (base->kind != ValKind::Null && base->kind != ValKind::Unknown)
        diag(DiagKind::SummaryShape, call.span,
             summary.name + ": cannot store through " + p->render());
      continue;
    }
    store(state, r.slot, SymValue::heap(new_object(state, call.span, summary.name)),
          call.span);
  }
  return result;
}

} // namespace leakscan

#include "leakscan/oracle.hpp"

#include <algorithm>
#include <cctype>

namespace leakscan {
namespace {

struct Val {
  bool ptr = false;
  std::int64_t n = 0;
  int obj = -1;
  std::string key;

  static Val num(std::int64_t v) { return {false, v, -1, {}}; }
  static Val to(int o, std::string k = {}) { return {true, 0, o, std::move(k)}; }
  bool truthy() const { return ptr || n != 0; }
};

enum class ObjKind { Heap, Local, Global, External, Static };

struct Obj {
  ObjKind kind = ObjKind::Heap;
  bool freed = false;
  bool orphan = false;
  bool dead = false;  // local of a finished activation
  bool zero = false;  // missing cells read as 0
  Span site;          // Heap: call in the entry function that produced it
  std::map<std::string, Val> cells;
};

struct Loc {
  int obj;
  std::string key;
};

struct Crash {};

enum class Flow { Normal, Break, Continue, Return, Goto };
struct Sig {
  Flow flow = Flow::Normal;
  std::string label;
};

struct Frame {
  FunctionId fn;
  std::vector<int> locals;
  std::vector<int> params;
  Val ret = Val::num(0);
  std::map<std::string, int> jumps;
};

std::string join(const std::string &key, const std::string &field) {
  return key.empty() ? field : key + "." + field;
}

bool collection_name(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return name.find("add") != std::string::npos ||
         name.find("insert") != std::string::npos ||
         name.find("create") != std::string::npos;
}

bool rooted_at_global(const Expr &e) {
  switch (e.kind) {
  case ExprKind::Ident: return e.ref == RefKind::Global;
  case ExprKind::Member:
  case ExprKind::AddrOf:
  case ExprKind::Deref:
  case ExprKind::Cast: return rooted_at_global(e.kid(0));
  default: return false;
  }
}

/// Replays a prefix of decisions, then takes the first option of each new
/// unknown while recording how many options it had.
class Chooser {
public:
  explicit Chooser(std::vector<int> prefix) : taken_(std::move(prefix)) {}

  int choose(int arity) {
    if (pos_ < taken_.size()) {
      arity_.push_back(arity);
      return taken_[pos_++];
    }
    taken_.push_back(0);
    arity_.push_back(arity);
    ++pos_;
    return 0;
  }

  /// Decision vector of the next run in odometer order, or false when done.
  bool next(std::vector<int> &prefix) const {
    for (std::size_t j = pos_; j-- > 0;)
      if (taken_[j] + 1 < arity_[j]) {
        prefix.assign(taken_.begin(), taken_.begin() + j);
        prefix.push_back(taken_[j] + 1);
        return true;
      }
    return false;
  }

  std::vector<int> taken() const {
    return {taken_.begin(), taken_.begin() + pos_};
  }

private:
  std::vector<int> taken_;
  std::vector<int> arity_;
  std::size_t pos_ = 0;
};

class Interp {
public:
  Interp(const Program &p, const OracleLimits &lim,
         const std::vector<std::int64_t> &domain, Chooser &ch)
      : p_(p), lim_(lim), domain_(domain), ch_(ch) {}

  ConcreteRun run(FunctionId entry) {
    ConcreteRun r;
    for (const auto &[name, g] : p_.globals()) {
      int o = new_obj(ObjKind::Global);
      objs_[o].zero = g.def && g.def->init;
      globals_[name] = o;
    }
    try {
      for (const auto &[name, g] : p_.globals())
        if (g.def && g.def->init)
          objs_[globals_[name]].cells[""] = eval(*g.def->init);
      const Function &f = *p_.function(entry).def;
      std::vector<Val> args;
      for (const Param &prm : f.params) {
        if (prm.type.is_pointer()) {
          int pick = choose(2, 0);
          args.push_back(pick ? Val::to(new_obj(ObjKind::External)) : Val::num(0));
        } else {
          args.push_back(unknown());
        }
      }
      Val ret = call_defined(entry, args, Span{});
      finish(r, ret);
    } catch (const Crash &) {
      r.end = RunEnd::Crashed;
      r.verdicts.clear();
    }
    r.decisions = ch_.taken();
    r.inputs = inputs_;
    r.frees_input = frees_input_;
    return r;
  }

private:
  int new_obj(ObjKind k) {
    objs_.push_back({});
    objs_.back().kind = k;
    return static_cast<int>(objs_.size()) - 1;
  }

  int choose(int arity, std::int64_t shown) {
    int c = ch_.choose(arity);
    inputs_.push_back(shown + c);
    return c;
  }

  Val unknown() {
    int c = ch_.choose(static_cast<int>(domain_.size()));
    inputs_.push_back(domain_[c]);
    return Val::num(domain_[c]);
  }

  void tick() {
    if (++steps_ > lim_.step_budget)
      throw Diverged("oracle run exceeded its step budget");
  }

  Frame &frame() { return frames_.back(); }

  // ---- memory ------------------------------------------------------------

  Loc deref(const Val &v) {
    if (v.ptr)
      return {v.obj, v.key};
    if (v.n == 0)
      throw Crash{};
    auto [it, fresh] = by_int_.try_emplace(v.n, -1);
    if (fresh)
      it->second = new_obj(ObjKind::External);
    return {it->second, {}};
  }

  Val load(const Loc &l) {
    Obj &o = objs_[l.obj];
    auto it = o.cells.find(l.key);
    if (it != o.cells.end())
      return it->second;
    Val v = o.zero ? Val::num(0) : unknown();
    objs_[l.obj].cells[l.key] = v;
    return v;
  }

  void store(const Loc &l, const Val &v) { objs_[l.obj].cells[l.key] = v; }

  bool live_heap(int o) const {
    return objs_[o].kind == ObjKind::Heap && !objs_[o].freed;
  }

  bool held_elsewhere(int target, int except) const {
    for (std::size_t i = 0; i < objs_.size(); ++i) {
      const Obj &o = objs_[i];
      if (static_cast<int>(i) == except || o.dead || o.kind == ObjKind::Local ||
          (o.kind == ObjKind::Heap && o.freed))
        continue;
      for (const auto &[k, v] : o.cells)
        if (v.ptr && v.obj == target)
          return true;
    }
    return false;
  }

  void release(int o) {
    objs_[o].freed = true;
    for (const auto &[k, v] : objs_[o].cells)
      if (v.ptr && v.obj != o && live_heap(v.obj) && !held_elsewhere(v.obj, o))
        release(v.obj);
  }

  void do_free(const Val &v) {
    if (!v.ptr)
      return;
    if (objs_[v.obj].kind == ObjKind::External) {
      frees_input_ = true;
      return;
    }
    if (live_heap(v.obj))
      release(v.obj);
  }

  /// Objects reachable from the given roots through non-freed memory.
  std::vector<bool> reach(const std::vector<int> &roots) const {
    std::vector<bool> seen(objs_.size());
    std::vector<int> work = roots;
    while (!work.empty()) {
      int o = work.back();
      work.pop_back();
      if (o < 0 || seen[o])
        continue;
      seen[o] = true;
      if (objs_[o].kind == ObjKind::Heap && objs_[o].freed)
        continue;
      for (const auto &[k, v] : objs_[o].cells)
        if (v.ptr)
          work.push_back(v.obj);
    }
    return seen;
  }

  std::vector<int> escape_roots(bool with_locals) const {
    std::vector<int> roots(collection_.begin(), collection_.end());
    for (std::size_t i = 0; i < objs_.size(); ++i) {
      ObjKind k = objs_[i].kind;
      if (k == ObjKind::Global || k == ObjKind::External || k == ObjKind::Static ||
          (with_locals && k == ObjKind::Local && !objs_[i].dead))
        roots.push_back(static_cast<int>(i));
    }
    return roots;
  }

  void finish(ConcreteRun &r, const Val &ret) {
    std::vector<int> roots = escape_roots(false);
    if (ret.ptr)
      roots.push_back(ret.obj);
    std::vector<bool> seen = reach(roots);
    std::vector<int> outward_roots;
    if (ret.ptr)
      outward_roots.push_back(ret.obj);
    for (std::size_t i = 0; i < objs_.size(); ++i)
      if (objs_[i].kind == ObjKind::External)
        outward_roots.push_back(static_cast<int>(i));
    std::vector<bool> out = reach(outward_roots);
    for (std::size_t i = 0; i < objs_.size(); ++i) {
      const Obj &o = objs_[i];
      if (o.kind != ObjKind::Heap)
        continue;
      bool &leaks = r.verdicts[o.site];
      if (!o.freed && !o.orphan && !seen[i])
        leaks = true;
      if (!o.freed && out[i])
        r.outward = true;
    }
  }

  // ---- calls -------------------------------------------------------------

  Span attribution(Span here) const {
    return entry_calls_.empty() ? here : entry_calls_.front();
  }

  Val allocate(Span site, bool zero) {
    int o = new_obj(ObjKind::Heap);
    objs_[o].site = attribution(site);
    objs_[o].zero = zero;
    return Val::to(o);
  }

  Val call_defined(FunctionId id, const std::vector<Val> &args, Span site) {
    if (static_cast<int>(frames_.size()) >= lim_.max_depth)
      throw Crash{};
    const Function &f = *p_.function(id).def;
    bool from_entry = frames_.size() == 1;
    if (from_entry)
      entry_calls_.push_back(site);
    std::size_t first = objs_.size();
    frames_.push_back({id, std::vector<int>(f.locals.size(), -1), {}, Val::num(0), {}});
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      int o = new_obj(ObjKind::Local);
      objs_[o].cells[""] = i < args.size() ? args[i] : unknown();
      frame().params.push_back(o);
    }
    Sig s = exec(*f.body);
    if (s.flow == Flow::Goto)
      throw Diverged("goto to unknown label '" + s.label + "'");
    Val ret = frame().ret;
    for (int o : frame().params)
      objs_[o].dead = true;
    for (int o : frame().locals)
      if (o >= 0)
        objs_[o].dead = true;
    for (std::size_t i = first; i < objs_.size(); ++i)
      if (objs_[i].kind == ObjKind::Local)
        objs_[i].dead = true;
    frames_.pop_back();
    if (from_entry)
      entry_calls_.pop_back();
    if (!frames_.empty()) {
      // Unreachable once the callee returned: the callee's own leak.
      std::vector<int> roots = escape_roots(true);
      if (ret.ptr)
        roots.push_back(ret.obj);
      std::vector<bool> seen = reach(roots);
      for (std::size_t i = first; i < objs_.size(); ++i)
        if (live_heap(static_cast<int>(i)) && !seen[i])
          objs_[i].orphan = true;
    }
    return ret;
  }

  Val call(const Expr &e) {
    std::vector<Val> args;
    for (const auto &k : e.kids)
      args.push_back(eval(*k));
    const std::string &name = e.name;
    if (name == "malloc" || name == "strdup")
      return allocate(e.span, false);
    if (name == "calloc")
      return allocate(e.span, true);
    if (name == "realloc") {
      if (!args.empty())
        do_free(args[0]);
      return allocate(e.span, false);
    }
    if (name == "free") {
      if (!args.empty())
        do_free(args[0]);
      return Val::num(0);
    }
    const FunctionInfo *fi = p_.function_named(name);
    if (fi && fi->defined())
      return call_defined(fi->id, args, e.span);
    if (collection_name(name)) {
      bool global_arg = false;
      for (const auto &k : e.kids)
        global_arg = global_arg || rooted_at_global(*k);
      if (global_arg)
        for (const Val &a : args)
          if (a.ptr && objs_[a.obj].kind == ObjKind::Heap)
            collection_.insert(a.obj);
    }
    return unknown();
  }

  // ---- expressions ---------------------------------------------------------

  Loc lvalue(const Expr &e) {
    tick();
    switch (e.kind) {
    case ExprKind::Ident:
      switch (e.ref) {
      case RefKind::Local: {
        int &o = frame().locals.at(e.index);
        if (o < 0)
          o = new_obj(ObjKind::Local);
        return {o, {}};
      }
      case RefKind::Param: return {frame().params.at(e.index), {}};
      case RefKind::Global: return {globals_.at(e.name), {}};
      default: throw Diverged("'" + e.name + "' is not a variable");
      }
    case ExprKind::Member: {
      Loc base = e.arrow ? deref(eval(e.kid(0))) : lvalue(e.kid(0));
      return {base.obj, join(base.key, e.name)};
    }
    case ExprKind::Deref: return deref(eval(e.kid(0)));
    case ExprKind::Cast: return lvalue(e.kid(0));
    default: throw Diverged("expression is not assignable");
    }
  }

  static std::int64_t arith(BinOp op, std::int64_t a, std::int64_t b) {
    switch (op) {
    case BinOp::Add: return a + b;
    case BinOp::Sub: return a - b;
    case BinOp::Mul: return a * b;
    case BinOp::Div:
      if (b == 0)
        throw Crash{};
      return a / b;
    case BinOp::Mod:
      if (b == 0)
        throw Crash{};
      return a % b;
    case BinOp::Shl: return b < 0 || b > 62 ? 0 : a << b;
    case BinOp::Shr: return b < 0 || b > 62 ? 0 : a >> b;
    case BinOp::BitAnd: return a & b;
    case BinOp::BitOr: return a | b;
    case BinOp::BitXor: return a ^ b;
    case BinOp::Eq: return a == b;
    case BinOp::Ne: return a != b;
    case BinOp::Lt: return a < b;
    case BinOp::Le: return a <= b;
    case BinOp::Gt: return a > b;
    case BinOp::Ge: return a >= b;
    default: return 0;
    }
  }

  Val binary(const Expr &e) {
    if (e.bin == BinOp::LogAnd || e.bin == BinOp::LogOr) {
      bool l = eval(e.kid(0)).truthy();
      if (e.bin == BinOp::LogAnd ? !l : l)
        return Val::num(l);
      return Val::num(eval(e.kid(1)).truthy());
    }
    Val a = eval(e.kid(0));
    Val b = eval(e.kid(1));
    if (!a.ptr && !b.ptr)
      return Val::num(arith(e.bin, a.n, b.n));
    if (e.bin == BinOp::Eq || e.bin == BinOp::Ne) {
      // Distinct objects never share an address, and no object is NULL.
      bool same = a.ptr && b.ptr && a.obj == b.obj && a.key == b.key;
      return Val::num((e.bin == BinOp::Eq) == same);
    }
    if (a.ptr && !b.ptr && (e.bin == BinOp::Add || e.bin == BinOp::Sub))
      return a;
    if (b.ptr && !a.ptr && e.bin == BinOp::Add)
      return b;
    return Val::num(0);
  }

  Val eval(const Expr &e) {
    tick();
    switch (e.kind) {
    case ExprKind::IntLit: return Val::num(e.value);
    case ExprKind::NullLit: return Val::num(0);
    case ExprKind::StringLit: {
      auto [it, fresh] = strings_.try_emplace(&e, -1);
      if (fresh)
        it->second = new_obj(ObjKind::Static);
      return Val::to(it->second);
    }
    case ExprKind::Ident:
    case ExprKind::Member:
    case ExprKind::Deref: return load(lvalue(e));
    case ExprKind::AddrOf: {
      Loc l = lvalue(e.kid(0));
      return Val::to(l.obj, l.key);
    }
    case ExprKind::Unary: {
      Val v = eval(e.kid(0));
      switch (e.un) {
      case UnOp::Not: return Val::num(!v.truthy());
      case UnOp::Neg: return Val::num(v.ptr ? 0 : -v.n);
      case UnOp::BitNot: return Val::num(v.ptr ? 0 : ~v.n);
      }
      return Val::num(0);
    }
    case ExprKind::Binary: return binary(e);
    case ExprKind::Assign: {
      Loc l = lvalue(e.kid(0));
      Val v = eval(e.kid(1));
      if (e.assign != AssignOp::Set) {
        Val old = load(l);
        BinOp op = e.assign == AssignOp::AddSet ? BinOp::Add : BinOp::Sub;
        v = old.ptr ? old : v.ptr ? Val::num(0) : Val::num(arith(op, old.n, v.n));
      }
      store(l, v);
      return v;
    }
    case ExprKind::IncDec: {
      Loc l = lvalue(e.kid(0));
      Val old = load(l);
      Val now = old.ptr ? old : Val::num(old.n + (e.increment ? 1 : -1));
      store(l, now);
      return e.prefix ? now : old;
    }
    case ExprKind::Call: return call(e);
    case ExprKind::Cast: return eval(e.kid(0));
    case ExprKind::SizeofType: return Val::num(type_size(p_, e.type));
    case ExprKind::SizeofExpr: return Val::num(8);
    }
    return Val::num(0);
  }

  // ---- statements ----------------------------------------------------------

  Sig exec_items(const std::vector<StmtPtr> &items, std::size_t from) {
    for (std::size_t i = from; i < items.size(); ++i) {
      Sig s = exec(*items[i]);
      if (s.flow == Flow::Goto) {
        auto at = std::find_if(items.begin(), items.end(), [&](const StmtPtr &x) {
          return x->kind == StmtKind::Label && x->name == s.label;
        });
        if (at == items.end())
          return s;
        if (++frame().jumps[s.label] > lim_.loop_bound)
          throw Crash{};
        i = static_cast<std::size_t>(at - items.begin());
        continue;
      }
      if (s.flow != Flow::Normal)
        return s;
    }
    return {};
  }

  Sig loop(const Stmt &s, const Expr *cond, const Expr *step) {
    for (int iter = 0; iter < lim_.loop_bound; ++iter) {
      if (cond && !eval(*cond).truthy())
        break;
      Sig r = exec(*s.body.at(0));
      if (r.flow == Flow::Break)
        break;
      if (r.flow == Flow::Return || r.flow == Flow::Goto)
        return r;
      if (step)
        eval(*step);
    }
    return {};
  }

  Sig exec(const Stmt &s) {
    tick();
    switch (s.kind) {
    case StmtKind::Block: return exec_items(s.body, 0);
    case StmtKind::Decl: {
      int o = new_obj(ObjKind::Local);
      frame().locals.at(s.slot) = o;
      if (s.expr)
        store({o, {}}, eval(*s.expr));
      return {};
    }
    case StmtKind::ExprStmt:
      eval(*s.expr);
      return {};
    case StmtKind::If:
      if (eval(*s.expr).truthy())
        return exec(*s.body.at(0));
      if (s.body.size() > 1)
        return exec(*s.body[1]);
      return {};
    case StmtKind::While: return loop(s, s.expr.get(), nullptr);
    case StmtKind::For:
      if (s.init) {
        Sig i = exec(*s.init);
        if (i.flow != Flow::Normal)
          return i;
      }
      return loop(s, s.expr.get(), s.step.get());
    case StmtKind::Switch: {
      Val v = eval(*s.expr);
      const Stmt &body = *s.body.at(0);
      const auto &items = body.kind == StmtKind::Block ? body.body : s.body;
      std::size_t start = items.size();
      for (std::size_t i = 0; i < items.size() && start == items.size(); ++i)
        if (items[i]->kind == StmtKind::Case) {
          Val c = eval(*items[i]->expr);
          if (!v.ptr && !c.ptr && c.n == v.n)
            start = i;
        }
      if (start == items.size())
        for (std::size_t i = 0; i < items.size(); ++i)
          if (items[i]->kind == StmtKind::Default)
            start = i;
      Sig r = exec_items(items, start);
      return r.flow == Flow::Break ? Sig{} : r;
    }
    case StmtKind::Goto: return {Flow::Goto, s.name};
    case StmtKind::Return:
      frame().ret = s.expr ? eval(*s.expr) : Val::num(0);
      return {Flow::Return, {}};
    case StmtKind::Break: return {Flow::Break, {}};
    case StmtKind::Continue: return {Flow::Continue, {}};
    case StmtKind::Case:
    case StmtKind::Default:
    case StmtKind::Label:
    case StmtKind::Empty: return {};
    }
    return {};
  }

  const Program &p_;
  const OracleLimits &lim_;
  const std::vector<std::int64_t> &domain_;
  Chooser &ch_;
  std::vector<Obj> objs_;
  std::map<std::string, int> globals_;
  std::map<std::int64_t, int> by_int_;
  std::map<const Expr *, int> strings_;
  std::set<int> collection_;
  std::vector<Frame> frames_;
  std::vector<Span> entry_calls_;
  std::vector<std::int64_t> inputs_;
  bool frees_input_ = false;
  long steps_ = 0;
};

std::vector<std::int64_t> value_domain(const Program &p) {
  std::set<std::int64_t> d = {-1, 0, 1};
  auto visit = [&](const Expr &e) {
    if (e.kind == ExprKind::IntLit)
      for (std::int64_t k : {e.value - 1, e.value, e.value + 1})
        d.insert(k);
  };
  for (FunctionId id : p.defined_functions())
    for_each_expr(*p.function(id).def->body, visit);
  return {d.begin(), d.end()};
}

} // namespace

std::vector<ConcreteRun> enumerate_runs(const Program &program, FunctionId entry,
                                        const OracleLimits &limits) {
  if (!program.function(entry).defined())
    throw Error("oracle entry '" + program.function(entry).name + "' has no body");
  std::vector<std::int64_t> domain = value_domain(program);
  std::vector<ConcreteRun> runs;
  std::vector<int> prefix;
  for (;;) {
    if (static_cast<long>(runs.size()) >= limits.max_runs)
      throw Diverged("oracle exceeded " + std::to_string(limits.max_runs) + " runs");
    Chooser ch(prefix);
    runs.push_back(Interp(program, limits, domain, ch).run(entry));
    if (!ch.next(prefix))
      break;
  }
  return runs;
}

std::set<Span> oracle_leak_sites(const std::vector<ConcreteRun> &runs) {
  std::set<Span> out;
  for (const ConcreteRun &r : runs)
    for (const auto &[site, leaks] : r.verdicts)
      if (leaks)
        out.insert(site);
  return out;
}

bool DiffReport::gate_passes() const {
  return false_negatives.empty() &&
         std::all_of(false_positives.begin(), false_positives.end(),
                     [](const SiteVerdict &v) { return v.low_confidence; });
}

DiffReport compare(const std::vector<SiteVerdict> &analyzer,
                   const std::vector<ConcreteRun> &runs) {
  std::set<Span> oracle = oracle_leak_sites(runs);
  DiffReport d;
  std::set<Span> reported;
  for (const SiteVerdict &v : analyzer) {
    reported.insert(v.site);
    if (oracle.count(v.site))
      d.agree.push_back(v.site);
    else
      d.false_positives.push_back(v);
  }
  for (const Span &s : oracle)
    if (!reported.count(s))
      d.false_negatives.push_back(s);
  return d;
}

} // namespace leakscan

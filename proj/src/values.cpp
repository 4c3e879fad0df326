#include "leakscan/values.hpp"

namespace leakscan {

SymValue SymValue::address(Loc l) {
  // &*p is p itself; &*obj is the object reference.
  if (l.fields.empty() && l.root == RootKind::Object)
    return heap(l.id);
  if (l.fields.empty() && l.root == RootKind::Deref)
    return sym(l.id);
  SymValue v{ValKind::LocRef};
  v.loc = std::make_shared<const Loc>(std::move(l));
  return v;
}

SymValue SymValue::binary(BinOp op, SymValue a, SymValue b) {
  SymValue v{ValKind::Expr};
  v.expr = std::make_shared<const ValueExpr>(ValueExpr{op, std::move(a), std::move(b)});
  return v;
}

bool operator==(const SymValue &a, const SymValue &b) {
  if (a.kind != b.kind)
    return false;
  switch (a.kind) {
  case ValKind::Int:
  case ValKind::Sym:
  case ValKind::HeapRef:
    return a.num == b.num;
  case ValKind::LocRef:
    return *a.loc == *b.loc;
  case ValKind::Expr:
    return a.expr->op == b.expr->op && a.expr->lhs == b.expr->lhs &&
           a.expr->rhs == b.expr->rhs;
  case ValKind::Null:
  case ValKind::Unknown:
    return true;
  }
  return false;
}

Loc pointee(const SymValue &v) {
  switch (v.kind) {
  case ValKind::HeapRef:
    return Loc::object(static_cast<ObjectId>(v.num));
  case ValKind::Sym:
    return Loc::deref(static_cast<SymId>(v.num));
  case ValKind::LocRef:
    return *v.loc;
  default:
    return Loc::invalid();
  }
}

SymId SymTable::add(SymInfo info) {
  syms_.push_back(std::move(info));
  return static_cast<SymId>(syms_.size() - 1);
}

SymId SymTable::fresh_param(int index, std::string name) {
  SymInfo i;
  i.origin = SymOrigin::Param;
  i.param = index;
  i.name = std::move(name);
  return add(std::move(i));
}

SymId SymTable::fresh_loaded(const Loc &from) {
  SymInfo i;
  i.origin = SymOrigin::Loaded;
  i.from = from;
  i.name = render(from);
  return add(std::move(i));
}

SymId SymTable::fresh_call(const std::string &callee) {
  SymInfo i;
  i.origin = SymOrigin::CallResult;
  i.callee = callee;
  int n = ++call_counts_[callee];
  i.name = callee + "()";
  if (n > 1)
    i.name += "#" + std::to_string(n);
  return add(std::move(i));
}

SymId SymTable::fresh(std::string name) {
  SymInfo i;
  i.name = std::move(name);
  return add(std::move(i));
}

namespace {

/// ".a.b" or "->a.b": the first separator differs for pointer roots.
std::string join_fields(const std::vector<std::string> &fields,
                        const char *first) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i)
    out += (i == 0 ? first : ".") + fields[i];
  return out;
}

bool is_arith(BinOp op) { return !is_comparison(op) && op != BinOp::LogAnd && op != BinOp::LogOr; }

} // namespace

std::string SymTable::render(const Loc &l) const {
  switch (l.root) {
  case RootKind::Local:
  case RootKind::Global:
    return l.name + join_fields(l.fields, ".");
  case RootKind::Deref: {
    std::string base = render(SymValue::sym(l.id));
    if (l.fields.empty())
      return "*" + base;
    return base + join_fields(l.fields, "->");
  }
  case RootKind::Object:
    return "obj#" + std::to_string(l.id) + join_fields(l.fields, "->");
  case RootKind::Invalid:
    return "<invalid>";
  }
  return "?";
}

std::string SymTable::render(const SymValue &v) const {
  switch (v.kind) {
  case ValKind::Int:
    return std::to_string(v.num);
  case ValKind::Null:
    return "NULL";
  case ValKind::Sym:
    return v.num >= 0 && static_cast<std::size_t>(v.num) < syms_.size()
               ? syms_[v.num].name
               : "s" + std::to_string(v.num);
  case ValKind::HeapRef:
    return "obj#" + std::to_string(v.num);
  case ValKind::LocRef:
    return "&" + render(*v.loc);
  case ValKind::Unknown:
    return "?";
  case ValKind::Expr: {
    const ValueExpr &e = *v.expr;
    auto side = [&](const SymValue &s) {
      std::string r = render(s);
      // Arithmetic operands of a comparison read fine without parentheses.
      if (s.kind == ValKind::Expr &&
          (is_arith(e.op) || !is_arith(s.expr->op)))
        return "(" + r + ")";
      return r;
    };
    return side(e.lhs) + " " + std::string(binop_spelling(e.op)) + " " +
           side(e.rhs);
  }
  }
  return "?";
}

} // namespace leakscan

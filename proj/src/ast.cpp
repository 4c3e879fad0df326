#include "leakscan/ast.hpp"

#include <sstream>

namespace leakscan {

std::string TypeRef::spelling() const {
  std::string s = name;
  if (stars > 0) {
    s += ' ';
    s.append(static_cast<std::size_t>(stars), '*');
  }
  return s;
}

const Field *RecordDecl::field(std::string_view n) const {
  for (const Field &f : fields)
    if (f.name == n)
      return &f;
  return nullptr;
}

std::string_view binop_spelling(BinOp op) {
  switch (op) {
  case BinOp::Add: return "+";
  case BinOp::Sub: return "-";
  case BinOp::Mul: return "*";
  case BinOp::Div: return "/";
  case BinOp::Mod: return "%";
  case BinOp::Shl: return "<<";
  case BinOp::Shr: return ">>";
  case BinOp::BitAnd: return "&";
  case BinOp::BitOr: return "|";
  case BinOp::BitXor: return "^";
  case BinOp::Eq: return "==";
  case BinOp::Ne: return "!=";
  case BinOp::Lt: return "<";
  case BinOp::Le: return "<=";
  case BinOp::Gt: return ">";
  case BinOp::Ge: return ">=";
  case BinOp::LogAnd: return "&&";
  case BinOp::LogOr: return "||";
  }
  return "?";
}

bool is_comparison(BinOp op) {
  switch (op) {
  case BinOp::Eq:
  case BinOp::Ne:
  case BinOp::Lt:
  case BinOp::Le:
  case BinOp::Gt:
  case BinOp::Ge:
    return true;
  default:
    return false;
  }
}

//===----------------------------------------------------------------------===//
// Structural equality
//===----------------------------------------------------------------------===//

bool same_structure(const Expr &a, const Expr &b) {
  if (a.kind != b.kind || a.kids.size() != b.kids.size())
    return false;
  switch (a.kind) {
  case ExprKind::Ident:
  case ExprKind::StringLit:
  case ExprKind::Call:
    if (a.name != b.name)
      return false;
    break;
  case ExprKind::IntLit:
    if (a.value != b.value)
      return false;
    break;
  case ExprKind::Member:
    if (a.name != b.name || a.arrow != b.arrow)
      return false;
    break;
  case ExprKind::Unary:
    if (a.un != b.un)
      return false;
    break;
  case ExprKind::Binary:
    if (a.bin != b.bin)
      return false;
    break;
  case ExprKind::Assign:
    if (a.assign != b.assign)
      return false;
    break;
  case ExprKind::IncDec:
    if (a.increment != b.increment || a.prefix != b.prefix)
      return false;
    break;
  case ExprKind::Cast:
  case ExprKind::SizeofType:
    if (a.type.name != b.type.name || a.type.stars != b.type.stars)
      return false;
    break;
  default:
    break;
  }
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!same_structure(*a.kids[i], *b.kids[i]))
      return false;
  return true;
}

static bool same_opt(const ExprPtr &a, const ExprPtr &b) {
  if (!a || !b)
    return !a && !b;
  return same_structure(*a, *b);
}

bool same_structure(const Stmt &a, const Stmt &b) {
  if (a.kind != b.kind || a.name != b.name ||
      a.body.size() != b.body.size())
    return false;
  if (a.kind == StmtKind::Decl &&
      (a.type.name != b.type.name || a.type.stars != b.type.stars))
    return false;
  if (!same_opt(a.expr, b.expr) || !same_opt(a.step, b.step))
    return false;
  if (bool(a.init) != bool(b.init) ||
      (a.init && !same_structure(*a.init, *b.init)))
    return false;
  for (std::size_t i = 0; i < a.body.size(); ++i)
    if (!same_structure(*a.body[i], *b.body[i]))
      return false;
  return true;
}

static bool same_type(const TypeRef &a, const TypeRef &b) {
  return a.name == b.name && a.stars == b.stars;
}

bool same_structure(const Unit &a, const Unit &b) {
  if (a.order != b.order || a.records.size() != b.records.size() ||
      a.typedefs.size() != b.typedefs.size() ||
      a.globals.size() != b.globals.size() ||
      a.functions.size() != b.functions.size())
    return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto &ra = a.records[i], &rb = b.records[i];
    if (ra.tag != rb.tag || ra.fields.size() != rb.fields.size())
      return false;
    for (std::size_t j = 0; j < ra.fields.size(); ++j)
      if (ra.fields[j].name != rb.fields[j].name ||
          !same_type(ra.fields[j].type, rb.fields[j].type))
        return false;
  }
  for (std::size_t i = 0; i < a.typedefs.size(); ++i)
    if (a.typedefs[i].name != b.typedefs[i].name ||
        !same_type(a.typedefs[i].type, b.typedefs[i].type))
      return false;
  for (std::size_t i = 0; i < a.globals.size(); ++i) {
    const auto &ga = a.globals[i], &gb = b.globals[i];
    if (ga.name != gb.name || !same_type(ga.type, gb.type) ||
        ga.is_extern != gb.is_extern || !same_opt(ga.init, gb.init))
      return false;
  }
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    const Function &fa = *a.functions[i], &fb = *b.functions[i];
    if (fa.name != fb.name || !same_type(fa.ret, fb.ret) ||
        fa.params.size() != fb.params.size() ||
        fa.has_body() != fb.has_body() || fa.is_static != fb.is_static)
      return false;
    for (std::size_t j = 0; j < fa.params.size(); ++j)
      if (fa.params[j].name != fb.params[j].name ||
          !same_type(fa.params[j].type, fb.params[j].type))
        return false;
    if (fa.has_body() && !same_structure(*fa.body, *fb.body))
      return false;
  }
  return true;
}

//===----------------------------------------------------------------------===//
// Printer
//===----------------------------------------------------------------------===//

namespace {

bool is_atomic(const Expr &e) {
  switch (e.kind) {
  case ExprKind::Ident:
  case ExprKind::IntLit:
  case ExprKind::NullLit:
  case ExprKind::StringLit:
  case ExprKind::Call:
  case ExprKind::SizeofType:
    return true;
  default:
    return false;
  }
}

std::string paren(const Expr &e) {
  if (is_atomic(e))
    return print_expr(e);
  return "(" + print_expr(e) + ")";
}

std::string decl_text(const TypeRef &t, const std::string &name) {
  std::string s = t.name + " ";
  s.append(static_cast<std::size_t>(t.stars), '*');
  return s + name;
}

class Printer {
public:
  std::string str() const { return out_.str(); }

  void stmt(const Stmt &s, int indent) {
    switch (s.kind) {
    case StmtKind::Block:
      pad(indent);
      out_ << "{\n";
      for (const auto &b : s.body)
        stmt(*b, indent + 1);
      pad(indent);
      out_ << "}\n";
      break;
    case StmtKind::Case:
      pad(indent);
      out_ << "case " << print_expr(*s.expr) << ":\n";
      break;
    case StmtKind::Default:
      pad(indent);
      out_ << "default:\n";
      break;
    case StmtKind::Label:
      pad(indent);
      out_ << s.name << ":\n";
      break;
    case StmtKind::If:
      pad(indent);
      out_ << "if (" << print_expr(*s.expr) << ")\n";
      stmt(*s.body[0], indent + 1);
      if (s.body.size() > 1) {
        pad(indent);
        out_ << "else\n";
        stmt(*s.body[1], indent + 1);
      }
      break;
    case StmtKind::While:
      pad(indent);
      out_ << "while (" << print_expr(*s.expr) << ")\n";
      stmt(*s.body[0], indent + 1);
      break;
    case StmtKind::For:
      pad(indent);
      out_ << "for (" << inline_stmt(*s.init) << " "
           << (s.expr ? print_expr(*s.expr) : "") << "; "
           << (s.step ? print_expr(*s.step) : "") << ")\n";
      stmt(*s.body[0], indent + 1);
      break;
    case StmtKind::Switch:
      pad(indent);
      out_ << "switch (" << print_expr(*s.expr) << ")\n";
      stmt(*s.body[0], indent + 1);
      break;
    default:
      pad(indent);
      out_ << inline_stmt(s) << "\n";
      break;
    }
  }

  static std::string inline_stmt(const Stmt &s) {
    switch (s.kind) {
    case StmtKind::Decl:
      return decl_text(s.type, s.name) +
             (s.expr ? " = " + print_expr(*s.expr) : "") + ";";
    case StmtKind::ExprStmt:
      return print_expr(*s.expr) + ";";
    case StmtKind::Goto:
      return "goto " + s.name + ";";
    case StmtKind::Return:
      return s.expr ? "return " + print_expr(*s.expr) + ";" : "return;";
    case StmtKind::Break:
      return "break;";
    case StmtKind::Continue:
      return "continue;";
    default:
      return ";";
    }
  }

  std::ostringstream &out() { return out_; }

private:
  void pad(int indent) { out_ << std::string(indent * 2, ' '); }
  std::ostringstream out_;
};

} // namespace

std::string print_expr(const Expr &e) {
  switch (e.kind) {
  case ExprKind::Ident:
    return e.name;
  case ExprKind::IntLit:
    return e.name.empty() ? std::to_string(e.value) : e.name;
  case ExprKind::NullLit:
    return "NULL";
  case ExprKind::StringLit:
    return e.name;
  case ExprKind::Member:
    return paren(e.kid(0)) + (e.arrow ? "->" : ".") + e.name;
  case ExprKind::AddrOf:
    return "&" + paren(e.kid(0));
  case ExprKind::Deref:
    return "*" + paren(e.kid(0));
  case ExprKind::Unary: {
    const char *op = e.un == UnOp::Neg ? "-" : e.un == UnOp::Not ? "!" : "~";
    return op + paren(e.kid(0));
  }
  case ExprKind::Binary:
    return paren(e.kid(0)) + " " + std::string(binop_spelling(e.bin)) + " " +
           paren(e.kid(1));
  case ExprKind::Assign: {
    const char *op = e.assign == AssignOp::Set      ? " = "
                     : e.assign == AssignOp::AddSet ? " += "
                                                    : " -= ";
    return paren(e.kid(0)) + op + paren(e.kid(1));
  }
  case ExprKind::IncDec: {
    std::string op = e.increment ? "++" : "--";
    return e.prefix ? op + paren(e.kid(0)) : paren(e.kid(0)) + op;
  }
  case ExprKind::Call: {
    std::string s = e.name + "(";
    for (std::size_t i = 0; i < e.kids.size(); ++i) {
      if (i)
        s += ", ";
      s += print_expr(*e.kids[i]);
    }
    return s + ")";
  }
  case ExprKind::Cast:
    return "(" + e.type.spelling() + ")" + paren(e.kid(0));
  case ExprKind::SizeofType:
    return "sizeof(" + e.type.spelling() + ")";
  case ExprKind::SizeofExpr:
    return "sizeof " + paren(e.kid(0));
  }
  return "?";
}

std::string print_unit(const Unit &u) {
  Printer p;
  auto &out = p.out();
  for (auto [kind, idx] : u.order) {
    switch (kind) {
    case TopKind::Record: {
      const RecordDecl &r = u.records[idx];
      out << "struct " << r.tag << " {\n";
      for (const Field &f : r.fields)
        out << "  " << decl_text(f.type, f.name) << ";\n";
      out << "};\n\n";
      break;
    }
    case TopKind::Typedef: {
      const TypedefDecl &t = u.typedefs[idx];
      out << "typedef " << decl_text(t.type, t.name) << ";\n\n";
      break;
    }
    case TopKind::Global: {
      const GlobalVar &g = u.globals[idx];
      if (g.is_extern)
        out << "extern ";
      if (g.is_static)
        out << "static ";
      out << decl_text(g.type, g.name);
      if (g.init)
        out << " = " << print_expr(*g.init);
      out << ";\n\n";
      break;
    }
    case TopKind::Function: {
      const Function &f = *u.functions[idx];
      if (f.is_static)
        out << "static ";
      out << decl_text(f.ret, f.name) << "(";
      if (f.params.empty())
        out << "void";
      for (std::size_t i = 0; i < f.params.size(); ++i) {
        if (i)
          out << ", ";
        out << decl_text(f.params[i].type, f.params[i].name);
      }
      out << ")";
      if (!f.has_body()) {
        out << ";\n\n";
        break;
      }
      out << "\n";
      p.stmt(*f.body, 0);
      out << "\n";
      break;
    }
    }
  }
  return p.str();
}

} // namespace leakscan

//===- ast.hpp - Mini-C abstract syntax tree ---------------------*- C++ -*-===//
//
// A deliberately small tree: one Expr struct and one Stmt struct, each tagged
// with a kind, rather than a class per node. Parsing fills in local-variable
// resolution; link_program fills in globals and callees.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "leakscan/source.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace leakscan {

/// A spelled type. `name` is the base as written ("int", "struct Decoder",
/// "DecoderPriv"); `record` is the struct tag it resolves to, if any.
struct TypeRef {
  std::string name;
  int stars = 0;        // pointer depth as written
  std::string record;   // resolved struct tag, empty for scalars
  int depth = 0;        // resolved pointer depth (typedef + written)

  bool is_pointer() const { return depth > 0; }
  bool is_record_value() const { return depth == 0 && !record.empty(); }
  std::string spelling() const;
  bool operator==(const TypeRef &) const = default;
};

enum class ExprKind {
  Ident,
  IntLit,
  NullLit,
  StringLit,
  Member,   // base.field or base->field (see `arrow`)
  AddrOf,
  Deref,
  Unary,    // op: Minus, Bang, Tilde
  Binary,   // arithmetic, comparison, && and ||
  Assign,   // op: Assign, PlusAssign, MinusAssign
  IncDec,   // op: PlusPlus/MinusMinus, `prefix` selects ++x vs x++
  Call,
  Cast,
  SizeofType,
  SizeofExpr,
};

enum class BinOp {
  Add, Sub, Mul, Div, Mod, Shl, Shr, BitAnd, BitOr, BitXor,
  Eq, Ne, Lt, Le, Gt, Ge,
  LogAnd, LogOr,
};

enum class UnOp { Neg, Not, BitNot };
enum class AssignOp { Set, AddSet, SubSet };

std::string_view binop_spelling(BinOp op);
bool is_comparison(BinOp op);

/// What an identifier refers to after resolution.
enum class RefKind { Unresolved, Local, Param, Global, Function, External };

struct Expr {
  ExprKind kind{};
  Span span;

  std::string name;    // Ident name, Member field, Call callee, literal text
  std::int64_t value = 0;
  BinOp bin{};
  UnOp un{};
  AssignOp assign{};
  bool arrow = false;  // Member: `->` vs `.`
  bool increment = true;
  bool prefix = true;
  TypeRef type;        // Cast / SizeofType operand
  std::vector<std::unique_ptr<Expr>> kids;

  // resolution
  RefKind ref = RefKind::Unresolved;
  int index = -1;      // local slot, param index, or function id

  const Expr &kid(std::size_t i) const { return *kids.at(i); }
};

using ExprPtr = std::unique_ptr<Expr>;

enum class StmtKind {
  Block,
  Decl,
  ExprStmt,
  If,
  While,
  For,
  Switch,
  Case,
  Default,
  Goto,
  Label,
  Return,
  Break,
  Continue,
  Empty,
};

struct Stmt {
  StmtKind kind{};
  Span span;

  std::string name;                 // Decl variable, Goto/Label target
  TypeRef type;                     // Decl
  int slot = -1;                    // Decl local slot
  ExprPtr expr;                     // Decl init, ExprStmt, conditions, Return, Case value
  ExprPtr step;                     // For
  std::unique_ptr<Stmt> init;       // For
  std::vector<std::unique_ptr<Stmt>> body;  // Block items; If: [then, else?]; loops/switch: [body]
};

using StmtPtr = std::unique_ptr<Stmt>;

struct Param {
  TypeRef type;
  std::string name;
  Span span;
};

struct LocalVar {
  std::string name;
  TypeRef type;
};

struct Function {
  std::string name;
  TypeRef ret;
  std::vector<Param> params;
  StmtPtr body;                     // null for prototypes
  bool is_static = false;
  Span span;
  FileId file = 0;
  std::vector<LocalVar> locals;     // indexed by Decl slot

  bool has_body() const { return body != nullptr; }
};

struct Field {
  TypeRef type;
  std::string name;
};

struct RecordDecl {
  std::string tag;
  std::vector<Field> fields;
  Span span;

  const Field *field(std::string_view name) const;
};

struct TypedefDecl {
  TypeRef type;
  std::string name;
  Span span;
};

struct GlobalVar {
  TypeRef type;
  std::string name;
  ExprPtr init;
  bool is_extern = false;
  bool is_static = false;
  Span span;
};

enum class TopKind { Record, Typedef, Global, Function };

struct Unit {
  FileId file = 0;
  std::string path;
  std::vector<RecordDecl> records;
  std::vector<TypedefDecl> typedefs;
  std::vector<GlobalVar> globals;
  std::vector<std::unique_ptr<Function>> functions;
  /// Declaration order for printing: (kind, index into the matching vector).
  std::vector<std::pair<TopKind, std::size_t>> order;
};

/// Structural equality ignoring spans and resolution results.
bool same_structure(const Expr &a, const Expr &b);
bool same_structure(const Stmt &a, const Stmt &b);
bool same_structure(const Unit &a, const Unit &b);

/// Pretty-print back to Mini-C. Expressions are fully parenthesized, so
/// parse(print(u)) is structurally equal to u.
std::string print_expr(const Expr &e);
std::string print_unit(const Unit &u);

/// Visit every sub-expression of a statement tree, pre-order.
template <typename F> void for_each_expr(const Expr &e, F &&f) {
  f(e);
  for (const auto &k : e.kids)
    for_each_expr(*k, f);
}

template <typename F> void for_each_expr(const Stmt &s, F &&f) {
  if (s.init)
    for_each_expr(*s.init, f);
  if (s.expr)
    for_each_expr(*s.expr, f);
  if (s.step)
    for_each_expr(*s.step, f);
  for (const auto &b : s.body)
    for_each_expr(*b, f);
}

template <typename F> void for_each_stmt(const Stmt &s, F &&f) {
  f(s);
  if (s.init)
    for_each_stmt(*s.init, f);
  for (const auto &b : s.body)
    for_each_stmt(*b, f);
}

} // namespace leakscan

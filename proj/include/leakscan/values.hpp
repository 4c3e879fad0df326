//===- values.hpp - Symbolic values and memory locations ----------*- C++ -*-===//
#pragma once

#include "leakscan/ast.hpp"
#include "leakscan/heapmodel.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace leakscan {

using SymId = int;

enum class RootKind { Local, Global, Deref, Object, Invalid };

/// A memory location: a root plus a path of struct fields.
///   Local   frame/slot of a function activation (name kept for printing)
///   Global  a global variable
///   Deref   the memory an input symbol points to
///   Object  a heap object allocated during analysis
struct Loc {
  RootKind root = RootKind::Invalid;
  int frame = 0;
  int slot = 0;
  int id = -1;         // SymId for Deref, ObjectId for Object
  std::string name;    // variable name for Local and Global
  std::vector<std::string> fields;

  static Loc local(int frame, int slot, std::string name) {
    return {RootKind::Local, frame, slot, -1, std::move(name), {}};
  }
  static Loc global(std::string name) {
    return {RootKind::Global, 0, 0, -1, std::move(name), {}};
  }
  static Loc deref(SymId s) { return {RootKind::Deref, 0, 0, s, {}, {}}; }
  static Loc object(ObjectId o) { return {RootKind::Object, 0, 0, o, {}, {}}; }
  static Loc invalid() { return {}; }

  Loc field(const std::string &f) const {
    Loc l = *this;
    l.fields.push_back(f);
    return l;
  }
  bool same_root(const Loc &o) const {
    return root == o.root && frame == o.frame && slot == o.slot && id == o.id &&
           name == o.name;
  }
  auto operator<=>(const Loc &) const = default;
  bool operator==(const Loc &) const = default;
};

enum class ValKind { Int, Null, Sym, HeapRef, LocRef, Expr, Unknown };

struct ValueExpr;

struct SymValue {
  ValKind kind = ValKind::Unknown;
  std::int64_t num = 0;                   // Int value, SymId, or ObjectId
  std::shared_ptr<const Loc> loc;         // LocRef
  std::shared_ptr<const ValueExpr> expr;  // Expr

  static SymValue integer(std::int64_t v) { return {ValKind::Int, v}; }
  static SymValue null() { return {ValKind::Null}; }
  static SymValue sym(SymId s) { return {ValKind::Sym, s}; }
  static SymValue heap(ObjectId o) { return {ValKind::HeapRef, o}; }
  static SymValue address(Loc l);
  static SymValue unknown() { return {}; }
  static SymValue binary(BinOp op, SymValue a, SymValue b);

  bool is(ValKind k) const { return kind == k; }
  bool is_concrete_scalar() const { return kind == ValKind::Int || kind == ValKind::Null; }
  /// Definitely a valid (non-null) pointer.
  bool is_nonnull_pointer() const {
    return kind == ValKind::HeapRef || kind == ValKind::LocRef;
  }
  bool symbolic() const { return kind == ValKind::Sym || kind == ValKind::Expr; }
};

bool operator==(const SymValue &a, const SymValue &b);
inline bool operator!=(const SymValue &a, const SymValue &b) { return !(a == b); }

struct ValueExpr {
  BinOp op;
  SymValue lhs, rhs;
};

/// The memory a pointer value refers to. Invalid for null, integers and
/// unknown values.
Loc pointee(const SymValue &v);

enum class SymOrigin { Param, Loaded, CallResult, Fresh };

struct SymInfo {
  SymOrigin origin = SymOrigin::Fresh;
  int param = -1;            // Param
  Loc from;                  // Loaded
  std::string callee;        // CallResult
  std::string name;          // display name
};

/// Symbols of one analysis. Ids are unique across every path of the
/// analysis, so forked states can share the table.
class SymTable {
public:
  SymId fresh_param(int index, std::string name);
  SymId fresh_loaded(const Loc &from);
  SymId fresh_call(const std::string &callee);
  SymId fresh(std::string name);

  const SymInfo &info(SymId id) const { return syms_.at(id); }
  std::size_t size() const { return syms_.size(); }

  std::string render(const SymValue &v) const;
  std::string render(const Loc &l) const;

private:
  SymId add(SymInfo info);
  std::vector<SymInfo> syms_;
  std::map<std::string, int> call_counts_;
};

} // namespace leakscan

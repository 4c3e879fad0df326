//===- solver.hpp - Path constraints and a difference-bound solver -*- C++ -*-===//
//
// The decidable fragment: linear atoms over integer symbols whose normal form
// is a difference bound (x - y <= c, x <= c, x >= c), plus disequalities of
// that shape, decided by case splitting. Null is the integer 0. Anything
// else (products of symbols, division, bit operations) makes the verdict
// Unknown unless the supported atoms are already contradictory.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "leakscan/values.hpp"

#include <string>
#include <vector>

namespace leakscan {

/// lhs op rhs, op a comparison. truth(v) is v != 0; not(a) flips op.
struct Atom {
  BinOp op = BinOp::Ne;
  SymValue lhs, rhs;

  Atom negated() const;
  static Atom truth(const SymValue &v);
};

struct PathConstraint {
  std::vector<Atom> atoms;  // conjunction, in append order

  void add(Atom a) { atoms.push_back(std::move(a)); }
  std::string render(const SymTable &syms) const;
};

enum class SolverVerdict { Sat, Unsat, Unknown };

std::string_view verdict_name(SolverVerdict v);

struct SolverLimits {
  std::size_t max_atoms = 256;         // larger conjunctions are Unknown
  std::size_t max_disequalities = 12;  // split at most this many
};

SolverVerdict solve(const PathConstraint &pc, const SolverLimits &limits = {});

} // namespace leakscan

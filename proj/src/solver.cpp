#include "leakscan/solver.hpp"

#include <limits>
#include <map>
#include <optional>

namespace leakscan {

namespace {

BinOp flip(BinOp op) {
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

/// sum(coeff * sym) + k
struct Linear {
  std::map<SymId, std::int64_t> coeffs;
  std::int64_t k = 0;

  void add(const Linear &o, std::int64_t scale) {
    for (auto [s, c] : o.coeffs) {
      coeffs[s] += c * scale;
      if (coeffs[s] == 0)
        coeffs.erase(s);
    }
    k += o.k * scale;
  }
};

std::optional<Linear> linearize(const SymValue &v) {
  Linear out;
  switch (v.kind) {
  case ValKind::Int:
    out.k = v.num;
    return out;
  case ValKind::Null:
    return out;
  case ValKind::Sym:
    out.coeffs[static_cast<SymId>(v.num)] = 1;
    return out;
  case ValKind::Expr: {
    const ValueExpr &e = *v.expr;
    auto a = linearize(e.lhs);
    auto b = linearize(e.rhs);
    if (!a || !b)
      return std::nullopt;
    switch (e.op) {
    case BinOp::Add:
      a->add(*b, 1);
      return a;
    case BinOp::Sub:
      a->add(*b, -1);
      return a;
    case BinOp::Mul:
      if (a->coeffs.empty()) {
        Linear r;
        r.add(*b, a->k);
        return r;
      }
      if (b->coeffs.empty()) {
        Linear r;
        r.add(*a, b->k);
        return r;
      }
      return std::nullopt;
    default:
      return std::nullopt;
    }
  }
  default:
    return std::nullopt;
  }
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0)))
    --q;
  return q;
}

/// x - y <= c with node 0 standing for the constant zero.
struct Bound {
  int x, y;
  std::int64_t c;
};

/// Turn `lin <= 0` into a difference bound, if it has that shape.
/// Returns false when outside the fragment; sets `trivially_false` for a
/// violated constant inequality.
bool to_bound(const Linear &lin, std::map<SymId, int> &nodes,
              std::vector<Bound> &out, bool &trivially_false) {
  auto node = [&](SymId s) {
    auto it = nodes.find(s);
    if (it != nodes.end())
      return it->second;
    int n = static_cast<int>(nodes.size()) + 1;
    nodes[s] = n;
    return n;
  };
  if (lin.coeffs.empty()) {
    if (lin.k > 0)
      trivially_false = true;
    return true;
  }
  if (lin.coeffs.size() == 1) {
    auto [s, c] = *lin.coeffs.begin();
    // c*x + k <= 0
    if (c > 0)
      out.push_back({node(s), 0, floor_div(-lin.k, c)});       // x <= floor(-k/c)
    else
      out.push_back({0, node(s), floor_div(-lin.k, -c)});      // -x <= floor(-k/|c|)
    return true;
  }
  if (lin.coeffs.size() == 2) {
    auto it = lin.coeffs.begin();
    auto [s1, c1] = *it++;
    auto [s2, c2] = *it;
    if (c1 != -c2)
      return false;
    std::int64_t c = c1 > 0 ? c1 : c2;
    SymId pos = c1 > 0 ? s1 : s2, neg = c1 > 0 ? s2 : s1;
    out.push_back({node(pos), node(neg), floor_div(-lin.k, c)});
    return true;
  }
  return false;
}

/// Bellman-Ford negative-cycle check over x - y <= c edges (y -> x, weight c).
bool consistent(const std::vector<Bound> &bounds, int nodes) {
  std::vector<std::int64_t> dist(nodes, 0);
  for (int round = 0; round < nodes; ++round) {
    bool changed = false;
    for (const Bound &b : bounds)
      if (dist[b.y] + b.c < dist[b.x]) {
        dist[b.x] = dist[b.y] + b.c;
        changed = true;
      }
    if (!changed)
      return true;
  }
  for (const Bound &b : bounds)
    if (dist[b.y] + b.c < dist[b.x])
      return false;
  return true;
}

bool split(const std::vector<Linear> &diseqs, std::size_t i,
           std::vector<Bound> &bounds, std::map<SymId, int> &nodes) {
  if (i == diseqs.size())
    return consistent(bounds, static_cast<int>(nodes.size()) + 1);
  // lin != 0  <=>  lin <= -1  or  -lin <= -1
  for (int sign : {1, -1}) {
    Linear l;
    l.add(diseqs[i], sign);
    l.k += 1;
    std::size_t mark = bounds.size();
    bool trivially_false = false;
    to_bound(l, nodes, bounds, trivially_false);
    bool ok = !trivially_false && split(diseqs, i + 1, bounds, nodes);
    bounds.resize(mark);
    if (ok)
      return true;
  }
  return false;
}

bool is_bound_shape(const Linear &lin) {
  if (lin.coeffs.size() <= 1)
    return true;
  if (lin.coeffs.size() > 2)
    return false;
  auto it = lin.coeffs.begin();
  std::int64_t a = it->second;
  return a == -std::next(it)->second;
}

} // namespace

Atom Atom::negated() const { return {flip(op), lhs, rhs}; }

Atom Atom::truth(const SymValue &v) {
  if (v.kind == ValKind::Expr && is_comparison(v.expr->op))
    return {v.expr->op, v.expr->lhs, v.expr->rhs};
  return {BinOp::Ne, v, SymValue::integer(0)};
}

std::string PathConstraint::render(const SymTable &syms) const {
  std::string out;
  for (const Atom &a : atoms) {
    if (!out.empty())
      out += " && ";
    out += syms.render(a.lhs) + " " + std::string(binop_spelling(a.op)) + " " +
           syms.render(a.rhs);
  }
  return out.empty() ? "true" : out;
}

std::string_view verdict_name(SolverVerdict v) {
  switch (v) {
  case SolverVerdict::Sat: return "sat";
  case SolverVerdict::Unsat: return "unsat";
  case SolverVerdict::Unknown: return "unknown";
  }
  return "?";
}

SolverVerdict solve(const PathConstraint &pc, const SolverLimits &limits) {
  if (pc.atoms.size() > limits.max_atoms)
    return SolverVerdict::Unknown;
  bool incomplete = false;
  std::map<SymId, int> nodes;
  std::vector<Bound> bounds;
  std::vector<Linear> diseqs;
  bool trivially_false = false;

  auto leq = [&](const Linear &l) {  // l <= 0
    if (!to_bound(l, nodes, bounds, trivially_false))
      incomplete = true;
  };
  for (const Atom &a : pc.atoms) {
    auto lhs = linearize(a.lhs);
    auto rhs = linearize(a.rhs);
    if (!lhs || !rhs) {
      incomplete = true;
      continue;
    }
    Linear d = *lhs;  // d = lhs - rhs
    d.add(*rhs, -1);
    Linear neg;
    neg.add(d, -1);
    switch (a.op) {
    case BinOp::Le: leq(d); break;
    case BinOp::Lt: d.k += 1; leq(d); break;          // d <= -1
    case BinOp::Ge: leq(neg); break;
    case BinOp::Gt: neg.k += 1; leq(neg); break;
    case BinOp::Eq: leq(d); leq(neg); break;
    case BinOp::Ne:
      if (d.coeffs.empty()) {
        if (d.k == 0)
          trivially_false = true;
      } else if (is_bound_shape(d) && diseqs.size() < limits.max_disequalities) {
        diseqs.push_back(d);
      } else {
        incomplete = true;
      }
      break;
    default:
      incomplete = true;
    }
  }
  if (trivially_false)
    return SolverVerdict::Unsat;
  if (!split(diseqs, 0, bounds, nodes))
    return SolverVerdict::Unsat;
  return incomplete ? SolverVerdict::Unknown : SolverVerdict::Sat;
}

} // namespace leakscan

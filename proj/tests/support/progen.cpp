#include "support/progen.hpp"

#include <sstream>

namespace progen {
namespace {

enum class HelperKind { AllocRet, AllocOut, Dealloc, Wrapper };

struct Helper {
  std::string name;
  HelperKind kind;
};

struct Var {
  std::string name;
  bool node = false;
};

class Gen {
public:
  Gen(std::mt19937_64 &rng, const Limits &limits) : rng_(rng), lim_(limits) {}

  Generated run() {
    out_ << "struct Node {\n  int *child;\n  int v;\n};\n\n"
            "int *g_slot = NULL;\nint *g_list = NULL;\n\n";
    int nhelpers = pick(0, lim_.max_helpers);
    for (int i = 0; i < nhelpers; ++i)
      helper(i);
    entry();
    Generated g;
    g.files.emplace_back("gen.mc", out_.str());
    for (const Helper &h : helpers_)
      g.functions.push_back(h.name);
    g.functions.push_back("entry");
    return g;
  }

private:
  int pick(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  bool coin(int percent) { return pick(0, 99) < percent; }

  bool take_branch() {
    if (branches_ >= lim_.max_branches)
      return false;
    ++branches_;
    return true;
  }

  std::string rel() {
    static const char *ops[] = {"==", "!=", "<", "<=", ">", ">="};
    return ops[pick(0, 5)];
  }

  std::string int_guard(const std::string &var) {
    return var + " " + rel() + " " + std::to_string(pick(0, 3));
  }

  void helper(int index) {
    std::string name = "h" + std::to_string(index);
    HelperKind kind = static_cast<HelperKind>(pick(0, 3));
    const Helper *inner = nullptr;
    if (kind == HelperKind::Wrapper) {
      for (const Helper &h : helpers_)
        if (h.kind == HelperKind::AllocRet || h.kind == HelperKind::Wrapper)
          inner = &h;
      if (!inner)
        kind = HelperKind::AllocRet;
    }
    bool guarded = coin(60) && take_branch();
    std::string g = guarded ? int_guard("x") : "";
    switch (kind) {
    case HelperKind::AllocRet:
      out_ << "int *" << name << "(int x)\n{\n";
      if (!guarded) {
        out_ << "  int *p = malloc(4);\n  return p;\n";
      } else if (coin(50)) {
        out_ << "  int *p = malloc(4);\n  if (" << g
             << ") {\n    free(p);\n    return NULL;\n  }\n  return p;\n";
      } else {
        out_ << "  if (" << g << ")\n    return NULL;\n  return malloc(4);\n";
      }
      break;
    case HelperKind::AllocOut:
      out_ << "void " << name << "(int **o, int x)\n{\n";
      if (guarded)
        out_ << "  if (" << g << ")\n  ";
      out_ << "  *o = malloc(4);\n";
      break;
    case HelperKind::Dealloc:
      out_ << "void " << name << "(int *p, int x)\n{\n";
      if (guarded)
        out_ << "  if (" << g << ")\n  ";
      out_ << "  free(p);\n";
      break;
    case HelperKind::Wrapper:
      out_ << "int *" << name << "(int x)\n{\n";
      if (guarded)
        out_ << "  if (" << g << ")\n    return NULL;\n";
      out_ << "  int *r = " << inner->name << "(x);\n  return r;\n";
      break;
    }
    out_ << "}\n\n";
    helpers_.push_back({name, kind});
  }

  const Helper *helper_of(HelperKind k) {
    std::vector<const Helper *> c;
    for (const Helper &h : helpers_)
      if (h.kind == k || (k == HelperKind::AllocRet && h.kind == HelperKind::Wrapper))
        c.push_back(&h);
    if (c.empty())
      return nullptr;
    return c[pick(0, static_cast<int>(c.size()) - 1)];
  }

  std::string int_arg() {
    std::vector<std::string> c = {"a", "b", std::to_string(pick(0, 3))};
    for (const auto &t : ints_)
      c.push_back(t);
    return c[pick(0, static_cast<int>(c.size()) - 1)];
  }

  std::string guard() {
    if (!vars_.empty() && coin(25)) {
      const Var &v = vars_[pick(0, static_cast<int>(vars_.size()) - 1)];
      return v.name + (coin(50) ? " == NULL" : " != NULL");
    }
    return int_guard(int_arg());
  }

  const Var *any_var() {
    if (vars_.empty())
      return nullptr;
    return &vars_[pick(0, static_cast<int>(vars_.size()) - 1)];
  }

  std::string fresh() { return "p" + std::to_string(next_var_++); }

  void allocation(const std::string &ind) {
    std::string v = fresh();
    int choice = pick(0, 3);
    if (choice == 1) {
      if (const Helper *h = helper_of(HelperKind::AllocRet)) {
        out_ << ind << "int *" << v << " = " << h->name << "(" << int_arg()
             << ");\n";
        vars_.push_back({v});
        return;
      }
    } else if (choice == 2) {
      if (const Helper *h = helper_of(HelperKind::AllocOut)) {
        out_ << ind << "int *" << v << " = NULL;\n"
             << ind << h->name << "(&" << v << ", " << int_arg() << ");\n";
        vars_.push_back({v});
        return;
      }
    } else if (choice == 3) {
      out_ << ind << "struct Node *" << v
           << " = malloc(sizeof(struct Node));\n"
           << ind << v << "->child = malloc(4);\n";
      vars_.push_back({v, true});
      return;
    }
    out_ << ind << "int *" << v << " = malloc(4);\n";
    vars_.push_back({v});
  }

  /// A straight-line use of an existing variable.
  void use(const Var &v, const std::string &ind) {
    std::string ptr = v.node ? "(int *)" + v.name : v.name;
    switch (pick(0, 6)) {
    case 0:
      out_ << ind << "free(" << v.name << ");\n";
      return;
    case 1:
      if (v.node) {
        out_ << ind << "free(" << v.name << "->child);\n";
        return;
      }
      if (const Helper *h = helper_of(HelperKind::Dealloc)) {
        out_ << ind << h->name << "(" << v.name << ", " << int_arg() << ");\n";
        return;
      }
      out_ << ind << "free(" << v.name << ");\n";
      return;
    case 2:
      out_ << ind << "*out = " << ptr << ";\n";
      return;
    case 3:
      out_ << ind << "g_slot = " << ptr << ";\n";
      return;
    case 4:
      out_ << ind << "list_add(g_list, " << ptr << ");\n";
      return;
    default:
      out_ << ind << "free(" << v.name << ");\n";
      return;
    }
  }

  void statement() {
    const Var *v = any_var();
    int roll = pick(0, 99);
    if (!v || roll < 30) {
      allocation("  ");
      return;
    }
    if (roll < 38 && ints_.size() < 2) {
      std::string t = "t" + std::to_string(ints_.size());
      out_ << "  int " << t << " = ext" << ints_.size() << "();\n";
      ints_.push_back(t);
      return;
    }
    if (roll < 45 && !v->node) {
      std::string q = fresh();
      out_ << "  int *" << q << " = " << v->name << ";\n";
      vars_.push_back({q});
      return;
    }
    if (roll < 80 && take_branch()) {
      Var target = *v;
      std::string g = guard();
      switch (pick(0, 4)) {
      case 0:
        out_ << "  if (" << g << ") {\n    free(" << target.name
             << ");\n    return NULL;\n  }\n";
        return;
      case 1:
        out_ << "  if (" << g << ")\n    return NULL;\n";
        return;
      case 2:
        if (!cleanup_started_) {
          cleanup_started_ = true;
          cleanup_ = vars_;
        }
        out_ << "  if (" << g << ")\n    goto err;\n";
        return;
      case 3:
        out_ << "  if (" << g << ") {\n";
        use(target, "    ");
        out_ << "  } else {\n";
        use(*any_var(), "    ");
        out_ << "  }\n";
        return;
      default:
        out_ << "  if (" << g << ") {\n";
        use(target, "    ");
        out_ << "  }\n";
        return;
      }
    }
    use(*v, "  ");
  }

  void entry() {
    out_ << "int *entry(int a, int b, int **out)\n{\n";
    int n = pick(1, lim_.max_statements);
    for (int i = 0; i < n; ++i)
      statement();
    const Var *v = any_var();
    if (v && !v->node && coin(40))
      out_ << "  return " << v->name << ";\n";
    else
      out_ << "  return NULL;\n";
    if (cleanup_started_) {
      out_ << "err:\n";
      for (const Var &c : cleanup_)
        if (coin(70))
          out_ << "  free(" << c.name << ");\n";
      out_ << "  return NULL;\n";
    }
    out_ << "}\n";
  }

  std::mt19937_64 &rng_;
  Limits lim_;
  std::ostringstream out_;
  std::vector<Helper> helpers_;
  std::vector<Var> vars_;
  std::vector<std::string> ints_;
  std::vector<Var> cleanup_;
  bool cleanup_started_ = false;
  int branches_ = 0;
  int next_var_ = 0;
};

} // namespace

Generated generate(std::mt19937_64 &rng, const Limits &limits) {
  return Gen(rng, limits).run();
}

} // namespace progen

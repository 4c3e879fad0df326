#include "leakscan/program.hpp"

#include "leakscan/parser.hpp"

#include <functional>
#include <set>

namespace leakscan {

bool is_seed_function(std::string_view name) {
  for (auto s : kSeedFunctions)
    if (s == name)
      return true;
  return false;
}

std::optional<FunctionId> Program::find_function(std::string_view name) const {
  auto it = function_ids_.find(name);
  if (it == function_ids_.end())
    return std::nullopt;
  return it->second;
}

const FunctionInfo *Program::function_named(std::string_view name) const {
  auto id = find_function(name);
  return id ? &functions_[*id] : nullptr;
}

const RecordDecl *Program::record(std::string_view tag) const {
  auto it = records_.find(tag);
  return it == records_.end() ? nullptr : it->second;
}

std::vector<std::string> Program::externals() const {
  std::vector<std::string> out;
  for (const auto &f : functions_)
    if (f.kind == FunctionKind::External)
      out.push_back(f.name);
  return out;
}

std::vector<FunctionId> Program::defined_functions() const {
  std::vector<FunctionId> out;
  for (const auto &f : functions_)
    if (f.defined())
      out.push_back(f.id);
  return out;
}

namespace {

using SourceDescriber = std::function<std::string(Span)>;

bool same_type(const TypeRef &a, const TypeRef &b) {
  return a.record == b.record && a.depth == b.depth &&
         (a.record.empty() ? a.name == b.name || a.depth > 0 : true);
}

/// Resolves globals/callees in one function body and checks field names.
class Resolver {
public:
  Resolver(const std::map<std::string, GlobalInfo, std::less<>> &globals,
           const std::map<std::string, FunctionId, std::less<>> &functions,
           const std::vector<FunctionInfo> &infos,
           const std::map<std::string, const RecordDecl *, std::less<>> &records,
           const SourceDescriber &describe, std::vector<std::string> &problems)
      : globals_(globals), functions_(functions), infos_(infos),
        records_(records), describe_(describe), problems_(problems) {}

  void function(Function &fn) {
    fn_ = &fn;
    stmt(*fn.body);
    fn_ = nullptr;
  }

  std::optional<TypeRef> expr(Expr &e) {
    std::vector<std::optional<TypeRef>> kid_types;
    for (auto &k : e.kids)
      kid_types.push_back(expr(*k));
    switch (e.kind) {
    case ExprKind::Ident:
      return ident(e);
    case ExprKind::Member: {
      const auto &base = kid_types[0];
      if (!base || base->record.empty())
        return std::nullopt;
      if (base->depth != (e.arrow ? 1 : 0)) {
        problems_.push_back(describe_(e.span) + ": '" +
                            std::string(e.arrow ? "->" : ".") +
                            "' applied to wrong level of indirection");
        return std::nullopt;
      }
      auto rec = records_.find(base->record);
      if (rec == records_.end())
        return std::nullopt; // opaque struct
      const Field *f = rec->second->field(e.name);
      if (!f) {
        problems_.push_back(describe_(e.span) + ": no field '" + e.name +
                            "' in struct " + base->record);
        return std::nullopt;
      }
      return f->type;
    }
    case ExprKind::Deref:
      if (kid_types[0] && kid_types[0]->depth > 0) {
        TypeRef t = *kid_types[0];
        --t.depth;
        t.stars = std::max(0, t.stars - 1);
        return t;
      }
      return std::nullopt;
    case ExprKind::AddrOf:
      if (kid_types[0]) {
        TypeRef t = *kid_types[0];
        ++t.depth;
        ++t.stars;
        return t;
      }
      return std::nullopt;
    case ExprKind::Cast:
      return e.type;
    case ExprKind::Assign:
      return kid_types[0];
    case ExprKind::Call:
      return call(e);
    default:
      return std::nullopt;
    }
  }

private:
  void stmt(Stmt &s) {
    if (s.init)
      stmt(*s.init);
    if (s.expr)
      expr(*s.expr);
    if (s.step)
      expr(*s.step);
    for (auto &b : s.body)
      stmt(*b);
  }

  std::optional<TypeRef> ident(Expr &e) {
    if (e.ref == RefKind::Local && fn_)
      return fn_->locals.at(e.index).type;
    if (e.ref == RefKind::Param && fn_)
      return fn_->params.at(e.index).type;
    auto g = globals_.find(e.name);
    if (g != globals_.end()) {
      e.ref = RefKind::Global;
      return g->second.type;
    }
    if (functions_.count(e.name) || is_seed_function(e.name))
      problems_.push_back(describe_(e.span) + ": function '" + e.name +
                          "' used as a value (indirect calls are unsupported)");
    else
      problems_.push_back(describe_(e.span) + ": undeclared identifier '" +
                          e.name + "'");
    return std::nullopt;
  }

  std::optional<TypeRef> call(Expr &e) {
    auto it = functions_.find(e.name);
    if (it == functions_.end())
      return std::nullopt;
    const FunctionInfo &info = infos_[it->second];
    e.index = info.id;
    e.ref = info.defined() ? RefKind::Function : RefKind::External;
    if (info.defined()) {
      if (e.kids.size() != info.def->params.size())
        problems_.push_back(describe_(e.span) + ": call to '" + e.name +
                            "' passes " + std::to_string(e.kids.size()) +
                            " arguments, expected " +
                            std::to_string(info.def->params.size()));
      return info.def->ret;
    }
    if (info.kind == FunctionKind::Seed && e.name != "free")
      return TypeRef{"void", 1, "", 1};
    return std::nullopt;
  }

  const std::map<std::string, GlobalInfo, std::less<>> &globals_;
  const std::map<std::string, FunctionId, std::less<>> &functions_;
  const std::vector<FunctionInfo> &infos_;
  const std::map<std::string, const RecordDecl *, std::less<>> &records_;
  const SourceDescriber &describe_;
  std::vector<std::string> &problems_;
  Function *fn_ = nullptr;
};

} // namespace

Program link_program(std::vector<Unit> units, SourceManager sources) {
  Program prog;
  prog.sources = std::move(sources);
  prog.units = std::move(units);
  std::vector<std::string> problems;

  auto where = [&](const Unit &u, Span s) {
    if (s.file < prog.sources.size())
      return prog.sources.describe(s);
    return (u.path.empty() ? "<unit>" : u.path) + "@" +
           std::to_string(s.offset);
  };

  // Records: identical redefinitions across units are fine (shared headers).
  for (const Unit &u : prog.units)
    for (const RecordDecl &r : u.records) {
      auto [it, inserted] = prog.records_.emplace(r.tag, &r);
      if (inserted)
        continue;
      const RecordDecl &prev = *it->second;
      bool same = prev.fields.size() == r.fields.size();
      for (std::size_t i = 0; same && i < r.fields.size(); ++i)
        same = prev.fields[i].name == r.fields[i].name &&
               same_type(prev.fields[i].type, r.fields[i].type);
      if (!same)
        problems.push_back(where(u, r.span) +
                           ": conflicting definitions of struct " + r.tag);
    }

  // Globals: one initialized definition, matching types.
  for (const Unit &u : prog.units)
    for (const GlobalVar &g : u.globals) {
      auto [it, inserted] =
          prog.globals_.emplace(g.name, GlobalInfo{g.name, g.type, &g});
      if (inserted)
        continue;
      GlobalInfo &prev = it->second;
      if (!same_type(prev.type, g.type))
        problems.push_back(where(u, g.span) + ": global '" + g.name +
                           "' redeclared with a different type");
      else if (g.init && prev.def->init)
        problems.push_back(where(u, g.span) + ": duplicate definition of '" +
                           g.name + "'");
      else if (g.init || (prev.def->is_extern && !g.is_extern))
        prev.def = &g;
    }

  // Functions: defined ones first, in unit order.
  std::map<std::string, const Function *> protos;
  for (const Unit &u : prog.units)
    for (const auto &fn : u.functions) {
      if (!fn->has_body()) {
        protos.emplace(fn->name, fn.get());
        continue;
      }
      if (prog.globals_.count(fn->name))
        problems.push_back(where(u, fn->span) + ": '" + fn->name +
                           "' is both a function and a global");
      if (prog.function_ids_.count(fn->name)) {
        problems.push_back(where(u, fn->span) +
                           ": duplicate definition of function '" + fn->name +
                           "'");
        continue;
      }
      FunctionInfo info;
      info.id = static_cast<FunctionId>(prog.functions_.size());
      info.name = fn->name;
      info.kind = FunctionKind::Defined;
      info.def = fn.get();
      info.unit = &u;
      prog.function_ids_[fn->name] = info.id;
      prog.functions_.push_back(std::move(info));
    }
  for (const auto &[name, proto] : protos) {
    auto id = prog.function_ids_.find(name);
    if (id == prog.function_ids_.end())
      continue;
    const Function *def = prog.functions_[id->second].def;
    if (def->params.size() != proto->params.size())
      problems.push_back("prototype of '" + name +
                         "' conflicts with its definition");
  }

  // Every called name gets a node; undefined callees are seeds or externals.
  std::set<std::string> callees;
  for (const Unit &u : prog.units)
    for (const auto &fn : u.functions)
      if (fn->has_body())
        for_each_expr(*fn->body, [&](const Expr &e) {
          if (e.kind == ExprKind::Call && !prog.function_ids_.count(e.name))
            callees.insert(e.name);
        });
  for (const std::string &name : callees) {
    FunctionInfo info;
    info.id = static_cast<FunctionId>(prog.functions_.size());
    info.name = name;
    info.kind = is_seed_function(name) ? FunctionKind::Seed
                                       : FunctionKind::External;
    prog.function_ids_[name] = info.id;
    prog.functions_.push_back(std::move(info));
  }

  SourceDescriber describe = [&](Span s) {
    for (const Unit &u : prog.units)
      if (u.file == s.file)
        return where(u, s);
    return std::string("<unknown>");
  };
  Resolver resolver(prog.globals_, prog.function_ids_, prog.functions_,
                    prog.records_, describe, problems);
  for (Unit &u : prog.units) {
    for (GlobalVar &g : u.globals)
      if (g.init)
        resolver.expr(*g.init);
    for (auto &fn : u.functions)
      if (fn->has_body())
        resolver.function(*fn);
  }

  if (!problems.empty())
    throw LinkError(std::move(problems));
  return prog;
}

Program load_program(
    const std::vector<std::pair<std::string, std::string>> &files) {
  SourceManager sources;
  std::vector<Unit> units;
  for (const auto &[path, text] : files) {
    FileId id = sources.add(path, text);
    units.push_back(parse_source(sources.text(id), id, path));
  }
  return link_program(std::move(units), std::move(sources));
}

std::int64_t type_size(const Program &program, const TypeRef &type) {
  if (type.is_pointer())
    return 8;
  if (!type.record.empty()) {
    const RecordDecl *r = program.record(type.record);
    if (!r)
      return 8;
    std::int64_t total = 0;
    for (const Field &f : r->fields)
      total += f.type.is_record_value() && f.type.record == type.record
                   ? 8
                   : type_size(program, f.type);
    return total > 0 ? total : 1;
  }
  const std::string &n = type.name;
  if (n.find("char") != std::string::npos || n == "void")
    return 1;
  if (n.find("short") != std::string::npos)
    return 2;
  if (n.find("long") != std::string::npos || n.find("64") != std::string::npos ||
      n.find("size_t") != std::string::npos)
    return 8;
  return 4;
}

} // namespace leakscan

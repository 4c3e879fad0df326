//===- summaries.cpp - MAD summaries, JSON form and the fixpoint ---------===//

#include "leakscan/summaries.hpp"
#include "leakscan/symex.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <set>

namespace leakscan {

using nlohmann::json;
using nlohmann::ordered_json;

//===----------------------------------------------------------------------===//
// Access paths
//===----------------------------------------------------------------------===//

AccessPath AccessPath::ret(std::vector<PathStep> steps) {
  return {PathBase::Return, -1, {}, std::move(steps)};
}

AccessPath AccessPath::param(int index, std::string name,
                             std::vector<PathStep> steps) {
  return {PathBase::Param, index, std::move(name), std::move(steps)};
}

AccessPath AccessPath::global(std::string name, std::vector<PathStep> steps) {
  return {PathBase::Global, -1, std::move(name), std::move(steps)};
}

std::vector<std::string> AccessPath::fields() const {
  std::vector<std::string> out;
  for (const PathStep &s : steps)
    if (!s.deref)
      out.push_back(s.field);
  return out;
}

std::string AccessPath::render() const {
  std::string out;
  switch (base) {
  case PathBase::Return: out = "return"; break;
  case PathBase::Param: out = name; break;
  case PathBase::Global: out = "::" + name; break;
  }
  for (const std::string &f : fields())
    out += "->" + f;
  return out;
}

std::string AccessPath::notation() const {
  std::string out;
  for (const PathStep &s : steps)
    out += s.deref ? "*" : "." + s.field;
  return out;
}

std::vector<PathStep> parse_notation(std::string_view text) {
  std::vector<PathStep> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '*') {
      out.push_back(PathStep::d());
      ++i;
    } else if (text[i] == '.') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '*' && text[j] != '.')
        ++j;
      if (j == i + 1)
        throw DecodeError("empty field name in path notation '" +
                          std::string(text) + "'");
      out.push_back(PathStep::f(std::string(text.substr(i + 1, j - i - 1))));
      i = j;
    } else {
      throw DecodeError("unexpected '" + std::string(1, text[i]) +
                        "' in path notation '" + std::string(text) + "'");
    }
  }
  return out;
}

namespace {

enum class ListKind { Ret, Para, Global, Freed };

/// Step shape assumed when a path is written without explicit steps.
std::vector<PathStep> canonical_steps(ListKind list, PathBase base,
                                      const std::vector<std::string> &fields) {
  std::vector<PathStep> out{PathStep::d()};
  if (base == PathBase::Global || (list == ListKind::Para && base == PathBase::Param))
    out.push_back(PathStep::d());
  for (const std::string &f : fields) {
    out.push_back(PathStep::f(f));
    out.push_back(PathStep::d());
  }
  return out;
}

bool path_less(const AccessPath &a, const AccessPath &b) {
  std::string ra = a.render(), rb = b.render();
  if (ra != rb)
    return ra < rb;
  return a < b;
}

void sort_paths(std::vector<AccessPath> &v) {
  std::sort(v.begin(), v.end(), path_less);
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

} // namespace

//===----------------------------------------------------------------------===//
// Summaries and the store
//===----------------------------------------------------------------------===//

std::string_view function_type_name(FunctionType t) {
  switch (t) {
  case FunctionType::None: return "None";
  case FunctionType::Allocator: return "Allocator";
  case FunctionType::Deallocator: return "Deallocator";
  case FunctionType::Both: return "Both";
  }
  return "?";
}

void FunctionSummary::classify() {
  bool a = allocates(), f = frees();
  type = a && f ? FunctionType::Both
         : a    ? FunctionType::Allocator
         : f    ? FunctionType::Deallocator
                : FunctionType::None;
}

const FunctionSummary *SummaryStore::find(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second.summary;
}

bool SummaryStore::is_allocator(std::string_view name) const {
  const FunctionSummary *s = find(name);
  return s && (s->type == FunctionType::Allocator || s->type == FunctionType::Both);
}

bool SummaryStore::is_mad(std::string_view name) const {
  const FunctionSummary *s = find(name);
  return s && s->type != FunctionType::None;
}

int SummaryStore::generation(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? -1 : it->second.generation;
}

void SummaryStore::put_seed(FunctionSummary s) {
  s.classify();
  Entry &e = entries_[s.name];
  e.summary = std::move(s);
  e.generation = 0;
  e.seed = true;
}

bool SummaryStore::merge(const FunctionSummary &s, int generation) {
  auto it = entries_.find(s.name);
  if (it != entries_.end() && it->second.seed)
    return false;
  bool changed = it == entries_.end();
  Entry &e = entries_[s.name];
  e.summary.name = s.name;
  auto unite = [&](std::vector<AccessPath> &dst, const std::vector<AccessPath> &src) {
    for (const AccessPath &p : src)
      if (std::find(dst.begin(), dst.end(), p) == dst.end()) {
        dst.push_back(p);
        changed = true;
      }
    sort_paths(dst);
  };
  unite(e.summary.ret_objects, s.ret_objects);
  unite(e.summary.para_objects, s.para_objects);
  unite(e.summary.global_objects, s.global_objects);
  unite(e.summary.freed_params, s.freed_params);
  if (e.summary.conditional != s.conditional) {
    e.summary.conditional = s.conditional;
    changed = true;
  }
  e.summary.classify();
  if (changed)
    e.generation = generation;
  return changed;
}

std::size_t SummaryStore::allocator_count() const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [](const auto &kv) {
        auto t = kv.second.summary.type;
        return t == FunctionType::Allocator || t == FunctionType::Both;
      }));
}

std::size_t SummaryStore::deallocator_count() const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [](const auto &kv) {
        auto t = kv.second.summary.type;
        return t == FunctionType::Deallocator || t == FunctionType::Both;
      }));
}

SummaryStore seed_summaries() {
  SummaryStore store;
  for (const char *name : {"malloc", "calloc", "strdup"}) {
    FunctionSummary s;
    s.name = name;
    s.ret_objects = {AccessPath::ret()};
    store.put_seed(std::move(s));
  }
  FunctionSummary realloc_s;
  realloc_s.name = "realloc";
  realloc_s.ret_objects = {AccessPath::ret()};
  realloc_s.freed_params = {AccessPath::param(0, "ptr", {PathStep::d()})};
  store.put_seed(std::move(realloc_s));
  FunctionSummary free_s;
  free_s.name = "free";
  free_s.freed_params = {AccessPath::param(0, "ptr", {PathStep::d()})};
  store.put_seed(std::move(free_s));
  return store;
}

CandidateSet identify_candidates(const CallGraph &cg, const SummaryStore &store) {
  return identify_candidates(cg, [&](FunctionId f) {
    return f >= 0 && static_cast<std::size_t>(f) < cg.names.size() &&
           store.is_allocator(cg.names[f]);
  });
}

//===----------------------------------------------------------------------===//
// JSON
//===----------------------------------------------------------------------===//

namespace {

struct ListSpec {
  const char *key;
  ListKind kind;
  std::vector<AccessPath> FunctionSummary::*member;
};

const ListSpec kLists[] = {
    {"ret_objects", ListKind::Ret, &FunctionSummary::ret_objects},
    {"para_objects", ListKind::Para, &FunctionSummary::para_objects},
    {"freed_params", ListKind::Freed, &FunctionSummary::freed_params},
    {"global_objects", ListKind::Global, &FunctionSummary::global_objects},
};

} // namespace

std::string encode_summaries(const SummaryStore &store) {
  ordered_json arr = ordered_json::array();
  for (const auto &[name, entry] : store.entries()) {
    if (entry.seed)
      continue;
    const FunctionSummary &s = entry.summary;
    ordered_json o;
    o["name"] = s.name;
    o["function_type"] = std::string(function_type_name(s.type));
    ordered_json steps = ordered_json::object();
    for (const ListSpec &l : kLists) {
      const auto &paths = s.*(l.member);
      if (l.kind == ListKind::Global && paths.empty())
        continue;
      ordered_json list = ordered_json::array();
      for (const AccessPath &p : paths) {
        list.push_back(p.render());
        if (p.steps != canonical_steps(l.kind, p.base, p.fields()))
          steps[l.key][p.render()] = p.notation();
      }
      o[l.key] = std::move(list);
    }
    o["conditional"] = s.conditional;
    if (!steps.empty())
      o["steps"] = std::move(steps);
    arr.push_back(std::move(o));
  }
  return arr.dump(2);
}

SummaryStore decode_summaries(std::string_view text, const Program *program) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw DecodeError(std::string("summary JSON: ") + e.what());
  }
  if (!doc.is_array())
    throw DecodeError("summary JSON: expected an array at the top level");

  SummaryStore store = seed_summaries();
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json &o = doc[i];
    std::string where = "summary JSON entry " + std::to_string(i);
    if (!o.is_object())
      throw DecodeError(where + ": expected an object");
    static const std::set<std::string> allowed = {
        "name", "function_type", "ret_objects", "para_objects", "freed_params",
        "global_objects", "conditional", "steps"};
    for (const auto &[k, v] : o.items())
      if (!allowed.count(k))
        throw DecodeError(where + ": unknown key '" + k + "'");
    if (!o.contains("name") || !o["name"].is_string())
      throw DecodeError(where + ": missing string 'name'");
    FunctionSummary s;
    s.name = o["name"].get<std::string>();
    where += " (" + s.name + ")";
    if (store.find(s.name) && store.entries().at(s.name).seed)
      continue;

    const FunctionInfo *fi = program ? program->function_named(s.name) : nullptr;
    if (program && (!fi || !fi->def))
      throw DecodeError(where + ": no such function in the program");
    const json *steps = o.contains("steps") ? &o["steps"] : nullptr;
    if (steps && !steps->is_object())
      throw DecodeError(where + ": 'steps' must be an object");

    for (const ListSpec &l : kLists) {
      if (!o.contains(l.key)) {
        if (l.kind == ListKind::Global)
          continue;
        throw DecodeError(where + ": missing '" + l.key + "'");
      }
      const json &arr = o[l.key];
      if (!arr.is_array())
        throw DecodeError(where + ": '" + l.key + "' must be an array");
      for (const json &item : arr) {
        if (!item.is_string())
          throw DecodeError(where + ": '" + l.key + "' entries must be strings");
        std::string r = item.get<std::string>();
        std::vector<std::string> parts;
        for (std::size_t pos = 0;;) {
          std::size_t next = r.find("->", pos);
          parts.push_back(r.substr(pos, next == std::string::npos ? next : next - pos));
          if (next == std::string::npos)
            break;
          pos = next + 2;
        }
        for (const std::string &p : parts)
          if (p.empty())
            throw DecodeError(where + ": malformed path '" + r + "'");
        AccessPath p;
        const std::string &head = parts.front();
        if (head == "return") {
          p.base = PathBase::Return;
        } else if (head.rfind("::", 0) == 0) {
          p.base = PathBase::Global;
          p.name = head.substr(2);
        } else {
          p.base = PathBase::Param;
          p.name = head;
          if (fi) {
            const auto &params = fi->def->params;
            for (std::size_t k = 0; k < params.size(); ++k)
              if (params[k].name == head)
                p.index = static_cast<int>(k);
            if (p.index < 0)
              throw DecodeError(where + ": '" + head + "' is not a parameter");
          }
        }
        if ((l.kind == ListKind::Ret) != (p.base == PathBase::Return))
          throw DecodeError(where + ": path '" + r + "' has the wrong base for '" +
                            l.key + "'");
        std::vector<std::string> fields(parts.begin() + 1, parts.end());
        if (steps && steps->contains(l.key) && (*steps)[l.key].contains(r)) {
          const json &n = (*steps)[l.key][r];
          if (!n.is_string())
            throw DecodeError(where + ": step notation must be a string");
          p.steps = parse_notation(n.get<std::string>());
          if (p.fields() != fields || p.steps.empty() || !p.steps.back().deref)
            throw DecodeError(where + ": steps for '" + r + "' do not match it");
        } else {
          p.steps = canonical_steps(l.kind, p.base, fields);
        }
        (s.*(l.member)).push_back(std::move(p));
      }
    }
    if (!o.contains("conditional") || !o["conditional"].is_boolean())
      throw DecodeError(where + ": missing boolean 'conditional'");
    s.conditional = o["conditional"].get<bool>();
    if (!o.contains("function_type") || !o["function_type"].is_string())
      throw DecodeError(where + ": missing string 'function_type'");
    std::string declared = o["function_type"].get<std::string>();
    s.classify();
    if (declared != function_type_name(s.type))
      throw DecodeError(where + ": function_type '" + declared +
                        "' does not match its lists");
    store.merge(s, 0);
  }
  return store;
}

//===----------------------------------------------------------------------===//
// Per-function summarization
//===----------------------------------------------------------------------===//

namespace {

struct PathEffects {
  std::set<AccessPath> ret, para, global, freed;

  std::set<std::pair<int, AccessPath>> all() const {
    std::set<std::pair<int, AccessPath>> out;
    for (const auto &p : ret) out.insert({0, p});
    for (const auto &p : para) out.insert({1, p});
    for (const auto &p : global) out.insert({2, p});
    for (const auto &p : freed) out.insert({3, p});
    return out;
  }
};

std::vector<PathStep> operator+(std::vector<PathStep> a, const std::vector<PathStep> &b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<PathStep> field_steps(const std::vector<std::string> &fields) {
  std::vector<PathStep> out;
  for (const auto &f : fields)
    out.push_back(PathStep::f(f));
  return out;
}

AccessPath extend(AccessPath p, const std::vector<PathStep> &more) {
  p.steps = p.steps + more;
  return p;
}

class Extractor {
public:
  Extractor(const PathState &state, const SymTable &syms)
      : state_(state), syms_(syms) {}

  PathEffects run(const Function &fn, const std::vector<SymValue> &params) {
    if (ObjectId o = live(state_.ret); o >= 0) {
      AccessPath p = AccessPath::ret();
      out_.ret.insert(p);
      walk_object(o, p, out_.ret);
    }
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i].kind == ValKind::Sym)
        walk_sym(static_cast<SymId>(params[i].num),
                 AccessPath::param(static_cast<int>(i), fn.params[i].name, {}),
                 out_.para);
    for (const auto &[loc, v] : state_.store) {
      if (loc.root != RootKind::Global)
        continue;
      AccessPath slot =
          AccessPath::global(loc.name, std::vector<PathStep>{PathStep::d()} +
                                           field_steps(loc.fields));
      visit_slot(loc, v, slot, out_.global);
    }
    for (SymId s : state_.freed_inputs)
      if (auto p = value_path(s))
        out_.freed.insert(extend(*p, {PathStep::d()}));
    return out_;
  }

private:
  ObjectId live(const SymValue &v) const {
    if (v.kind != ValKind::HeapRef)
      return -1;
    auto o = static_cast<ObjectId>(v.num);
    const MemoryObject &m = state_.heap.at(o);
    return m.state == ObjState::Allocated && !m.orphaned ? o : -1;
  }

  /// `slot` is the path to the location holding `v`.
  void visit_slot(const Loc &loc, const SymValue &v, const AccessPath &slot,
                  std::set<AccessPath> &into) {
    if (ObjectId o = live(v); o >= 0) {
      AccessPath p = extend(slot, {PathStep::d()});
      if (into.insert(p).second)
        walk_object(o, p, into);
    } else if (v.kind == ValKind::Sym) {
      const SymInfo &info = syms_.info(static_cast<SymId>(v.num));
      if (info.origin == SymOrigin::Loaded && info.from == loc)
        walk_sym(static_cast<SymId>(v.num), slot, into);
    }
  }

  void walk_object(ObjectId o, const AccessPath &path, std::set<AccessPath> &into) {
    if (path.steps.size() > 32)
      return;
    for (auto it = state_.store.lower_bound(Loc::object(o));
         it != state_.store.end() && it->first.root == RootKind::Object &&
         it->first.id == o;
         ++it) {
      if (ObjectId c = live(it->second); c >= 0 && c != o) {
        AccessPath p = extend(path, field_steps(it->first.fields) +
                                        std::vector<PathStep>{PathStep::d()});
        if (into.insert(p).second)
          walk_object(c, p, into);
      }
    }
  }

  /// `path` reaches the value of input symbol `s`.
  void walk_sym(SymId s, const AccessPath &path, std::set<AccessPath> &into) {
    if (path.steps.size() > 32)
      return;
    for (auto it = state_.store.lower_bound(Loc::deref(s));
         it != state_.store.end() && it->first.root == RootKind::Deref &&
         it->first.id == s;
         ++it) {
      AccessPath slot = extend(path, std::vector<PathStep>{PathStep::d()} +
                                         field_steps(it->first.fields));
      visit_slot(it->first, it->second, slot, into);
    }
  }

  std::optional<AccessPath> value_path(SymId s) const {
    const SymInfo &info = syms_.info(s);
    if (info.origin == SymOrigin::Param)
      return AccessPath::param(info.param, info.name, {});
    if (info.origin != SymOrigin::Loaded)
      return std::nullopt;
    const Loc &from = info.from;
    if (from.root == RootKind::Global)
      return AccessPath::global(from.name, std::vector<PathStep>{PathStep::d()} +
                                               field_steps(from.fields));
    if (from.root == RootKind::Deref) {
      auto base = value_path(from.id);
      if (!base)
        return std::nullopt;
      return extend(*base, std::vector<PathStep>{PathStep::d()} +
                               field_steps(from.fields));
    }
    return std::nullopt;
  }

  const PathState &state_;
  const SymTable &syms_;
  PathEffects out_;
};

} // namespace

SummaryOutcome summarize_function(FunctionId function, const Program &program,
                                  const SummaryStore &store,
                                  const AnalysisConfig &config) {
  const FunctionInfo &fi = program.function(function);
  Engine engine(program, store, config, ExecMode::Summary);
  ExecResult r = engine.run(function);
  SummaryOutcome out;
  out.diagnostics = r.diagnostics;
  if (r.truncated)
    return out;

  std::vector<PathEffects> effects;
  for (const PathState &p : r.paths)
    effects.push_back(Extractor(p, *r.syms).run(*fi.def, r.params));

  FunctionSummary s;
  s.name = fi.name;
  std::set<std::pair<int, AccessPath>> all;
  for (const PathEffects &e : effects) {
    s.ret_objects.insert(s.ret_objects.end(), e.ret.begin(), e.ret.end());
    s.para_objects.insert(s.para_objects.end(), e.para.begin(), e.para.end());
    s.global_objects.insert(s.global_objects.end(), e.global.begin(), e.global.end());
    s.freed_params.insert(s.freed_params.end(), e.freed.begin(), e.freed.end());
    auto a = e.all();
    all.insert(a.begin(), a.end());
  }
  for (const PathEffects &e : effects)
    if (e.all() != all)
      s.conditional = true;
  sort_paths(s.ret_objects);
  sort_paths(s.para_objects);
  sort_paths(s.global_objects);
  sort_paths(s.freed_params);
  s.classify();
  if (s.type == FunctionType::None)
    s.conditional = false;
  out.summary = std::move(s);
  return out;
}

FixpointResult generate_summaries(const Program &program, const CallGraph &cg,
                                  const AnalysisConfig &config) {
  FixpointResult res;
  res.store = seed_summaries();
  std::set<FunctionId> work;
  for (const CallEdge &e : cg.edges)
    if (is_seed_function(cg.names[e.callee]) && program.function(e.caller).defined())
      work.insert(e.caller);

  constexpr int kMaxRounds = 100;
  while (!work.empty()) {
    if (res.rounds == kMaxRounds) {
      res.diagnostics.push_back({DiagKind::FixpointLimit, {}, {},
                                 "summary fixpoint stopped after " +
                                     std::to_string(kMaxRounds) + " rounds"});
      break;
    }
    int round = ++res.rounds;
    SummaryStore snapshot = res.store;
    std::set<FunctionId> changed;
    for (FunctionId f : work) {
      SummaryOutcome o = summarize_function(f, program, snapshot, config);
      res.diagnostics.insert(res.diagnostics.end(), o.diagnostics.begin(),
                             o.diagnostics.end());
      if (!o.summary)
        continue;
      if (o.summary->type == FunctionType::None && !res.store.find(o.summary->name))
        continue;
      if (res.store.merge(*o.summary, round))
        changed.insert(f);
    }
    std::map<std::string, FunctionSummary> snap;
    for (const auto &[name, entry] : res.store.entries())
      if (!entry.seed)
        snap[name] = entry.summary;
    res.history.push_back(std::move(snap));

    work.clear();
    for (FunctionId f : changed)
      for (FunctionId c : cg.callers_of(f))
        if (program.function(c).defined())
          work.insert(c);
  }
  return res;
}

} // namespace leakscan

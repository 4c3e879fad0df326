#include "leakscan/graphs.hpp"

#include <algorithm>
#include <sstream>

namespace leakscan {

CallGraph build_call_graph(const Program &program) {
  CallGraph cg;
  for (const FunctionInfo &f : program.functions()) {
    cg.nodes.push_back(f.id);
    cg.names.push_back(f.name);
    if (!f.defined())
      continue;
    for_each_expr(*f.def->body, [&](const Expr &e) {
      if (e.kind == ExprKind::Call && e.index >= 0)
        cg.edges.push_back({f.id, e.index, e.span, &e});
    });
  }
  std::stable_sort(cg.edges.begin(), cg.edges.end(),
                   [](const CallEdge &a, const CallEdge &b) {
                     return a.site < b.site;
                   });
  return cg;
}

std::vector<const CallEdge *> CallGraph::calls_from(FunctionId f) const {
  std::vector<const CallEdge *> out;
  for (const CallEdge &e : edges)
    if (e.caller == f)
      out.push_back(&e);
  return out;
}

std::vector<FunctionId> CallGraph::callers_of(FunctionId f) const {
  std::vector<FunctionId> out;
  for (const CallEdge &e : edges)
    if (e.callee == f && std::find(out.begin(), out.end(), e.caller) == out.end())
      out.push_back(e.caller);
  return out;
}

std::vector<FunctionId> CallGraph::callees_of(FunctionId f) const {
  std::vector<FunctionId> out;
  for (const CallEdge &e : edges)
    if (e.caller == f && std::find(out.begin(), out.end(), e.callee) == out.end())
      out.push_back(e.callee);
  return out;
}

std::string CallGraph::to_dot(const Program &program) const {
  std::ostringstream os;
  os << "digraph callgraph {\n";
  for (FunctionId id : nodes) {
    const FunctionInfo &f = program.function(id);
    os << "  n" << id << " [label=\"" << f.name << "\"";
    if (f.kind == FunctionKind::Seed)
      os << ", shape=box";
    else if (f.kind == FunctionKind::External)
      os << ", style=dashed";
    os << "];\n";
  }
  for (const CallEdge &e : edges) {
    os << "  n" << e.caller << " -> n" << e.callee;
    if (e.site.file < program.sources.size())
      os << " [label=\"" << program.sources.line_col(e.site).line << "\"]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

CandidateSet identify_candidates(
    const CallGraph &cg, const std::function<bool(FunctionId)> &is_allocator) {
  CandidateSet out;
  for (const CallEdge &e : cg.edges)
    if (is_allocator(e.callee))
      out.functions.insert(e.caller);
  return out;
}

} // namespace leakscan

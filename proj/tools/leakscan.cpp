//===- leakscan.cpp - Command-line entry point ---------------------------===//
//
// Exit status: 0 clean, 1 findings (or oracle leaks), 2 errors.
//
//===----------------------------------------------------------------------===//

#include "leakscan/driver.hpp"
#include "leakscan/oracle.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace leakscan;

namespace {

void write_text(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out)
    throw IoError("cannot write " + path);
}

struct AnalyzeArgs {
  std::string manifest;
  std::string format = "json";
  std::string out;
  std::string summaries_out;
  std::string summaries_in;
  std::string callgraph;
  bool no_filter = false;
  bool dump_traces = false;
  std::optional<int> loop_bound, inline_bb_limit, max_call_depth, path_budget;
};

int analyze(const AnalyzeArgs &a) {
  Manifest m = ingest_manifest(a.manifest);
  PipelineOptions opt;
  opt.config = m.config;
  if (a.loop_bound)
    opt.config.loop_bound = *a.loop_bound;
  if (a.inline_bb_limit)
    opt.config.inline_bb_limit = *a.inline_bb_limit;
  if (a.max_call_depth)
    opt.config.max_call_depth = *a.max_call_depth;
  if (a.path_budget)
    opt.config.path_budget = *a.path_budget;
  opt.candidate_filter = !a.no_filter;
  opt.dump_traces = a.dump_traces;
  if (!a.summaries_in.empty())
    opt.summaries_in = read_file(a.summaries_in);

  PipelineResult r = run_pipeline(m, opt);
  if (!a.summaries_out.empty())
    write_text(a.summaries_out, encode_summaries(r.store));
  if (!a.callgraph.empty())
    write_text(a.callgraph, r.callgraph.to_dot(r.program));
  emit_report(r.report, a.format, a.out);
  return r.report.findings.empty() ? 0 : 1;
}

int oracle(const std::string &file, const std::string &entry, int loop_bound) {
  Program p;
  if (std::filesystem::path(file).extension() == ".json") {
    Manifest m = ingest_manifest(file);
    std::vector<std::pair<std::string, std::string>> files;
    for (const std::string &f : m.files)
      files.emplace_back(f, read_file((std::filesystem::path(m.base_dir) / f).string()));
    p = load_program(files);
  } else {
    p = load_program({{file, read_file(file)}});
  }
  std::optional<FunctionId> f = p.find_function(entry);
  if (!f || !p.function(*f).defined())
    throw Error("no defined function '" + entry + "'");
  OracleLimits lim;
  lim.loop_bound = loop_bound;
  std::vector<ConcreteRun> runs = enumerate_runs(p, *f, lim);
  std::size_t crashed = 0;
  for (const ConcreteRun &r : runs)
    crashed += r.end == RunEnd::Crashed;
  std::cout << entry << ": " << runs.size() << " runs (" << crashed
            << " stopped on a null dereference or bound)\n";
  std::set<Span> leaks = oracle_leak_sites(runs);
  for (const Span &s : leaks) {
    std::size_t n = 0;
    const ConcreteRun *first = nullptr;
    for (const ConcreteRun &r : runs) {
      auto it = r.verdicts.find(s);
      if (it != r.verdicts.end() && it->second) {
        ++n;
        if (!first)
          first = &r;
      }
    }
    std::cout << "leak " << p.sources.describe(s) << " in " << n << " runs; first inputs [";
    for (std::size_t i = 0; i < first->inputs.size(); ++i)
      std::cout << (i ? ", " : "") << first->inputs[i];
    std::cout << "]\n";
  }
  if (leaks.empty())
    std::cout << "no leaks\n";
  return leaks.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"leakscan: memory leak detector for Mini-C"};
  app.require_subcommand(1);

  AnalyzeArgs a;
  CLI::App *an = app.add_subcommand("analyze", "Analyze the project described by a manifest");
  an->add_option("manifest", a.manifest, "Manifest JSON")->required();
  an->add_option("--report", a.format, "Report format")
      ->check(CLI::IsMember({"json", "html"}));
  an->add_option("--out", a.out, "Report path (default stdout)");
  an->add_option("--summaries-out", a.summaries_out, "Write function summaries");
  an->add_option("--summaries-in", a.summaries_in, "Use these summaries instead of computing them");
  an->add_option("--emit-callgraph", a.callgraph, "Write the call graph as DOT");
  an->add_flag("--no-candidate-filter", a.no_filter, "Analyze every defined function");
  an->add_option("--loop-bound", a.loop_bound)->check(CLI::PositiveNumber);
  an->add_option("--inline-bb-limit", a.inline_bb_limit)->check(CLI::NonNegativeNumber);
  an->add_option("--max-call-depth", a.max_call_depth)->check(CLI::NonNegativeNumber);
  an->add_option("--path-budget", a.path_budget)->check(CLI::PositiveNumber);
  an->add_flag("--dump-traces", a.dump_traces, "Include ownership traces in the report");

  std::string ofile, oentry;
  int oloop = 3;
  CLI::App *orc = app.add_subcommand("oracle", "Enumerate concrete runs of one function");
  orc->add_option("file", ofile, "Mini-C file or manifest")->required();
  orc->add_option("--entry", oentry, "Function to run")->required();
  orc->add_option("--loop-bound", oloop)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (an->parsed())
      return analyze(a);
    return oracle(ofile, oentry, oloop);
  } catch (const std::exception &e) {
    std::cerr << "leakscan: " << e.what() << "\n";
    return 2;
  }
}

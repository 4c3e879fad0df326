#include "support/harness.hpp"

#include "leakscan/oracle.hpp"
#include "support/fixtures.hpp"
#include "support/progen.hpp"

#include <algorithm>
#include <filesystem>

using namespace leakscan;
namespace fs = std::filesystem;

namespace harness {

std::vector<std::string> corpus_cases() {
  std::vector<std::string> out;
  for (const auto &e : fs::directory_iterator(fixtures::path("corpus")))
    if (e.is_directory())
      out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::string strip_timing(const Report &report) {
  nlohmann::json j = report_to_json(report);
  j.erase("timing_ms");
  j.erase("digest");
  return j.dump();
}

CorpusRun run_corpus(const CorpusOptions &options) {
  CorpusRun out;
  for (const std::string &dir : corpus_cases()) {
    ++out.cases;
    nlohmann::json sidecar =
        nlohmann::json::parse(read_file((fs::path(dir) / "expected.json").string()));
    for (const char *kind : {"bad", "good"}) {
      Variant v;
      v.name = fs::path(dir).filename().string() + "/" + kind;
      v.positive = std::string(kind) == "bad";
      for (const auto &x : sidecar[kind])
        v.expected.insert({x["function"].get<std::string>(), x["line"].get<int>()});

      Manifest m = parse_manifest(
          {{"name", v.name}, {"files", nlohmann::json::array({std::string(kind) + ".mc"})}},
          dir);
      PipelineOptions opt;
      opt.config = m.config;
      opt.candidate_filter = options.candidate_filter;
      PipelineResult r = run_pipeline(m, opt);
      for (const ReportFinding &f : r.report.findings) {
        Site s{f.function, static_cast<int>(f.alloc_site.line)};
        v.analyzer.insert(s);
        if (f.confidence == "high")
          v.analyzer_high.insert(s);
      }
      v.candidates = r.report.stats.candidates;
      v.report = strip_timing(r.report);

      if (options.with_oracle)
        for (FunctionId f : r.program.defined_functions())
          for (const Span &s : oracle_leak_sites(enumerate_runs(r.program, f)))
            v.oracle.insert({r.program.function(f).name,
                             static_cast<int>(r.program.sources.line_col(s).line)});

      if (v.positive) {
        out.expected_sites += v.expected.size();
        for (const Site &s : v.expected)
          out.found_sites += v.analyzer.count(s);
      }
      for (const Site &s : v.analyzer_high)
        out.sat_false_positives += !v.expected.count(s);
      for (const Site &s : v.analyzer)
        out.extra_findings += !v.expected.count(s);
      out.variants.push_back(std::move(v));
    }
  }
  return out;
}

DiffRun differential(std::uint64_t base, int count) {
  DiffRun out;
  AnalysisConfig config;
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(base + static_cast<std::uint64_t>(i));
    progen::Generated g = progen::generate(rng);
    Program p = load_program(g.files);
    SummaryStore store = generate_summaries(p, build_call_graph(p), config).store;
    FunctionId entry = *p.find_function(g.entry);
    CandidateAnalysis a = analyze_candidate(entry, p, store, config);
    std::vector<SiteVerdict> verdicts;
    for (const Finding &f : a.findings)
      verdicts.push_back({f.alloc_site, f.low_confidence});
    std::vector<ConcreteRun> runs;
    try {
      runs = enumerate_runs(p, entry);
    } catch (const Diverged &) {
      ++out.diverged;
      continue;
    }
    ++out.programs;
    out.oracle_runs += runs.size();
    DiffReport d = compare(verdicts, runs);
    out.agree += d.agree.size();
    out.false_negatives += d.false_negatives.size();
    for (const SiteVerdict &fp : d.false_positives)
      ++(fp.low_confidence ? out.low_false_positives : out.sat_false_positives);
    if (!d.gate_passes() && out.failures.size() < 5) {
      std::string msg = "seed " + std::to_string(base + i) + ":";
      for (const Span &s : d.false_negatives)
        msg += " missed " + p.sources.describe(s);
      for (const SiteVerdict &s : d.false_positives)
        msg += " spurious " + p.sources.describe(s.site);
      out.failures.push_back(msg);
    }
  }
  return out;
}

} // namespace harness

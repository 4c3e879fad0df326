#include "leakscan/driver.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace leakscan {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

//===----------------------------------------------------------------------===//
// Manifest
//===----------------------------------------------------------------------===//

namespace {

struct ConfigKey {
  const char *name;
  int AnalysisConfig::*field;
  int min;
};

constexpr ConfigKey kConfigKeys[] = {
    {"loop_bound", &AnalysisConfig::loop_bound, 1},
    {"inline_bb_limit", &AnalysisConfig::inline_bb_limit, 0},
    {"max_call_depth", &AnalysisConfig::max_call_depth, 0},
    {"path_budget", &AnalysisConfig::path_budget, 1},
    {"solver_timeout_atoms", &AnalysisConfig::solver_timeout_atoms, 1},
    {"summary_path_budget", &AnalysisConfig::summary_path_budget, 1},
    {"summary_block_budget", &AnalysisConfig::summary_block_budget, 1},
    {"block_budget", &AnalysisConfig::block_budget, 1},
};

} // namespace

void apply_config_overrides(AnalysisConfig &config, const json &overrides) {
  if (!overrides.is_object())
    throw ManifestError("manifest: 'config' must be an object");
  for (const auto &[key, value] : overrides.items()) {
    const ConfigKey *k = nullptr;
    for (const ConfigKey &c : kConfigKeys)
      if (key == c.name)
        k = &c;
    if (!k)
      throw ManifestError("manifest: unknown config key '" + key + "'");
    if (!value.is_number_integer() || value.get<long long>() < k->min ||
        value.get<long long>() > 100000000)
      throw ManifestError("manifest: config key '" + key +
                          "' needs an integer >= " + std::to_string(k->min));
    config.*(k->field) = value.get<int>();
  }
}

json config_to_json(const AnalysisConfig &config) {
  json j = json::object();
  for (const ConfigKey &c : kConfigKeys)
    j[c.name] = config.*(c.field);
  return j;
}

Manifest parse_manifest(const json &doc, const std::string &base_dir) {
  if (!doc.is_object())
    throw ManifestError("manifest: top level must be an object");
  for (const auto &[key, value] : doc.items())
    if (key != "name" && key != "files" && key != "config")
      throw ManifestError("manifest: unknown key '" + key + "'");
  Manifest m;
  m.base_dir = base_dir;
  if (!doc.contains("name") || !doc["name"].is_string())
    throw ManifestError("manifest: 'name' must be a string");
  m.name = doc["name"].get<std::string>();
  if (!doc.contains("files") || !doc["files"].is_array())
    throw ManifestError("manifest: 'files' must be an array");
  for (const json &f : doc["files"]) {
    if (!f.is_string())
      throw ManifestError("manifest: file entries must be strings");
    m.files.push_back(f.get<std::string>());
  }
  if (m.files.empty())
    throw ManifestError("manifest: 'files' is empty");
  if (doc.contains("config")) {
    apply_config_overrides(m.config, doc["config"]);
    m.overrides = doc["config"];
  }
  std::vector<std::string> missing;
  for (const std::string &f : m.files) {
    fs::path p = fs::path(base_dir) / f;
    std::ifstream in(p);
    if (!in)
      missing.push_back(p.string());
  }
  if (!missing.empty()) {
    std::string msg = "manifest: unreadable files:";
    for (const std::string &f : missing)
      msg += " " + f;
    throw ManifestError(msg);
  }
  return m;
}

Manifest ingest_manifest(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ManifestError("manifest: cannot read " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error &e) {
    throw ManifestError("manifest: " + path + ": " + e.what());
  }
  fs::path dir = fs::path(path).parent_path();
  return parse_manifest(doc, dir.empty() ? "." : dir.string());
}

//===----------------------------------------------------------------------===//
// Report JSON
//===----------------------------------------------------------------------===//

namespace {

json loc_json(const SourceLoc &l) {
  return {{"file", l.file}, {"line", l.line}, {"column", l.column}};
}

SourceLoc loc_from(const json &j) {
  return {j.at("file").get<std::string>(), j.at("line").get<std::uint32_t>(),
          j.at("column").get<std::uint32_t>()};
}

json times_json(const PhaseTimes &t) {
  return {{"preprocess", t.preprocess_ms},
          {"modeling", t.modeling_ms},
          {"candidates", t.candidates_ms},
          {"detection", t.detection_ms},
          {"total", t.total_ms()}};
}

} // namespace

json report_to_json(const Report &r) {
  json findings = json::array();
  for (const ReportFinding &f : r.findings) {
    json w = json::array();
    for (const WitnessStep &s : f.witness) {
      json step = loc_json(s.loc);
      step["text"] = s.text;
      w.push_back(std::move(step));
    }
    json jf = {{"function", f.function},
               {"status", "leak"},
               {"rule", f.rule},
               {"confidence", f.confidence},
               {"alloc_site", loc_json(f.alloc_site)},
               {"origin_site", loc_json(f.origin_site)},
               {"alloc_chain", f.alloc_chain},
               {"leaked_path", f.leaked_path},
               {"trigger", f.trigger},
               {"alternates", f.alternates},
               {"witness", std::move(w)}};
    if (!f.trace.is_null())
      jf["trace"] = f.trace;
    findings.push_back(std::move(jf));
  }
  json diags = json::array();
  for (const ReportDiagnostic &d : r.diagnostics) {
    json jd = {{"kind", d.kind}, {"function", d.function}, {"message", d.message}};
    if (d.loc)
      jd["location"] = loc_json(*d.loc);
    diags.push_back(std::move(jd));
  }
  const ReportStats &s = r.stats;
  return {
      {"tool", {{"name", "leakscan"}, {"version", r.tool_version}}},
      {"project", r.project},
      {"manifest_digest", r.manifest_digest},
      {"config", config_to_json(r.config)},
      {"timing_ms", times_json(r.times)},
      {"stats",
       {{"files", s.files},
        {"functions", s.functions},
        {"allocators", s.allocators},
        {"deallocators", s.deallocators},
        {"candidates", s.candidates},
        {"paths", s.paths},
        {"fixpoint_rounds", s.fixpoint_rounds},
        {"candidate_filter", s.candidate_filter}}},
      {"findings", std::move(findings)},
      {"diagnostics", std::move(diags)},
  };
}

Report report_from_json(const json &j) {
  Report r;
  r.tool_version = j.at("tool").at("version").get<std::string>();
  r.project = j.at("project").get<std::string>();
  r.manifest_digest = j.at("manifest_digest").get<std::string>();
  apply_config_overrides(r.config, j.at("config"));
  const json &t = j.at("timing_ms");
  r.times = {t.at("preprocess").get<double>(), t.at("modeling").get<double>(),
             t.at("candidates").get<double>(), t.at("detection").get<double>()};
  const json &s = j.at("stats");
  r.stats.files = s.at("files").get<std::size_t>();
  r.stats.functions = s.at("functions").get<std::size_t>();
  r.stats.allocators = s.at("allocators").get<std::size_t>();
  r.stats.deallocators = s.at("deallocators").get<std::size_t>();
  r.stats.candidates = s.at("candidates").get<std::size_t>();
  r.stats.paths = s.at("paths").get<std::size_t>();
  r.stats.fixpoint_rounds = s.at("fixpoint_rounds").get<int>();
  r.stats.candidate_filter = s.at("candidate_filter").get<bool>();
  for (const json &jf : j.at("findings")) {
    ReportFinding f;
    f.function = jf.at("function").get<std::string>();
    f.rule = jf.at("rule").get<std::string>();
    f.confidence = jf.at("confidence").get<std::string>();
    f.alloc_site = loc_from(jf.at("alloc_site"));
    f.origin_site = loc_from(jf.at("origin_site"));
    f.alloc_chain = jf.at("alloc_chain").get<std::vector<std::string>>();
    f.leaked_path = jf.at("leaked_path").get<std::string>();
    f.trigger = jf.at("trigger").get<std::string>();
    f.alternates = jf.at("alternates").get<std::vector<std::string>>();
    for (const json &w : jf.at("witness"))
      f.witness.push_back({loc_from(w), w.at("text").get<std::string>()});
    if (jf.contains("trace"))
      f.trace = jf["trace"];
    r.findings.push_back(std::move(f));
  }
  for (const json &jd : j.at("diagnostics")) {
    ReportDiagnostic d;
    d.kind = jd.at("kind").get<std::string>();
    d.function = jd.at("function").get<std::string>();
    d.message = jd.at("message").get<std::string>();
    if (jd.contains("location"))
      d.loc = loc_from(jd["location"]);
    r.diagnostics.push_back(std::move(d));
  }
  return r;
}

std::string report_digest(const Report &report) {
  json j = report_to_json(report);
  j.erase("timing_ms");
  return fnv1a_hex(j.dump());
}

std::string encode_report(const Report &report) {
  json j = report_to_json(report);
  j["digest"] = report_digest(report);
  return j.dump(2) + "\n";
}

//===----------------------------------------------------------------------===//
// HTML
//===----------------------------------------------------------------------===//

namespace {

std::string esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

std::string where(const SourceLoc &l) {
  return l.file + ":" + std::to_string(l.line) + ":" + std::to_string(l.column);
}

constexpr const char *kStyle = R"(body{font-family:sans-serif;margin:2em;color:#222}
h1{font-size:1.4em}h2{font-size:1.1em;margin-top:2em}
table{border-collapse:collapse}td,th{padding:2px 8px;text-align:left}
.stats td{border-bottom:1px solid #ddd}
.finding{border:1px solid #ccc;border-radius:4px;padding:0 1em 1em;margin:1em 0}
.low{border-color:#d9a400}
code,pre{font-family:monospace;background:#f5f5f5}
.trigger{background:#fff4f4;padding:4px}
.witness td.loc{color:#666;white-space:nowrap}
.witness td.src{font-family:monospace;white-space:pre}
)";

} // namespace

std::string render_html(const Report &r) {
  std::ostringstream o;
  o << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">\n<title>leakscan: "
    << esc(r.project) << "</title>\n<style>" << kStyle << "</style></head><body>\n";
  o << "<h1>leakscan report for " << esc(r.project) << "</h1>\n";
  o << "<table class=\"stats\">\n"
    << "<tr><td>version</td><td>" << esc(r.tool_version) << "</td></tr>\n"
    << "<tr><td>manifest digest</td><td><code>" << esc(r.manifest_digest)
    << "</code></td></tr>\n"
    << "<tr><td>files / functions</td><td>" << r.stats.files << " / "
    << r.stats.functions << "</td></tr>\n"
    << "<tr><td>allocators / deallocators</td><td>" << r.stats.allocators << " / "
    << r.stats.deallocators << "</td></tr>\n"
    << "<tr><td>candidate functions</td><td>" << r.stats.candidates << "</td></tr>\n"
    << "<tr><td>findings</td><td>" << r.findings.size() << "</td></tr>\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", r.times.total_ms());
  o << "<tr><td>time (ms)</td><td>" << buf << "</td></tr>\n</table>\n";

  for (std::size_t i = 0; i < r.findings.size(); ++i) {
    const ReportFinding &f = r.findings[i];
    o << "<div class=\"finding" << (f.confidence == "low" ? " low" : "") << "\">\n"
      << "<h2>#" << i + 1 << " leak of <code>" << esc(f.leaked_path) << "</code> in <code>"
      << esc(f.function) << "</code></h2>\n"
      << "<p>allocated at <code>" << esc(where(f.alloc_site)) << "</code>";
    if (f.alloc_chain.size() > 1) {
      o << " via <code>";
      for (std::size_t k = 0; k < f.alloc_chain.size(); ++k)
        o << (k ? " &rarr; " : "") << esc(f.alloc_chain[k]);
      o << "</code>";
    }
    o << "; rule " << esc(f.rule) << ", confidence " << esc(f.confidence) << "</p>\n"
      << "<p>triggered when:</p><pre class=\"trigger\">" << esc(f.trigger) << "</pre>\n";
    if (f.alternates.size() > 1) {
      o << "<details><summary>" << f.alternates.size()
        << " triggering conditions</summary><ul>\n";
      for (const std::string &a : f.alternates)
        o << "<li><code>" << esc(a) << "</code></li>\n";
      o << "</ul></details>\n";
    }
    o << "<table class=\"witness\">\n";
    for (const WitnessStep &s : f.witness)
      o << "<tr><td class=\"loc\">" << esc(where(s.loc)) << "</td><td class=\"src\">"
        << esc(s.text) << "</td></tr>\n";
    o << "</table>\n</div>\n";
  }
  if (!r.diagnostics.empty()) {
    o << "<h2>Diagnostics</h2>\n<ul>\n";
    for (const ReportDiagnostic &d : r.diagnostics) {
      o << "<li>" << esc(d.kind) << " in <code>" << esc(d.function) << "</code>";
      if (d.loc)
        o << " at <code>" << esc(where(*d.loc)) << "</code>";
      o << ": " << esc(d.message) << "</li>\n";
    }
    o << "</ul>\n";
  }
  o << "</body></html>\n";
  return o.str();
}

void emit_report(const Report &report, const std::string &format,
                 const std::string &out) {
  std::string text;
  if (format == "json")
    text = encode_report(report);
  else if (format == "html")
    text = render_html(report);
  else
    throw Error("unknown report format '" + format + "'");
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  f << text;
  if (!f)
    throw IoError("cannot write " + out);
}

//===----------------------------------------------------------------------===//
// Pipeline
//===----------------------------------------------------------------------===//

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

SourceLoc to_loc(const SourceManager &sm, const Span &s) {
  LineCol lc = sm.line_col(s);
  return {sm.path(s.file), lc.line, lc.column};
}

std::string trimmed(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

ReportFinding to_report(const Finding &f, const Program &p, bool traces) {
  const SourceManager &sm = p.sources;
  ReportFinding r;
  r.function = f.function;
  r.rule = std::string(leak_rule_name(f.rule));
  r.confidence = f.low_confidence ? "low" : "high";
  r.alloc_site = to_loc(sm, f.alloc_site);
  r.origin_site = to_loc(sm, f.origin_site);
  r.alloc_chain = f.alloc_chain;
  r.leaked_path = f.leaked_path;
  r.trigger = f.trigger;
  r.alternates = f.alternates;
  for (const Span &s : f.witness) {
    WitnessStep step{to_loc(sm, s), trimmed(sm.line_text(s))};
    // Several items on one line collapse into a single step.
    if (!r.witness.empty() && r.witness.back().loc.file == step.loc.file &&
        r.witness.back().loc.line == step.loc.line)
      continue;
    r.witness.push_back(std::move(step));
  }
  if (traces)
    r.trace = trace_to_json(f.trace, &sm);
  return r;
}

ReportDiagnostic to_report(const Diagnostic &d, const Program &p) {
  ReportDiagnostic r;
  r.kind = std::string(diag_kind_name(d.kind));
  r.function = d.function;
  r.message = d.message;
  if (d.site.length > 0)
    r.loc = to_loc(p.sources, d.site);
  return r;
}

std::string manifest_digest(const Manifest &m, const Program &p) {
  std::string bytes = m.name + '\0' + config_to_json(m.config).dump() + '\0';
  for (std::size_t i = 0; i < p.sources.size(); ++i)
    bytes += m.files.at(i) + '\0' + p.sources.text(static_cast<FileId>(i)) + '\0';
  return fnv1a_hex(bytes);
}

} // namespace

PipelineResult run_pipeline(const Manifest &manifest) {
  PipelineOptions o;
  o.config = manifest.config;
  return run_pipeline(manifest, o);
}

PipelineResult run_pipeline(const Manifest &manifest, const PipelineOptions &options) {
  PipelineResult res;
  Report &rep = res.report;
  rep.project = manifest.name;
  rep.config = options.config;
  const AnalysisConfig &cfg = options.config;

  auto t0 = Clock::now();
  std::vector<std::pair<std::string, std::string>> files;
  for (const std::string &f : manifest.files)
    files.emplace_back(f, read_file((fs::path(manifest.base_dir) / f).string()));
  res.program = load_program(files);
  res.callgraph = build_call_graph(res.program);
  rep.times.preprocess_ms = ms_since(t0);

  auto t1 = Clock::now();
  std::vector<Diagnostic> diags;
  if (options.summaries_in) {
    res.store = decode_summaries(*options.summaries_in, &res.program);
  } else {
    FixpointResult fx = generate_summaries(res.program, res.callgraph, cfg);
    res.store = std::move(fx.store);
    rep.stats.fixpoint_rounds = fx.rounds;
    diags = std::move(fx.diagnostics);
  }
  rep.times.modeling_ms = ms_since(t1);

  auto t2 = Clock::now();
  if (options.candidate_filter) {
    CandidateSet cs = identify_candidates(res.callgraph, res.store);
    res.analyzed.assign(cs.functions.begin(), cs.functions.end());
  } else {
    res.analyzed = res.program.defined_functions();
    std::sort(res.analyzed.begin(), res.analyzed.end());
  }
  rep.times.candidates_ms = ms_since(t2);

  auto t3 = Clock::now();
  for (FunctionId f : res.analyzed) {
    if (!res.program.function(f).defined())
      continue;
    CandidateAnalysis a = analyze_candidate(f, res.program, res.store, cfg);
    rep.stats.paths += a.paths;
    for (Diagnostic &d : a.diagnostics)
      diags.push_back(std::move(d));
    for (Finding &x : a.findings)
      res.findings.push_back(std::move(x));
  }
  rep.times.detection_ms = ms_since(t3);

  const SourceManager &sm = res.program.sources;
  std::sort(res.findings.begin(), res.findings.end(),
            [&](const Finding &a, const Finding &b) {
              auto ka = std::tie(sm.path(a.alloc_site.file), a.alloc_site, a.function);
              auto kb = std::tie(sm.path(b.alloc_site.file), b.alloc_site, b.function);
              return ka < kb;
            });
  for (const Finding &f : res.findings)
    rep.findings.push_back(to_report(f, res.program, options.dump_traces));
  std::sort(diags.begin(), diags.end());
  diags.erase(std::unique(diags.begin(), diags.end()), diags.end());
  for (const Diagnostic &d : diags)
    rep.diagnostics.push_back(to_report(d, res.program));

  rep.manifest_digest = manifest_digest(manifest, res.program);
  rep.stats.files = manifest.files.size();
  rep.stats.functions = res.program.defined_functions().size();
  rep.stats.allocators = res.store.allocator_count();
  rep.stats.deallocators = res.store.deallocator_count();
  rep.stats.candidates = res.analyzed.size();
  rep.stats.candidate_filter = options.candidate_filter;
  return res;
}

} // namespace leakscan

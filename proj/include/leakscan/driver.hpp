//===- driver.hpp - Manifest ingestion, pipeline and reports ------*- C++ -*-===//
#pragma once

#include "leakscan/checker.hpp"
#include "leakscan/graphs.hpp"
#include "leakscan/summaries.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace leakscan {

inline constexpr const char *kToolVersion = "0.1.0";

struct Manifest {
  std::string name;
  std::string base_dir;             // directory of the manifest file
  std::vector<std::string> files;   // as written, relative to base_dir
  AnalysisConfig config;            // defaults plus the manifest overrides
  nlohmann::json overrides = nlohmann::json::object();
};

/// Strict parse: unknown top-level or config keys are errors.
Manifest parse_manifest(const nlohmann::json &doc, const std::string &base_dir);
Manifest ingest_manifest(const std::string &path);

void apply_config_overrides(AnalysisConfig &config, const nlohmann::json &overrides);
nlohmann::json config_to_json(const AnalysisConfig &config);

struct SourceLoc {
  std::string file;
  std::uint32_t line = 0;
  std::uint32_t column = 0;

  auto operator<=>(const SourceLoc &) const = default;
};

struct WitnessStep {
  SourceLoc loc;
  std::string text;  // the source line, trimmed

  bool operator==(const WitnessStep &) const = default;
};

struct ReportFinding {
  std::string function;
  std::string rule;        // scope-exit | global-overwrite
  std::string confidence;  // high | low
  SourceLoc alloc_site;
  SourceLoc origin_site;
  std::vector<std::string> alloc_chain;
  std::string leaked_path;
  std::string trigger;
  std::vector<std::string> alternates;
  std::vector<WitnessStep> witness;
  nlohmann::json trace;  // null unless traces were requested

  bool operator==(const ReportFinding &) const = default;
};

struct ReportDiagnostic {
  std::string kind;
  std::string function;
  std::optional<SourceLoc> loc;
  std::string message;

  bool operator==(const ReportDiagnostic &) const = default;
};

struct PhaseTimes {
  double preprocess_ms = 0;
  double modeling_ms = 0;
  double candidates_ms = 0;
  double detection_ms = 0;

  double total_ms() const {
    return preprocess_ms + modeling_ms + candidates_ms + detection_ms;
  }
  bool operator==(const PhaseTimes &) const = default;
};

struct ReportStats {
  std::size_t files = 0;
  std::size_t functions = 0;
  std::size_t allocators = 0;
  std::size_t deallocators = 0;
  std::size_t candidates = 0;
  std::size_t paths = 0;
  int fixpoint_rounds = 0;
  bool candidate_filter = true;

  bool operator==(const ReportStats &) const = default;
};

struct Report {
  std::string tool_version = kToolVersion;
  std::string project;
  std::string manifest_digest;
  AnalysisConfig config;
  PhaseTimes times;
  ReportStats stats;
  std::vector<ReportFinding> findings;  // sorted by allocation site
  std::vector<ReportDiagnostic> diagnostics;

  bool operator==(const Report &) const = default;
};

nlohmann::json report_to_json(const Report &report);
Report report_from_json(const nlohmann::json &doc);
/// Canonical JSON text. Includes a digest computed with timing removed.
std::string encode_report(const Report &report);
std::string report_digest(const Report &report);
std::string render_html(const Report &report);

/// "json" or "html"; writes to `out`, or stdout when it is empty.
void emit_report(const Report &report, const std::string &format,
                 const std::string &out);

struct PipelineOptions {
  AnalysisConfig config;
  bool candidate_filter = true;
  bool dump_traces = false;
  /// Pre-computed summaries replace the modeling phase.
  std::optional<std::string> summaries_in;
};

struct PipelineResult {
  Program program;
  CallGraph callgraph;
  SummaryStore store;
  std::vector<FunctionId> analyzed;
  /// Raw findings per analyzed function, before conversion to the report.
  std::vector<Finding> findings;
  Report report;
};

/// Loads the manifest's files and runs every phase. Frontend and link
/// errors throw; analysis problems become report diagnostics.
PipelineResult run_pipeline(const Manifest &manifest, const PipelineOptions &options);
PipelineResult run_pipeline(const Manifest &manifest);

/// 64-bit FNV-1a over bytes, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

} // namespace leakscan

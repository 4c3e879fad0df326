#pragma once

#include "leakscan/driver.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace harness {

using Site = std::pair<std::string, int>;  // function, line

struct Variant {
  std::string name;  // case/bad or case/good
  bool positive = false;
  std::set<Site> expected;
  std::set<Site> analyzer;       // every finding
  std::set<Site> analyzer_high;  // findings on Sat paths
  std::set<Site> oracle;         // empty unless the oracle was requested
  std::size_t candidates = 0;
  std::string report;  // canonical JSON with timing removed
};

struct CorpusRun {
  std::vector<Variant> variants;
  std::size_t cases = 0;
  std::size_t expected_sites = 0;  // in bad.mc files
  std::size_t found_sites = 0;     // of those, reported by the analyzer
  std::size_t sat_false_positives = 0;
  std::size_t extra_findings = 0;  // any finding not in the sidecar
  double recall() const {
    return expected_sites ? double(found_sites) / double(expected_sites) : 0.0;
  }
};

struct CorpusOptions {
  bool candidate_filter = true;
  bool with_oracle = false;
};

/// Every case directory under fixtures/corpus, sorted.
std::vector<std::string> corpus_cases();
CorpusRun run_corpus(const CorpusOptions &options = {});

/// Report JSON with the timing block and the digest dropped.
std::string strip_timing(const leakscan::Report &report);

struct DiffRun {
  std::size_t programs = 0;
  std::size_t oracle_runs = 0;
  std::size_t agree = 0;
  std::size_t false_negatives = 0;
  std::size_t sat_false_positives = 0;
  std::size_t low_false_positives = 0;
  std::size_t diverged = 0;
  std::vector<std::string> failures;  // first few disagreements
};

/// Random programs from progen seeded with base, base+1, ...
DiffRun differential(std::uint64_t base, int count);

} // namespace harness

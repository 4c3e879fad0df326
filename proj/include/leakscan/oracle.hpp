//===- oracle.hpp - Brute-force concrete leak oracle --------------*- C++ -*-===//
//
// Runs a function concretely over every assignment of its unknown inputs.
// Unknowns (integer parameters, results of undefined functions, reads of
// uninitialized or external memory) are drawn from a small domain built
// around the program's integer literals; pointer parameters are either
// NULL or a distinct external cell. A site leaks in a run when an object
// it produced is still allocated at exit and unreachable from the return
// value, globals, caller-visible memory and global collections.
//
// Shares no code with the symbolic engine or the checker.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "leakscan/program.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace leakscan {

struct OracleLimits {
  int loop_bound = 3;        // iterations per loop entry
  long step_budget = 20000;  // statements + expressions per run
  long max_runs = 200000;
  int max_depth = 16;
};

class Diverged : public Error {
public:
  using Error::Error;
};

enum class RunEnd { Returned, Crashed };

struct ConcreteRun {
  std::vector<int> decisions;  // index chosen at each unknown
  std::vector<std::int64_t> inputs;  // the values those indices denote
  RunEnd end = RunEnd::Returned;
  /// Per allocation site in the entry function: true when it leaked.
  std::map<Span, bool> verdicts;
  /// Some object allocated in this run reaches the caller through the
  /// return value or a parameter.
  bool outward = false;
  /// free() was called on caller-provided memory.
  bool frees_input = false;
};

std::vector<ConcreteRun> enumerate_runs(const Program &program, FunctionId entry,
                                        const OracleLimits &limits = {});

/// Sites that leak in at least one run.
std::set<Span> oracle_leak_sites(const std::vector<ConcreteRun> &runs);

struct SiteVerdict {
  Span site;
  bool low_confidence = false;  // analyzer side only
};

struct DiffReport {
  std::vector<Span> agree;
  std::vector<Span> false_negatives;
  std::vector<SiteVerdict> false_positives;

  /// No missed leak and no false positive on a Sat path.
  bool gate_passes() const;
};

DiffReport compare(const std::vector<SiteVerdict> &analyzer,
                   const std::vector<ConcreteRun> &runs);

} // namespace leakscan

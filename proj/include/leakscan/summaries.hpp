//===- summaries.hpp - MAD function summaries and the fixpoint ----*- C++ -*-===//
//
// A summary says which memory a function allocates (returned, stored
// through a parameter, stored in a global) and which parameter memory it
// frees. Paths are explicit step lists from a base value:
//
//   Deref      follow a pointer
//   Field(f)   select a struct field of the current location
//
// Every object path ends in Deref. Renderings drop the derefs and join
// fields with "->", so `DecoderPriv **pdec` storing `dp` and `dp->frame`
// yields "pdec" = [D,D] and "pdec->frame" = [D,D,frame,D].
//
//===----------------------------------------------------------------------===//
#pragma once

#include "leakscan/config.hpp"
#include "leakscan/graphs.hpp"
#include "leakscan/program.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace leakscan {

enum class PathBase { Return, Param, Global };

struct PathStep {
  bool deref = true;
  std::string field;  // when !deref

  static PathStep d() { return {}; }
  static PathStep f(std::string name) { return {false, std::move(name)}; }
  auto operator<=>(const PathStep &) const = default;
};

struct AccessPath {
  PathBase base = PathBase::Return;
  int index = -1;    // Param
  std::string name;  // Param name or Global name
  std::vector<PathStep> steps;

  static AccessPath ret(std::vector<PathStep> steps = {PathStep::d()});
  static AccessPath param(int index, std::string name,
                          std::vector<PathStep> steps);
  static AccessPath global(std::string name, std::vector<PathStep> steps);

  std::vector<std::string> fields() const;
  /// "pdec->frame", "return", "::g_list".
  std::string render() const;
  /// Steps only: "**.frame*".
  std::string notation() const;

  auto operator<=>(const AccessPath &) const = default;
};

/// Parse a notation string produced by AccessPath::notation.
std::vector<PathStep> parse_notation(std::string_view text);

enum class FunctionType { None, Allocator, Deallocator, Both };

std::string_view function_type_name(FunctionType t);

struct FunctionSummary {
  std::string name;
  FunctionType type = FunctionType::None;
  std::vector<AccessPath> ret_objects;
  std::vector<AccessPath> para_objects;
  /// Objects stored into globals; kept apart from para_objects so the
  /// parameter list keeps its usual shape.
  std::vector<AccessPath> global_objects;
  std::vector<AccessPath> freed_params;
  bool conditional = false;

  bool allocates() const {
    return !ret_objects.empty() || !para_objects.empty() || !global_objects.empty();
  }
  bool frees() const { return !freed_params.empty(); }
  /// Set `type` from the lists.
  void classify();
  bool operator==(const FunctionSummary &) const = default;
};

class SummaryStore {
public:
  struct Entry {
    FunctionSummary summary;
    int generation = 0;  // round at which it last changed; 0 for seeds
    bool seed = false;
  };

  const FunctionSummary *find(std::string_view name) const;
  bool is_allocator(std::string_view name) const;
  bool is_mad(std::string_view name) const;
  int generation(std::string_view name) const;

  /// Union `s` into the entry for s.name. Lists only grow; `conditional`
  /// takes the latest value. Seeds are never modified. Returns true if the
  /// entry changed.
  bool merge(const FunctionSummary &s, int generation);
  void put_seed(FunctionSummary s);

  const std::map<std::string, Entry, std::less<>> &entries() const { return entries_; }
  std::size_t allocator_count() const;
  std::size_t deallocator_count() const;

  bool operator==(const SummaryStore &) const = default;

private:
  std::map<std::string, Entry, std::less<>> entries_;
};

SummaryStore seed_summaries();

/// JSON array of summary objects ordered by name. Seeds are not written.
std::string encode_summaries(const SummaryStore &store);
/// Inverse of encode_summaries, merged over the seeds. Parameter names are
/// resolved to indices against `program` when given. Throws DecodeError.
SummaryStore decode_summaries(std::string_view text, const Program *program = nullptr);

struct SummaryOutcome {
  std::optional<FunctionSummary> summary;  // nullopt when the budget tripped
  std::vector<Diagnostic> diagnostics;
};

SummaryOutcome summarize_function(FunctionId function, const Program &program,
                                  const SummaryStore &store,
                                  const AnalysisConfig &config);

struct FixpointResult {
  SummaryStore store;
  int rounds = 0;
  /// Snapshot of every non-seed summary after each round.
  std::vector<std::map<std::string, FunctionSummary>> history;
  std::vector<Diagnostic> diagnostics;
};

FixpointResult generate_summaries(const Program &program, const CallGraph &cg,
                                  const AnalysisConfig &config);

} // namespace leakscan

#pragma once

#include "leakscan/ast.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leakscan {

using FunctionId = int;

/// Library allocation/deallocation primitives whose behaviour is built in.
inline constexpr std::array<std::string_view, 5> kSeedFunctions = {
    "malloc", "calloc", "realloc", "strdup", "free"};

bool is_seed_function(std::string_view name);

enum class FunctionKind { Defined, Seed, External };

struct FunctionInfo {
  FunctionId id = -1;
  std::string name;
  FunctionKind kind = FunctionKind::External;
  const Function *def = nullptr;   // set for Defined
  const Unit *unit = nullptr;

  bool defined() const { return kind == FunctionKind::Defined; }
};

struct GlobalInfo {
  std::string name;
  TypeRef type;
  const GlobalVar *def = nullptr;
};

/// A linked whole program. Owns its units; Function pointers stay valid for
/// the Program's lifetime.
class Program {
public:
  Program() = default;
  Program(Program &&) = default;
  Program &operator=(Program &&) = default;

  std::vector<Unit> units;
  SourceManager sources;

  const std::vector<FunctionInfo> &functions() const { return functions_; }
  const FunctionInfo &function(FunctionId id) const { return functions_.at(id); }
  std::optional<FunctionId> find_function(std::string_view name) const;
  const FunctionInfo *function_named(std::string_view name) const;

  const std::map<std::string, GlobalInfo, std::less<>> &globals() const {
    return globals_;
  }
  const RecordDecl *record(std::string_view tag) const;

  /// Names of called functions with neither a definition nor a seed model.
  std::vector<std::string> externals() const;
  /// Defined functions in declaration order.
  std::vector<FunctionId> defined_functions() const;

private:
  friend Program link_program(std::vector<Unit> units, SourceManager sources);

  std::vector<FunctionInfo> functions_;
  std::map<std::string, FunctionId, std::less<>> function_ids_;
  std::map<std::string, GlobalInfo, std::less<>> globals_;
  std::map<std::string, const RecordDecl *, std::less<>> records_;
};

/// Byte size used for sizeof: pointers 8, char 1, short 2, long-ish 8,
/// other scalars 4, records the sum of their fields. sizeof on an
/// expression is always 8.
std::int64_t type_size(const Program &program, const TypeRef &type);

/// Cross-unit name resolution. Throws LinkError listing every duplicate or
/// conflicting symbol and every undeclared identifier.
Program link_program(std::vector<Unit> units, SourceManager sources = {});

/// Parse each (path, text) pair and link. Fills Program::sources.
Program load_program(const std::vector<std::pair<std::string, std::string>> &files);

} // namespace leakscan

//===- heapmodel.hpp - Symbolic heap with ownership and refcounts -*- C++ -*-===//
//
// Heaps are per-path values. Operations mutate in place; the symbolic
// executor copies a heap when a path forks.
//
//===----------------------------------------------------------------------===//
#pragma once

#include "leakscan/source.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace leakscan {

struct PathConstraint;
using ObjectId = int;

enum class ObjState { Allocated, Freed };

enum class OwnerKind {
  Caller,      // the function that performed the allocation
  Global,      // name = global variable
  ParamSlot,   // name = access path, e.g. "pdec"
  HeapParent,  // parent = owning object
  ReturnSlot,  // returned from the analyzed function
  Collection,  // name = the inserting callee
};

struct Owner {
  OwnerKind kind = OwnerKind::Caller;
  std::string name;
  ObjectId parent = -1;

  static Owner caller() { return {}; }
  static Owner global(std::string n) { return {OwnerKind::Global, std::move(n)}; }
  static Owner param_slot(std::string path) {
    return {OwnerKind::ParamSlot, std::move(path)};
  }
  static Owner heap_parent(ObjectId p) { return {OwnerKind::HeapParent, {}, p}; }
  static Owner return_slot() { return {OwnerKind::ReturnSlot}; }
  static Owner collection(std::string fn) {
    return {OwnerKind::Collection, std::move(fn)};
  }

  /// Owners that make an object outlive the analyzed function on their own.
  bool is_escape() const {
    return kind == OwnerKind::Global || kind == OwnerKind::ParamSlot ||
           kind == OwnerKind::ReturnSlot || kind == OwnerKind::Collection;
  }
  std::string str() const;
  auto operator<=>(const Owner &) const = default;
};

struct MemoryObject {
  ObjectId id = -1;
  Span alloc_site;    // innermost allocation call (the seed)
  Span entry_site;    // call site in the analyzed function that produced it
  ObjState state = ObjState::Allocated;
  int refcount = 1;
  std::set<Owner> owners;
  bool escaped = false;
  std::shared_ptr<const PathConstraint> alloc_condition;
  std::map<std::string, ObjectId> children;
  ObjectId parent = -1;
  /// Allocated inside an inlined callee and unreachable once it returned;
  /// any leak belongs to that callee, not to the analyzed function.
  bool orphaned = false;
  /// Callee names from the entry call down to the seed allocator.
  std::vector<std::string> alloc_chain;
};

enum class EventKind {
  Allocate,
  Free,
  Copy,
  Return,
  StoreGlobal,
  StoreParam,
  TransferOwnership,
  Release,   // refcount decrement that did not free
  Disown,    // entity stopped owning the object (slot overwritten, detach)
  CallArg,   // passed as an argument to `callee`
};

std::string_view event_kind_name(EventKind k);

struct OwnershipEvent {
  EventKind kind = EventKind::Allocate;
  ObjectId object = -1;
  Span site;
  Owner entity;        // StoreGlobal / StoreParam / TransferOwnership / Disown
  std::string callee;  // CallArg

  bool operator==(const OwnershipEvent &) const = default;
};

struct OwnershipTrace {
  std::vector<OwnershipEvent> events;

  bool operator==(const OwnershipTrace &) const = default;
};

enum class HeapDiagKind { DoubleFree, UseAfterFree, ForestViolation };

struct HeapDiagnostic {
  HeapDiagKind kind;
  ObjectId object;
  Span site;
};

class ForestViolation : public Error {
public:
  ForestViolation(ObjectId child, ObjectId existing_parent)
      : Error("object " + std::to_string(child) + " already has parent " +
              std::to_string(existing_parent)),
        child(child), parent(existing_parent) {}
  ObjectId child, parent;
};

struct Heap {
  std::vector<MemoryObject> objects;
  OwnershipTrace trace;
  std::vector<HeapDiagnostic> diagnostics;

  MemoryObject &at(ObjectId id) { return objects.at(id); }
  const MemoryObject &at(ObjectId id) const { return objects.at(id); }
};

ObjectId allocate(Heap &heap, Span site,
                  std::shared_ptr<const PathConstraint> condition = nullptr);
/// Reset refcount to 0, mark Freed, drop Caller ownership and cascade into
/// children. Freeing a Freed object records DoubleFree and changes nothing.
void free_object(Heap &heap, ObjectId id, Span site = {});
void copy_ref(Heap &heap, ObjectId id, Span site = {});
void drop_ref(Heap &heap, ObjectId id, Span site = {});
void transfer_ownership(Heap &heap, ObjectId id, const Owner &entity,
                        Span site = {});
/// Undo a Global/ParamSlot/Collection ownership after its slot was
/// overwritten. Global releases also drop the reference they held.
void release_owner(Heap &heap, ObjectId id, const Owner &entity, Span site = {});
/// Throws ForestViolation if the child already has a parent.
void attach_inner(Heap &heap, ObjectId parent, const std::string &field,
                  ObjectId child, Span site = {});
void detach_inner(Heap &heap, ObjectId parent, const std::string &field);
/// Return event plus transfer to ReturnSlot.
void record_return(Heap &heap, ObjectId id, Span site = {});
void record_call_arg(Heap &heap, ObjectId id, const std::string &callee,
                     Span site = {});

/// An escape owner on the object, or on a HeapParent ancestor.
bool escapes(const Heap &heap, ObjectId id);

enum class LtlPattern { AROR, IAROR, DAOR, DAOOR, AGOR, DAGOR, ACR };

std::string_view pattern_name(LtlPattern p);
inline constexpr LtlPattern kAllPatterns[] = {
    LtlPattern::AROR,  LtlPattern::IAROR, LtlPattern::DAOR, LtlPattern::DAOOR,
    LtlPattern::AGOR,  LtlPattern::DAGOR, LtlPattern::ACR};

/// Evaluate a pattern over a finite trace. Consecutive events with the same
/// site form one time step. F and G range over the remaining steps,
/// including the current one. Object atoms such as shared(p, n) hold only
/// from p's allocation step up to and including its free step. For DAOR
/// and DAOOR, `callee` restricts call(f) to CallArg events naming it.
bool check_trace(const OwnershipTrace &trace, LtlPattern pattern,
                 const std::string &callee = {});

nlohmann::json trace_to_json(const OwnershipTrace &trace,
                             const SourceManager *sources = nullptr);

} // namespace leakscan

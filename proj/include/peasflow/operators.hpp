#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "peasflow/value.hpp"

namespace peasflow {

enum class OperatorKind { Selection, Projection, Aggregation, Join };

const char* operator_kind_name(OperatorKind k);

enum class Comparator { Lt, Le, Gt, Ge, Eq, Ne };

struct SelectionPredicate {
  std::string attribute;
  Comparator cmp{Comparator::Gt};
  Value constant;

  bool operator==(const SelectionPredicate&) const = default;
};

/// One operation of a Π or Σ operator: named output computed by `fn` over
/// the referenced attributes.
struct ProjectionParam {
  std::string name;
  std::vector<std::string> attributes;
  std::string fn;

  bool operator==(const ProjectionParam&) const = default;
};

enum class WindowMode { Time, Count };

/// Sliding-window extent; units are milliseconds in Time mode and tuple
/// counts in Count mode. size >= slide >= 1.
struct WindowSpec {
  WindowMode mode{WindowMode::Time};
  std::int64_t size{10000};
  std::int64_t slide{10000};

  bool operator==(const WindowSpec&) const = default;
};

struct JoinSpec {
  std::string left_attribute;
  std::string right_attribute;
  WindowSpec left_window;
  WindowSpec right_window;

  bool operator==(const JoinSpec&) const = default;
};

/// Declarative operator description, part of a query-graph node record.
/// Aggregation carries exactly one parameter plus a window; Join carries the
/// two attribute references and one window per input.
struct OperatorSpec {
  OperatorKind kind{OperatorKind::Selection};
  std::optional<SelectionPredicate> predicate;   // Selection
  std::vector<ProjectionParam> parameters;       // Projection / Aggregation
  std::optional<WindowSpec> window;              // Aggregation
  std::optional<JoinSpec> join;                  // Join

  bool operator==(const OperatorSpec&) const = default;
};

}  // namespace peasflow

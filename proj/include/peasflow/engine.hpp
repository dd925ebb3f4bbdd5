#pragma once

#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "peasflow/peas.hpp"

namespace peasflow {

/// Tuple buffer for one window. Enforces a per-stream monotone clock and
/// evicts by the (mode, size) admissibility rule.
class Window {
 public:
  explicit Window(WindowSpec spec) : spec_(spec) {}

  /// Buffers t and returns the tuples evicted at clock `now` (defaults to
  /// t.timestamp). Throws NonMonotoneTimestamp when t arrives out of order.
  std::vector<Tuple> push(Tuple t, std::optional<std::int64_t> now = {});

  /// Drops tuples no longer admissible at clock `now` (Time mode only).
  std::vector<Tuple> evict(std::int64_t now);

  const std::deque<Tuple>& tuples() const { return buf_; }
  const WindowSpec& spec() const { return spec_; }
  bool empty() const { return buf_.empty(); }

 private:
  WindowSpec spec_;
  std::deque<Tuple> buf_;
  std::int64_t last_ts_ = std::numeric_limits<std::int64_t>::min();
};

/// Pass-through filter. Survivors keep every attribute byte-identical.
std::optional<Tuple> apply_selection(const SelectionPredicate& pred,
                                     const Tuple& t);

/// One output attribute per parameter, meta-data via peas_derive.
Tuple apply_projection(const OperatorSpec& op, const Tuple& t,
                       const DerivationPathRegistry& reg,
                       const Taxonomy& purpose_tax,
                       const Taxonomy& category_tax,
                       ComposeCache* cache = nullptr);

/// Aggregate over the window contents, emitted at `emit_ts`. Returns nothing
/// for an empty window. pp composes the distinct preferences present in the
/// window; category and history follow the peas rules.
std::optional<Tuple> apply_aggregation(const OperatorSpec& op, const Window& w,
                                       std::int64_t emit_ts,
                                       const DerivationPathRegistry& reg,
                                       const Taxonomy& purpose_tax,
                                       const Taxonomy& category_tax,
                                       ComposeCache* cache = nullptr);

enum class JoinSide { Left, Right };

/// Matches `arrival` against the opposite window, emits one tuple per match
/// via the peas join branch, then inserts `arrival` into its own window.
std::vector<Tuple> apply_join(const OperatorSpec& op, Window& left,
                              Window& right, const Tuple& arrival,
                              JoinSide side, const DerivationPathRegistry& reg,
                              const Taxonomy& purpose_tax,
                              const Taxonomy& category_tax,
                              ComposeCache* cache = nullptr);

// Value-only twins of the derivation paths, used when enforcement is off:
// same output layout and cadence, no meta-data work.

Tuple project_values_only(const OperatorSpec& op, const Tuple& t);

std::optional<Tuple> aggregate_values_only(const OperatorSpec& op,
                                           const Window& w,
                                           std::int64_t emit_ts);

std::vector<Tuple> join_values_only(const OperatorSpec& op, Window& left,
                                    Window& right, const Tuple& arrival,
                                    JoinSide side);

/// Stateful projection operator; caches composed preferences across tuples.
class ProjectionOp {
 public:
  ProjectionOp(OperatorSpec spec, const DerivationPathRegistry& reg,
               const Taxonomy& purpose_tax, const Taxonomy& category_tax,
               bool metadata = true);

  Tuple process(const Tuple& t);

 private:
  OperatorSpec spec_;
  const DerivationPathRegistry& reg_;
  const Taxonomy& purpose_tax_;
  const Taxonomy& category_tax_;
  bool metadata_;
  ComposeCache cache_;
};

/// Stateful aggregation operator: emits once per slide boundary crossed,
/// plus a final partial window on close. With `metadata` off it aggregates
/// values only.
class AggregationOp {
 public:
  AggregationOp(OperatorSpec spec, const DerivationPathRegistry& reg,
                const Taxonomy& purpose_tax, const Taxonomy& category_tax,
                bool metadata = true);

  std::vector<Tuple> process(Tuple t);
  std::vector<Tuple> close(std::int64_t end_ts);

 private:
  std::optional<Tuple> emit(std::int64_t emit_ts);

  OperatorSpec spec_;
  const DerivationPathRegistry& reg_;
  const Taxonomy& purpose_tax_;
  const Taxonomy& category_tax_;
  bool metadata_;
  Window window_;
  std::int64_t next_emit_at_;
  std::int64_t pushes_since_emit_ = 0;
  ComposeCache cache_;
};

/// Stateful two-input join operator.
class JoinOp {
 public:
  JoinOp(OperatorSpec spec, const DerivationPathRegistry& reg,
         const Taxonomy& purpose_tax, const Taxonomy& category_tax,
         bool metadata = true);

  std::vector<Tuple> process(Tuple t, JoinSide side);

 private:
  OperatorSpec spec_;
  const DerivationPathRegistry& reg_;
  const Taxonomy& purpose_tax_;
  const Taxonomy& category_tax_;
  bool metadata_;
  Window left_;
  Window right_;
  ComposeCache cache_;
};

}  // namespace peasflow

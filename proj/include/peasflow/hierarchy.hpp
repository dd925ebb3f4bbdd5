#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "peasflow/error.hpp"

namespace peasflow {

/// Opaque node identifier (case-sensitive, nonempty) in a purpose or
/// data-category tree.
using NodeId = std::string;

/// Closure-expanded node set: union of allowed subtrees minus union of
/// exception subtrees.
using ImpliedSet = std::set<NodeId>;

enum class TaxonomyKind { Purpose, Category };

/// Rooted tree of purpose or data-category identifiers.
///
/// Immutable after build; per-node descendant closures are precomputed, so
/// any number of concurrent readers can share one instance.
class Taxonomy {
 public:
  /// Builds a tree from (parent, child) edges. Child order is insertion
  /// order. Throws DuplicateNode, CycleDetected or OrphanNode when the edge
  /// list is not a tree rooted at `root`.
  static Taxonomy build(TaxonomyKind kind, NodeId root,
                        const std::vector<std::pair<NodeId, NodeId>>& edges);

  TaxonomyKind kind() const { return kind_; }
  const NodeId& root() const { return root_; }
  std::size_t size() const { return order_.size(); }
  bool contains(const NodeId& n) const { return closure_.count(n) != 0; }

  /// Nodes in insertion order (root first).
  const std::vector<NodeId>& nodes() const { return order_; }
  const std::vector<NodeId>& children(const NodeId& n) const;

  /// {n} plus all transitive descendants of n.
  const ImpliedSet& descendants_closure(const NodeId& n) const;

  /// Union of the closures of `allowed` minus the union of the closures of
  /// `exceptions`. Exceptions outside every allowed subtree subtract nothing.
  ImpliedSet implied_set(const std::set<NodeId>& allowed,
                         const std::set<NodeId>& exceptions) const;

  /// Edge list in insertion order, for serialization.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

 private:
  Taxonomy() = default;

  TaxonomyKind kind_{TaxonomyKind::Purpose};
  NodeId root_;
  std::vector<NodeId> order_;
  std::map<NodeId, std::vector<NodeId>> children_;
  std::map<NodeId, NodeId> parent_;
  std::map<NodeId, ImpliedSet> closure_;
};

}  // namespace peasflow

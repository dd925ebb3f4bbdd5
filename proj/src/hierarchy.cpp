#include "peasflow/hierarchy.hpp"

#include <algorithm>

namespace peasflow {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::OrphanNode: return "OrphanNode";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyCategory: return "EmptyCategory";
    case ErrorCode::MissingAttribute: return "MissingAttribute";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownReference: return "UnknownReference";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

Taxonomy Taxonomy::build(TaxonomyKind kind, NodeId root,
                         const std::vector<std::pair<NodeId, NodeId>>& edges) {
  if (root.empty())
    throw PeasError(ErrorCode::InvalidArgument, "taxonomy root id is empty");

  Taxonomy t;
  t.kind_ = kind;
  t.root_ = root;
  t.order_.push_back(root);
  t.children_[root];

  auto is_ancestor_or_self = [&t](const NodeId& a, const NodeId& b) {
    // walks b's parent chain; tree so the walk terminates at the root
    NodeId cur = b;
    while (true) {
      if (cur == a) return true;
      auto it = t.parent_.find(cur);
      if (it == t.parent_.end()) return false;
      cur = it->second;
    }
  };

  for (const auto& [parent, child] : edges) {
    if (parent.empty() || child.empty())
      throw PeasError(ErrorCode::InvalidArgument, "empty node id in edge list");
    if (!t.children_.count(parent))
      throw PeasError(ErrorCode::OrphanNode,
                      "edge (" + parent + ", " + child + "): parent undeclared");
    if (t.children_.count(child)) {
      if (is_ancestor_or_self(child, parent))
        throw PeasError(ErrorCode::CycleDetected,
                        "edge (" + parent + ", " + child + ") closes a cycle");
      throw PeasError(ErrorCode::DuplicateNode,
                      "node " + child + " already has a parent");
    }
    t.children_[parent].push_back(child);
    t.children_[child];
    t.parent_[child] = parent;
    t.order_.push_back(child);
  }

  // closures bottom-up: children are appended after parents in order_, so a
  // reverse pass sees every child's closure before its parent's
  for (auto it = t.order_.rbegin(); it != t.order_.rend(); ++it) {
    ImpliedSet c{*it};
    for (const auto& ch : t.children_[*it]) {
      const ImpliedSet& sub = t.closure_[ch];
      c.insert(sub.begin(), sub.end());
    }
    t.closure_[*it] = std::move(c);
  }
  return t;
}

const std::vector<NodeId>& Taxonomy::children(const NodeId& n) const {
  auto it = children_.find(n);
  if (it == children_.end())
    throw PeasError(ErrorCode::UnknownNode, "node " + n + " not in taxonomy");
  return it->second;
}

const ImpliedSet& Taxonomy::descendants_closure(const NodeId& n) const {
  auto it = closure_.find(n);
  if (it == closure_.end())
    throw PeasError(ErrorCode::UnknownNode, "node " + n + " not in taxonomy");
  return it->second;
}

ImpliedSet Taxonomy::implied_set(const std::set<NodeId>& allowed,
                                 const std::set<NodeId>& exceptions) const {
  ImpliedSet result;
  for (const auto& a : allowed) {
    const ImpliedSet& c = descendants_closure(a);
    result.insert(c.begin(), c.end());
  }
  for (const auto& e : exceptions) {
    const ImpliedSet& c = descendants_closure(e);
    for (const auto& n : c) result.erase(n);
  }
  return result;
}

std::vector<std::pair<NodeId, NodeId>> Taxonomy::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const auto& n : order_) {
    if (n == root_) continue;
    out.emplace_back(parent_.at(n), n);
  }
  return out;
}

}  // namespace peasflow

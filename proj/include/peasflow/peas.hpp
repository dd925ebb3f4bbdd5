#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "peasflow/operators.hpp"
#include "peasflow/preferences.hpp"
#include "peasflow/value.hpp"

namespace peasflow {

/// One operator application in an attribute's lineage: the categories the
/// operator read (ac) and the attribute's categories afterwards (rc).
struct HistoryEntry {
  std::set<NodeId> ac;
  std::set<NodeId> rc;

  bool operator==(const HistoryEntry&) const = default;
};

/// Stream attribute with its privacy meta-data: owner preference, current
/// category set and operation history. The history is append-only; absent
/// pp means the value is unrestricted.
struct PeasAttribute {
  std::string name;
  Value value;
  std::shared_ptr<const PrivacyPreference> pp;
  std::set<NodeId> category;
  std::vector<HistoryEntry> history;
};

bool same_metadata(const PeasAttribute& a, const PeasAttribute& b);

/// Stream element: logical timestamp plus attributes with unique names.
struct Tuple {
  std::int64_t timestamp{0};
  std::vector<PeasAttribute> attributes;

  const PeasAttribute* find(const std::string& name) const;
  const PeasAttribute& at(const std::string& name) const;
};

/// Inference rule mapping (operator, function, inputs) to the category of
/// the derived data. Keys match either the multiset of referenced attribute
/// names or the multiset of their categories.
struct DerivationPath {
  enum class KeyKind { AttributeNames, Categories };

  KeyKind key_kind{KeyKind::AttributeNames};
  std::multiset<std::string> keys;
  std::string fn;
  OperatorKind op{OperatorKind::Projection};
  NodeId result_category;
};

/// Ordered rule list; lookup is first-match in declaration order with
/// attribute-name rules checked before category rules.
class DerivationPathRegistry {
 public:
  void add(DerivationPath rule) { rules_.push_back(std::move(rule)); }
  const std::vector<DerivationPath>& rules() const { return rules_; }

  /// Category of data derived by (op, fn) over the referenced attributes.
  /// `input_names` is the multiset of attribute names, `input_categories`
  /// the flattened multiset of their categories. When no rule matches,
  /// falls back to the union of the input categories.
  std::set<NodeId> derive(OperatorKind op, const std::string& fn,
                          const std::multiset<std::string>& input_names,
                          const std::multiset<NodeId>& input_categories) const;

 private:
  std::vector<DerivationPath> rules_;
};

/// Sensing-side initialization: empty history, owner preference and initial
/// category. Throws EmptyCategory when `category` is empty.
PeasAttribute init_peas(std::string name, Value value,
                        std::shared_ptr<const PrivacyPreference> owner_pp,
                        std::set<NodeId> category);

/// ac = union of the accessed category sets (duplicates collapse), rc as
/// given. `accessed` must be nonempty.
HistoryEntry create_history_entry(const std::vector<std::set<NodeId>>& accessed,
                                  std::set<NodeId> result);

/// Applies `fn` to scalar values (projection parameters). Known functions:
/// identity, add, sub, mul, div, min, max, avg, f.
Value apply_scalar_fn(const std::string& fn, const std::vector<Value>& args);

bool is_known_scalar_fn(const std::string& fn);

/// Identity-keyed cache for composed preferences. Operators see the same few
/// preference objects on every tuple, so each distinct input combination is
/// composed once per operator instance. Single-threaded use.
class ComposeCache {
 public:
  using Key = std::pair<std::vector<const PrivacyPreference*>, std::string>;

  std::shared_ptr<const PrivacyPreference>* find(const Key& key);
  void put(Key key, std::vector<std::shared_ptr<const PrivacyPreference>> pins,
           std::shared_ptr<const PrivacyPreference> composed);

 private:
  struct Entry {
    std::vector<std::shared_ptr<const PrivacyPreference>> pins;
    std::shared_ptr<const PrivacyPreference> composed;
  };
  std::map<Key, Entry> cache_;
};

/// Meta-data propagation for projection, aggregation and join. s2 must be
/// present exactly when op is a Join. Inputs are never mutated.
///
/// Projection/Aggregation emit one fresh attribute per parameter (value,
/// derived category, composed preference, merged history plus one new
/// entry). Join recomputes pp and appends one history entry on the two join
/// attributes and passes every other attribute through unchanged.
Tuple peas_derive(const OperatorSpec& op, const Tuple& s1,
                  const std::optional<Tuple>& s2,
                  const DerivationPathRegistry& reg,
                  const Taxonomy& purpose_tax, const Taxonomy& category_tax,
                  ComposeCache* cache = nullptr);

/// Composes the preferences that are present; nullptr when none are.
std::shared_ptr<const PrivacyPreference> compose_present(
    const std::vector<std::shared_ptr<const PrivacyPreference>>& pps,
    const std::string& result_attribute, const Taxonomy& purpose_tax,
    const Taxonomy& category_tax, ComposeCache* cache = nullptr);

/// Concatenates histories in declaration order, dropping structurally equal
/// repeats (first occurrence wins).
std::vector<HistoryEntry> merge_histories(
    const std::vector<const std::vector<HistoryEntry>*>& inputs);

/// Join output layout: non-join attributes of s1 then s2 pass through, the
/// two (already updated) join attributes go last. Duplicate names get a
/// "_2" suffix so tuple attribute names stay unique.
Tuple assemble_join_output(const Tuple& s1, const Tuple& s2,
                           const std::string& a1_name,
                           const std::string& a2_name, PeasAttribute j1,
                           PeasAttribute j2);

}  // namespace peasflow

#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "peasflow/hierarchy.hpp"

namespace peasflow {

/// Allowed purposes plus the subtrees explicitly excepted from them.
struct IntendedPurpose {
  std::set<NodeId> aip;
  std::set<NodeId> exc;

  bool operator==(const IntendedPurpose&) const = default;
  bool empty() const { return aip.empty() && exc.empty(); }
};

/// Which data categories may be jointly accessed with an attribute, and for
/// which purposes.
struct JointAccessConstraint {
  std::set<NodeId> adc;
  std::set<NodeId> exc;
  IntendedPurpose ip;

  bool operator==(const JointAccessConstraint&) const = default;
  bool empty() const { return adc.empty() && exc.empty() && ip.empty(); }
};

/// Data-owner privacy preference for one stream attribute.
///
/// `consumer` may be empty, meaning nobody is authorized. The jac and cdc
/// components may be empty sets; enforcement reads them literally (an empty
/// cdc prohibits nothing, an empty jac.ip admits no access purpose).
struct PrivacyPreference {
  std::string attribute;
  std::set<std::string> consumer;
  IntendedPurpose ip;
  JointAccessConstraint jac;
  std::set<NodeId> cdc;

  bool operator==(const PrivacyPreference&) const = default;
};

/// Closure-expanded view of a preference. The implied fields drive every
/// membership test in enforcement; the raw exception fields are retained so
/// re-composition stays exact.
struct NormalizedPreference {
  std::set<std::string> consumer;
  ImpliedSet ip_implied;
  ImpliedSet jac_cat_implied;
  ImpliedSet jac_ip_implied;
  ImpliedSet cdc_implied;
  std::set<NodeId> ip_exc;
  std::set<NodeId> jac_exc;
  std::set<NodeId> jac_ip_exc;
  std::set<NodeId> cdc_raw;

  bool operator==(const NormalizedPreference&) const = default;
};

/// Expands every component of `pp` into its implied set over the given
/// taxonomies. Throws UnknownNode when an id does not resolve.
NormalizedPreference normalize(const PrivacyPreference& pp,
                               const Taxonomy& purpose_tax,
                               const Taxonomy& category_tax);

/// Most-conservative merge: consumer and allowed sets are intersected at the
/// implied-set level, exceptions and cdc are unioned. The result stores its
/// allowed sets in expanded form; `attribute` is left empty for the caller
/// to assign.
PrivacyPreference compose(const std::vector<PrivacyPreference>& pps,
                          const Taxonomy& purpose_tax,
                          const Taxonomy& category_tax);

/// Identity-keyed normalize cache. Streams carry the same few immutable
/// preference objects in every tuple, so one normalization per object
/// serves the whole run. Single-threaded use (one per operator instance).
class NormalizeCache {
 public:
  NormalizeCache(const Taxonomy& purpose_tax, const Taxonomy& category_tax)
      : purpose_tax_(purpose_tax), category_tax_(category_tax) {}

  const NormalizedPreference& get(
      const std::shared_ptr<const PrivacyPreference>& pp);

 private:
  struct Entry {
    std::shared_ptr<const PrivacyPreference> pin;  // keeps the key address alive
    NormalizedPreference normalized;
  };
  const Taxonomy& purpose_tax_;
  const Taxonomy& category_tax_;
  std::map<const PrivacyPreference*, Entry> cache_;
};

}  // namespace peasflow

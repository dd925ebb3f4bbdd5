#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "peasflow/peas.hpp"

namespace peasflow {

/// Consumer identity and declared access purpose.
struct ConsumerPolicy {
  std::string consumer_id;
  NodeId access_purpose;

  bool operator==(const ConsumerPolicy&) const = default;
};

enum class CheckKind { Consumer, Ip, JacIp, JacData, Cdc };

const char* check_kind_name(CheckKind k);

/// Per-attribute outcome; passed iff no check failed.
struct ComplianceVerdict {
  std::string attribute;
  bool passed{true};
  std::set<CheckKind> failed;
};

struct ComplianceFlags {
  /// When set, an attribute with an empty history is exempt from the
  /// jac intended-purpose requirement. Off by default: raw data under a
  /// restrictive jac.ip is dropped for a non-matching access purpose.
  bool jac_ip_vacuous_on_empty_history = false;
};

/// Attributes without a preference pass every check (public data).

bool check_consumer(const PeasAttribute& a, const ConsumerPolicy& policy);

bool check_ip(const PeasAttribute& a, const ConsumerPolicy& policy,
              const Taxonomy& purpose_tax);

/// Joint-access compliance: the access purpose lies in jac's implied
/// purposes and every accessed category in the history lies in jac's
/// implied categories.
bool check_jac(const PeasAttribute& a, const ConsumerPolicy& policy,
               const Taxonomy& purpose_tax, const Taxonomy& category_tax,
               const ComplianceFlags& flags = {});

/// No history entry produced a category implied by cdc.
bool check_cdc(const PeasAttribute& a, const Taxonomy& category_tax);

// The two halves of check_jac, split for verdict reporting.
bool check_jac_ip(const PeasAttribute& a, const ConsumerPolicy& policy,
                  const Taxonomy& purpose_tax, const ComplianceFlags& flags);
bool check_jac_data(const PeasAttribute& a, const Taxonomy& category_tax);

/// Filters a tuple down to the attributes for which all checks hold.
/// Surviving attributes are byte-identical to their input form; verdicts
/// cover every input attribute in order. A NormalizeCache makes repeated
/// checks of the same preference objects cheap.
std::pair<Tuple, std::vector<ComplianceVerdict>> compliance_check(
    const Tuple& t, const ConsumerPolicy& policy, const Taxonomy& purpose_tax,
    const Taxonomy& category_tax, const ComplianceFlags& flags = {},
    NormalizeCache* cache = nullptr);

}  // namespace peasflow

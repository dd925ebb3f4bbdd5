#include "peasflow/compliance.hpp"

namespace peasflow {

const char* check_kind_name(CheckKind k) {
  switch (k) {
    case CheckKind::Consumer: return "consumer";
    case CheckKind::Ip: return "ip";
    case CheckKind::JacIp: return "jacIp";
    case CheckKind::JacData: return "jacData";
    case CheckKind::Cdc: return "cdc";
  }
  return "?";
}

bool check_consumer(const PeasAttribute& a, const ConsumerPolicy& policy) {
  if (!a.pp) return true;
  return a.pp->consumer.count(policy.consumer_id) != 0;
}

bool check_ip(const PeasAttribute& a, const ConsumerPolicy& policy,
              const Taxonomy& purpose_tax) {
  if (!a.pp) return true;
  ImpliedSet implied = purpose_tax.implied_set(a.pp->ip.aip, a.pp->ip.exc);
  return implied.count(policy.access_purpose) != 0;
}

bool check_jac_ip(const PeasAttribute& a, const ConsumerPolicy& policy,
                  const Taxonomy& purpose_tax, const ComplianceFlags& flags) {
  if (!a.pp) return true;
  if (flags.jac_ip_vacuous_on_empty_history && a.history.empty()) return true;
  ImpliedSet implied =
      purpose_tax.implied_set(a.pp->jac.ip.aip, a.pp->jac.ip.exc);
  return implied.count(policy.access_purpose) != 0;
}

bool check_jac_data(const PeasAttribute& a, const Taxonomy& category_tax) {
  if (!a.pp) return true;
  ImpliedSet implied = category_tax.implied_set(a.pp->jac.adc, a.pp->jac.exc);
  for (const auto& he : a.history)
    for (const auto& c : he.ac)
      if (!implied.count(c)) return false;
  return true;
}

bool check_jac(const PeasAttribute& a, const ConsumerPolicy& policy,
               const Taxonomy& purpose_tax, const Taxonomy& category_tax,
               const ComplianceFlags& flags) {
  return check_jac_ip(a, policy, purpose_tax, flags) &&
         check_jac_data(a, category_tax);
}

bool check_cdc(const PeasAttribute& a, const Taxonomy& category_tax) {
  if (!a.pp) return true;
  ImpliedSet implied = category_tax.implied_set(a.pp->cdc, {});
  for (const auto& he : a.history)
    for (const auto& c : he.rc)
      if (implied.count(c)) return false;
  return true;
}

namespace {

ComplianceVerdict verdict_against(const PeasAttribute& a,
                                  const NormalizedPreference& n,
                                  const ConsumerPolicy& policy,
                                  const ComplianceFlags& flags) {
  ComplianceVerdict v;
  v.attribute = a.name;
  if (!n.consumer.count(policy.consumer_id)) v.failed.insert(CheckKind::Consumer);
  if (!n.ip_implied.count(policy.access_purpose)) v.failed.insert(CheckKind::Ip);

  const bool jac_ip_vacuous =
      flags.jac_ip_vacuous_on_empty_history && a.history.empty();
  if (!jac_ip_vacuous && !n.jac_ip_implied.count(policy.access_purpose))
    v.failed.insert(CheckKind::JacIp);

  for (const auto& he : a.history) {
    for (const auto& c : he.ac) {
      if (!n.jac_cat_implied.count(c)) {
        v.failed.insert(CheckKind::JacData);
        goto jac_done;
      }
    }
  }
jac_done:
  for (const auto& he : a.history) {
    for (const auto& c : he.rc) {
      if (n.cdc_implied.count(c)) {
        v.failed.insert(CheckKind::Cdc);
        goto cdc_done;
      }
    }
  }
cdc_done:
  v.passed = v.failed.empty();
  return v;
}

}  // namespace

std::pair<Tuple, std::vector<ComplianceVerdict>> compliance_check(
    const Tuple& t, const ConsumerPolicy& policy, const Taxonomy& purpose_tax,
    const Taxonomy& category_tax, const ComplianceFlags& flags,
    NormalizeCache* cache) {
  Tuple out;
  out.timestamp = t.timestamp;
  std::vector<ComplianceVerdict> verdicts;
  verdicts.reserve(t.attributes.size());

  for (const PeasAttribute& a : t.attributes) {
    ComplianceVerdict v;
    if (!a.pp) {
      v.attribute = a.name;
      v.passed = true;
    } else if (cache) {
      v = verdict_against(a, cache->get(a.pp), policy, flags);
    } else {
      v = verdict_against(a, normalize(*a.pp, purpose_tax, category_tax),
                          policy, flags);
    }
    if (v.passed) out.attributes.push_back(a);
    verdicts.push_back(std::move(v));
  }
  return {std::move(out), std::move(verdicts)};
}

}  // namespace peasflow

#include "peasflow/preferences.hpp"

#include <algorithm>
#include <iterator>

namespace peasflow {

namespace {

template <typename T>
std::set<T> intersect(const std::set<T>& a, const std::set<T>& b) {
  std::set<T> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.begin()));
  return out;
}

template <typename T>
void union_into(std::set<T>& into, const std::set<T>& from) {
  into.insert(from.begin(), from.end());
}

}  // namespace

NormalizedPreference normalize(const PrivacyPreference& pp,
                               const Taxonomy& purpose_tax,
                               const Taxonomy& category_tax) {
  NormalizedPreference n;
  n.consumer = pp.consumer;
  n.ip_implied = purpose_tax.implied_set(pp.ip.aip, pp.ip.exc);
  n.jac_cat_implied = category_tax.implied_set(pp.jac.adc, pp.jac.exc);
  n.jac_ip_implied = purpose_tax.implied_set(pp.jac.ip.aip, pp.jac.ip.exc);
  n.cdc_implied = category_tax.implied_set(pp.cdc, {});
  n.ip_exc = pp.ip.exc;
  n.jac_exc = pp.jac.exc;
  n.jac_ip_exc = pp.jac.ip.exc;
  n.cdc_raw = pp.cdc;
  return n;
}

PrivacyPreference compose(const std::vector<PrivacyPreference>& pps,
                          const Taxonomy& purpose_tax,
                          const Taxonomy& category_tax) {
  if (pps.empty())
    throw PeasError(ErrorCode::EmptyInput, "compose of zero preferences");

  NormalizedPreference acc = normalize(pps.front(), purpose_tax, category_tax);
  PrivacyPreference out;
  out.consumer = acc.consumer;
  out.ip = {acc.ip_implied, acc.ip_exc};
  out.jac.adc = acc.jac_cat_implied;
  out.jac.exc = acc.jac_exc;
  out.jac.ip = {acc.jac_ip_implied, acc.jac_ip_exc};
  out.cdc = acc.cdc_raw;

  for (std::size_t i = 1; i < pps.size(); ++i) {
    NormalizedPreference n = normalize(pps[i], purpose_tax, category_tax);
    out.consumer = intersect(out.consumer, n.consumer);
    out.ip.aip = intersect(out.ip.aip, n.ip_implied);
    union_into(out.ip.exc, n.ip_exc);
    out.jac.adc = intersect(out.jac.adc, n.jac_cat_implied);
    union_into(out.jac.exc, n.jac_exc);
    out.jac.ip.aip = intersect(out.jac.ip.aip, n.jac_ip_implied);
    union_into(out.jac.ip.exc, n.jac_ip_exc);
    union_into(out.cdc, n.cdc_raw);
  }
  return out;
}

const NormalizedPreference& NormalizeCache::get(
    const std::shared_ptr<const PrivacyPreference>& pp) {
  auto it = cache_.find(pp.get());
  if (it == cache_.end())
    it = cache_
             .emplace(pp.get(),
                      Entry{pp, normalize(*pp, purpose_tax_, category_tax_)})
             .first;
  return it->second.normalized;
}

}  // namespace peasflow

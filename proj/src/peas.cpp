#include "peasflow/peas.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

namespace peasflow {

const char* operator_kind_name(OperatorKind k) {
  switch (k) {
    case OperatorKind::Selection: return "selection";
    case OperatorKind::Projection: return "projection";
    case OperatorKind::Aggregation: return "aggregation";
    case OperatorKind::Join: return "join";
  }
  return "?";
}

std::string Value::to_string() const {
  if (is_string()) return as_string();
  std::ostringstream os;
  if (is_integer())
    os << as_integer();
  else
    os << as_double();
  return os.str();
}

bool same_metadata(const PeasAttribute& a, const PeasAttribute& b) {
  bool pp_equal = (!a.pp && !b.pp) || (a.pp && b.pp && *a.pp == *b.pp);
  return pp_equal && a.category == b.category && a.history == b.history;
}

const PeasAttribute* Tuple::find(const std::string& name) const {
  for (const auto& a : attributes)
    if (a.name == name) return &a;
  return nullptr;
}

const PeasAttribute& Tuple::at(const std::string& name) const {
  const PeasAttribute* a = find(name);
  if (!a)
    throw PeasError(ErrorCode::MissingAttribute,
                    "attribute " + name + " not in tuple");
  return *a;
}

std::set<NodeId> DerivationPathRegistry::derive(
    OperatorKind op, const std::string& fn,
    const std::multiset<std::string>& input_names,
    const std::multiset<NodeId>& input_categories) const {
  for (auto kind : {DerivationPath::KeyKind::AttributeNames,
                    DerivationPath::KeyKind::Categories}) {
    const auto& wanted =
        kind == DerivationPath::KeyKind::AttributeNames ? input_names
                                                        : input_categories;
    for (const auto& rule : rules_) {
      if (rule.key_kind == kind && rule.op == op && rule.fn == fn &&
          rule.keys == wanted)
        return {rule.result_category};
    }
  }
  // conservative fallback: no rule, the derived data inherits everything
  return {input_categories.begin(), input_categories.end()};
}

PeasAttribute init_peas(std::string name, Value value,
                        std::shared_ptr<const PrivacyPreference> owner_pp,
                        std::set<NodeId> category) {
  if (category.empty())
    throw PeasError(ErrorCode::EmptyCategory,
                    "attribute " + name + " initialized with no category");
  PeasAttribute a;
  a.name = std::move(name);
  a.value = std::move(value);
  a.pp = std::move(owner_pp);
  a.category = std::move(category);
  return a;
}

HistoryEntry create_history_entry(const std::vector<std::set<NodeId>>& accessed,
                                  std::set<NodeId> result) {
  if (accessed.empty())
    throw PeasError(ErrorCode::EmptyInput, "history entry with no accessed sets");
  HistoryEntry he;
  for (const auto& s : accessed) he.ac.insert(s.begin(), s.end());
  he.rc = std::move(result);
  return he;
}

namespace {

double fold_numeric(const std::string& fn, const std::vector<Value>& args) {
  std::vector<double> xs;
  xs.reserve(args.size());
  for (const auto& v : args) xs.push_back(v.as_double());
  if (fn == "add") return std::accumulate(xs.begin() + 1, xs.end(), xs.front());
  if (fn == "mul")
    return std::accumulate(xs.begin() + 1, xs.end(), xs.front(),
                           std::multiplies<>());
  if (fn == "sub")
    return std::accumulate(xs.begin() + 1, xs.end(), xs.front(),
                           std::minus<>());
  if (fn == "div")
    return std::accumulate(xs.begin() + 1, xs.end(), xs.front(),
                           std::divides<>());
  if (fn == "min") return *std::min_element(xs.begin(), xs.end());
  if (fn == "max") return *std::max_element(xs.begin(), xs.end());
  // avg and f (the generic fusion placeholder) are both the mean
  return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

}  // namespace

bool is_known_scalar_fn(const std::string& fn) {
  static const std::set<std::string> known{"identity", "add", "sub", "mul",
                                           "div",      "min", "max", "avg",
                                           "count",    "f"};
  return known.count(fn) != 0;
}

Value apply_scalar_fn(const std::string& fn, const std::vector<Value>& args) {
  if (args.empty())
    throw PeasError(ErrorCode::ArityError, "function " + fn + " with no inputs");
  if (fn == "identity") {
    if (args.size() != 1)
      throw PeasError(ErrorCode::ArityError, "identity takes one input");
    return args.front();
  }
  if (fn == "count") return Value(static_cast<std::int64_t>(args.size()));
  if (!is_known_scalar_fn(fn))
    throw PeasError(ErrorCode::InvalidArgument, "unknown function " + fn);
  return Value(fold_numeric(fn, args));
}

std::shared_ptr<const PrivacyPreference>* ComposeCache::find(const Key& key) {
  auto it = cache_.find(key);
  return it == cache_.end() ? nullptr : &it->second.composed;
}

void ComposeCache::put(
    Key key, std::vector<std::shared_ptr<const PrivacyPreference>> pins,
    std::shared_ptr<const PrivacyPreference> composed) {
  cache_.emplace(std::move(key),
                 Entry{std::move(pins), std::move(composed)});
}

std::shared_ptr<const PrivacyPreference> compose_present(
    const std::vector<std::shared_ptr<const PrivacyPreference>>& pps,
    const std::string& result_attribute, const Taxonomy& purpose_tax,
    const Taxonomy& category_tax, ComposeCache* cache) {
  std::vector<std::shared_ptr<const PrivacyPreference>> present;
  for (const auto& p : pps)
    if (p) present.push_back(p);
  if (present.empty()) return nullptr;

  ComposeCache::Key key;
  if (cache) {
    key.first.reserve(present.size());
    for (const auto& p : present) key.first.push_back(p.get());
    key.second = result_attribute;
    if (auto* hit = cache->find(key)) return *hit;
  }

  std::vector<PrivacyPreference> inputs;
  inputs.reserve(present.size());
  for (const auto& p : present) inputs.push_back(*p);
  PrivacyPreference composed = compose(inputs, purpose_tax, category_tax);
  composed.attribute = result_attribute;
  auto result = std::make_shared<const PrivacyPreference>(std::move(composed));
  if (cache) cache->put(std::move(key), std::move(present), result);
  return result;
}

std::vector<HistoryEntry> merge_histories(
    const std::vector<const std::vector<HistoryEntry>*>& inputs) {
  std::vector<HistoryEntry> merged;
  for (const auto* h : inputs) {
    for (const auto& he : *h) {
      if (std::find(merged.begin(), merged.end(), he) == merged.end())
        merged.push_back(he);
    }
  }
  return merged;
}

namespace {

struct RefInfo {
  std::vector<const PeasAttribute*> attrs;
  std::multiset<std::string> names;
  std::multiset<NodeId> categories;
  std::vector<std::set<NodeId>> category_sets;
};

RefInfo collect_refs(const Tuple& t, const std::vector<std::string>& names) {
  RefInfo info;
  for (const auto& n : names) {
    const PeasAttribute& a = t.at(n);
    info.attrs.push_back(&a);
    info.names.insert(a.name);
    info.categories.insert(a.category.begin(), a.category.end());
    info.category_sets.push_back(a.category);
  }
  return info;
}

PeasAttribute derive_parameter(const ProjectionParam& pa, OperatorKind kind,
                               const Tuple& s1,
                               const DerivationPathRegistry& reg,
                               const Taxonomy& purpose_tax,
                               const Taxonomy& category_tax,
                               ComposeCache* cache) {
  RefInfo refs = collect_refs(s1, pa.attributes);

  std::vector<Value> args;
  for (const auto* a : refs.attrs) args.push_back(a->value);

  PeasAttribute out;
  out.name = pa.name;
  out.value = apply_scalar_fn(pa.fn, args);
  out.category = reg.derive(kind, pa.fn, refs.names, refs.categories);

  std::vector<std::shared_ptr<const PrivacyPreference>> pps;
  std::vector<const std::vector<HistoryEntry>*> histories;
  for (const auto* a : refs.attrs) {
    pps.push_back(a->pp);
    histories.push_back(&a->history);
  }
  out.pp = compose_present(pps, pa.name, purpose_tax, category_tax, cache);
  out.history = merge_histories(histories);
  out.history.push_back(create_history_entry(refs.category_sets, out.category));
  return out;
}

}  // namespace

Tuple assemble_join_output(const Tuple& s1, const Tuple& s2,
                           const std::string& a1_name,
                           const std::string& a2_name, PeasAttribute j1,
                           PeasAttribute j2) {
  Tuple out;
  out.timestamp = std::max(s1.timestamp, s2.timestamp);
  for (const auto& a : s1.attributes)
    if (a.name != a1_name) out.attributes.push_back(a);
  for (const auto& a : s2.attributes)
    if (a.name != a2_name) out.attributes.push_back(a);
  out.attributes.push_back(std::move(j1));
  out.attributes.push_back(std::move(j2));

  // tuple attribute names must stay unique; suffix later duplicates
  for (std::size_t i = 0; i < out.attributes.size(); ++i) {
    for (std::size_t j = i + 1; j < out.attributes.size(); ++j) {
      if (out.attributes[j].name == out.attributes[i].name)
        out.attributes[j].name += "_2";
    }
  }
  return out;
}

Tuple peas_derive(const OperatorSpec& op, const Tuple& s1,
                  const std::optional<Tuple>& s2,
                  const DerivationPathRegistry& reg,
                  const Taxonomy& purpose_tax, const Taxonomy& category_tax,
                  ComposeCache* cache) {
  Tuple out;
  out.timestamp = s1.timestamp;

  if (op.kind == OperatorKind::Projection ||
      op.kind == OperatorKind::Aggregation) {
    if (s2.has_value())
      throw PeasError(ErrorCode::InvalidArgument,
                      "second tuple given to a non-join operator");
    if (op.kind == OperatorKind::Aggregation && op.parameters.size() != 1)
      throw PeasError(ErrorCode::ArityError,
                      "aggregation requires exactly one parameter");
    if (op.parameters.empty())
      throw PeasError(ErrorCode::ArityError, "operator with no parameters");
    for (const auto& pa : op.parameters)
      out.attributes.push_back(derive_parameter(pa, op.kind, s1, reg,
                                                purpose_tax, category_tax,
                                                cache));
    return out;
  }

  if (op.kind != OperatorKind::Join)
    throw PeasError(ErrorCode::InvalidArgument,
                    "peas_derive handles projection, aggregation and join");
  if (!op.join || !s2.has_value())
    throw PeasError(ErrorCode::ArityError, "join requires two input tuples");

  const PeasAttribute& a1 = s1.at(op.join->left_attribute);
  const PeasAttribute& a2 = s2->at(op.join->right_attribute);

  PeasAttribute j1 = a1;
  PeasAttribute j2 = a2;
  auto composed = compose_present({a1.pp, a2.pp}, a1.name, purpose_tax,
                                  category_tax, cache);
  j1.pp = composed;
  if (composed) {
    auto p2 = compose_present({a1.pp, a2.pp}, a2.name, purpose_tax,
                              category_tax, cache);
    j2.pp = std::move(p2);
  } else {
    j2.pp = nullptr;
  }
  j1.history.push_back(
      create_history_entry({a1.category, a2.category}, a1.category));
  j2.history.push_back(
      create_history_entry({a1.category, a2.category}, a2.category));

  return assemble_join_output(s1, *s2, a1.name, a2.name, std::move(j1),
                              std::move(j2));
}

}  // namespace peasflow

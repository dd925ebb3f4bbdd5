#include "peasflow/engine.hpp"

#include <algorithm>
#include <numeric>

namespace peasflow {

std::vector<Tuple> Window::push(Tuple t, std::optional<std::int64_t> now) {
  if (t.timestamp < last_ts_)
    throw PeasError(ErrorCode::NonMonotoneTimestamp,
                    "tuple timestamp " + std::to_string(t.timestamp) +
                        " precedes " + std::to_string(last_ts_));
  last_ts_ = t.timestamp;
  const std::int64_t clock = now.value_or(t.timestamp);
  buf_.push_back(std::move(t));

  std::vector<Tuple> evicted;
  if (spec_.mode == WindowMode::Time) {
    while (!buf_.empty() && buf_.front().timestamp <= clock - spec_.size) {
      evicted.push_back(std::move(buf_.front()));
      buf_.pop_front();
    }
  } else {
    while (buf_.size() > static_cast<std::size_t>(spec_.size)) {
      evicted.push_back(std::move(buf_.front()));
      buf_.pop_front();
    }
  }
  return evicted;
}

std::vector<Tuple> Window::evict(std::int64_t now) {
  std::vector<Tuple> evicted;
  if (spec_.mode != WindowMode::Time) return evicted;
  while (!buf_.empty() && buf_.front().timestamp <= now - spec_.size) {
    evicted.push_back(std::move(buf_.front()));
    buf_.pop_front();
  }
  return evicted;
}

std::optional<Tuple> apply_selection(const SelectionPredicate& pred,
                                     const Tuple& t) {
  const PeasAttribute& a = t.at(pred.attribute);
  const int c = a.value.compare(pred.constant);
  bool holds = false;
  switch (pred.cmp) {
    case Comparator::Lt: holds = c < 0; break;
    case Comparator::Le: holds = c <= 0; break;
    case Comparator::Gt: holds = c > 0; break;
    case Comparator::Ge: holds = c >= 0; break;
    case Comparator::Eq: holds = c == 0; break;
    case Comparator::Ne: holds = c != 0; break;
  }
  if (!holds) return std::nullopt;
  return t;
}

Tuple apply_projection(const OperatorSpec& op, const Tuple& t,
                       const DerivationPathRegistry& reg,
                       const Taxonomy& purpose_tax,
                       const Taxonomy& category_tax, ComposeCache* cache) {
  if (op.kind != OperatorKind::Projection)
    throw PeasError(ErrorCode::InvalidArgument, "operator is not a projection");
  return peas_derive(op, t, std::nullopt, reg, purpose_tax, category_tax, cache);
}

namespace {

double aggregate_fold(const std::string& fn, const std::vector<double>& xs) {
  if (fn == "count") return static_cast<double>(xs.size());
  if (fn == "sum") return std::accumulate(xs.begin(), xs.end(), 0.0);
  if (fn == "min") return *std::min_element(xs.begin(), xs.end());
  if (fn == "max") return *std::max_element(xs.begin(), xs.end());
  if (fn == "avg")
    return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  throw PeasError(ErrorCode::InvalidArgument, "unknown aggregate " + fn);
}

}  // namespace

std::optional<Tuple> apply_aggregation(const OperatorSpec& op, const Window& w,
                                       std::int64_t emit_ts,
                                       const DerivationPathRegistry& reg,
                                       const Taxonomy& purpose_tax,
                                       const Taxonomy& category_tax,
                                       ComposeCache* cache) {
  if (op.kind != OperatorKind::Aggregation)
    throw PeasError(ErrorCode::InvalidArgument, "operator is not an aggregation");
  if (op.parameters.size() != 1)
    throw PeasError(ErrorCode::ArityError,
                    "aggregation requires exactly one parameter");
  if (w.empty()) return std::nullopt;

  const ProjectionParam& pa = op.parameters.front();
  if (pa.attributes.size() != 1)
    throw PeasError(ErrorCode::ArityError,
                    "aggregation parameter references one attribute");
  const std::string& ref = pa.attributes.front();

  std::vector<double> values;
  std::set<NodeId> lineage_category;
  std::vector<const PrivacyPreference*> distinct_raw;
  std::vector<std::shared_ptr<const PrivacyPreference>> distinct_pps;
  std::vector<const std::vector<HistoryEntry>*> histories;
  for (const Tuple& t : w.tuples()) {
    const PeasAttribute& a = t.at(ref);
    values.push_back(a.value.as_double());
    lineage_category.insert(a.category.begin(), a.category.end());
    histories.push_back(&a.history);
    if (a.pp) {
      // identity first, structural equality as the slow path
      bool seen = false;
      for (const auto* p : distinct_raw)
        if (p == a.pp.get() || *p == *a.pp) { seen = true; break; }
      if (!seen) {
        distinct_raw.push_back(a.pp.get());
        distinct_pps.push_back(a.pp);
      }
    }
  }

  PeasAttribute out;
  out.name = pa.name;
  out.value = Value(aggregate_fold(pa.fn, values));
  out.category = reg.derive(OperatorKind::Aggregation, pa.fn, {ref},
                            {lineage_category.begin(), lineage_category.end()});
  out.pp = compose_present(distinct_pps, pa.name, purpose_tax, category_tax,
                           cache);
  out.history = merge_histories(histories);
  out.history.push_back(create_history_entry({lineage_category}, out.category));

  Tuple result;
  result.timestamp = emit_ts;
  result.attributes.push_back(std::move(out));
  return result;
}

std::vector<Tuple> apply_join(const OperatorSpec& op, Window& left,
                              Window& right, const Tuple& arrival,
                              JoinSide side, const DerivationPathRegistry& reg,
                              const Taxonomy& purpose_tax,
                              const Taxonomy& category_tax,
                              ComposeCache* cache) {
  if (op.kind != OperatorKind::Join || !op.join)
    throw PeasError(ErrorCode::InvalidArgument, "operator is not a join");

  Window& own = side == JoinSide::Left ? left : right;
  Window& opposite = side == JoinSide::Left ? right : left;
  const std::string& own_attr =
      side == JoinSide::Left ? op.join->left_attribute : op.join->right_attribute;
  const std::string& opp_attr =
      side == JoinSide::Left ? op.join->right_attribute : op.join->left_attribute;

  const PeasAttribute& key = arrival.at(own_attr);
  opposite.evict(arrival.timestamp);

  std::vector<Tuple> out;
  for (const Tuple& other : opposite.tuples()) {
    const PeasAttribute& other_key = other.at(opp_attr);
    if (key.value.compare(other_key.value) != 0) continue;
    const Tuple& s1 = side == JoinSide::Left ? arrival : other;
    const Tuple& s2 = side == JoinSide::Left ? other : arrival;
    out.push_back(peas_derive(op, s1, std::optional<Tuple>(s2), reg,
                              purpose_tax, category_tax, cache));
  }
  own.push(arrival);
  return out;
}

Tuple project_values_only(const OperatorSpec& op, const Tuple& t) {
  Tuple out;
  out.timestamp = t.timestamp;
  for (const auto& pa : op.parameters) {
    std::vector<Value> args;
    for (const auto& name : pa.attributes) args.push_back(t.at(name).value);
    PeasAttribute a;
    a.name = pa.name;
    a.value = apply_scalar_fn(pa.fn, args);
    out.attributes.push_back(std::move(a));
  }
  return out;
}

std::optional<Tuple> aggregate_values_only(const OperatorSpec& op,
                                           const Window& w,
                                           std::int64_t emit_ts) {
  if (w.empty()) return std::nullopt;
  const ProjectionParam& pa = op.parameters.front();
  std::vector<double> values;
  for (const Tuple& t : w.tuples())
    values.push_back(t.at(pa.attributes.front()).value.as_double());
  PeasAttribute a;
  a.name = pa.name;
  a.value = Value(aggregate_fold(pa.fn, values));
  Tuple out;
  out.timestamp = emit_ts;
  out.attributes.push_back(std::move(a));
  return out;
}

std::vector<Tuple> join_values_only(const OperatorSpec& op, Window& left,
                                    Window& right, const Tuple& arrival,
                                    JoinSide side) {
  Window& own = side == JoinSide::Left ? left : right;
  Window& opposite = side == JoinSide::Left ? right : left;
  const std::string& own_attr =
      side == JoinSide::Left ? op.join->left_attribute : op.join->right_attribute;
  const std::string& opp_attr =
      side == JoinSide::Left ? op.join->right_attribute : op.join->left_attribute;

  const PeasAttribute& key = arrival.at(own_attr);
  opposite.evict(arrival.timestamp);

  std::vector<Tuple> out;
  for (const Tuple& other : opposite.tuples()) {
    if (key.value.compare(other.at(opp_attr).value) != 0) continue;
    const Tuple& s1 = side == JoinSide::Left ? arrival : other;
    const Tuple& s2 = side == JoinSide::Left ? other : arrival;
    out.push_back(assemble_join_output(s1, s2, op.join->left_attribute,
                                       op.join->right_attribute,
                                       s1.at(op.join->left_attribute),
                                       s2.at(op.join->right_attribute)));
  }
  own.push(arrival);
  return out;
}

ProjectionOp::ProjectionOp(OperatorSpec spec, const DerivationPathRegistry& reg,
                           const Taxonomy& purpose_tax,
                           const Taxonomy& category_tax, bool metadata)
    : spec_(std::move(spec)),
      reg_(reg),
      purpose_tax_(purpose_tax),
      category_tax_(category_tax),
      metadata_(metadata) {
  if (spec_.kind != OperatorKind::Projection)
    throw PeasError(ErrorCode::InvalidArgument, "operator is not a projection");
}

Tuple ProjectionOp::process(const Tuple& t) {
  if (!metadata_) return project_values_only(spec_, t);
  return apply_projection(spec_, t, reg_, purpose_tax_, category_tax_, &cache_);
}

AggregationOp::AggregationOp(OperatorSpec spec,
                             const DerivationPathRegistry& reg,
                             const Taxonomy& purpose_tax,
                             const Taxonomy& category_tax, bool metadata)
    : spec_(std::move(spec)),
      reg_(reg),
      purpose_tax_(purpose_tax),
      category_tax_(category_tax),
      metadata_(metadata),
      window_(spec_.window.value_or(WindowSpec{})),
      next_emit_at_(window_.spec().slide) {
  const WindowSpec& w = window_.spec();
  if (w.slide < 1 || w.size < w.slide)
    throw PeasError(ErrorCode::InvalidArgument,
                    "window requires size >= slide >= 1");
}

std::optional<Tuple> AggregationOp::emit(std::int64_t emit_ts) {
  if (!metadata_) return aggregate_values_only(spec_, window_, emit_ts);
  return apply_aggregation(spec_, window_, emit_ts, reg_, purpose_tax_,
                           category_tax_, &cache_);
}

std::vector<Tuple> AggregationOp::process(Tuple t) {
  std::vector<Tuple> out;
  if (window_.spec().mode == WindowMode::Time) {
    while (t.timestamp >= next_emit_at_) {
      window_.evict(next_emit_at_);
      if (auto e = emit(next_emit_at_)) out.push_back(std::move(*e));
      next_emit_at_ += window_.spec().slide;
    }
    window_.push(std::move(t));
  } else {
    window_.push(std::move(t));
    if (++pushes_since_emit_ >= window_.spec().slide) {
      pushes_since_emit_ = 0;
      if (auto e = emit(window_.tuples().back().timestamp))
        out.push_back(std::move(*e));
    }
  }
  return out;
}

std::vector<Tuple> AggregationOp::close(std::int64_t end_ts) {
  std::vector<Tuple> out;
  if (window_.spec().mode == WindowMode::Time) {
    while (next_emit_at_ <= end_ts) {
      window_.evict(next_emit_at_);
      if (auto e = emit(next_emit_at_)) out.push_back(std::move(*e));
      next_emit_at_ += window_.spec().slide;
    }
    // partial final window, unless end_ts itself was the last boundary
    if (next_emit_at_ - window_.spec().slide != end_ts) {
      window_.evict(end_ts);
      if (auto e = emit(end_ts)) out.push_back(std::move(*e));
    }
  } else if (pushes_since_emit_ > 0) {
    if (auto e = emit(end_ts)) out.push_back(std::move(*e));
  }
  return out;
}

JoinOp::JoinOp(OperatorSpec spec, const DerivationPathRegistry& reg,
               const Taxonomy& purpose_tax, const Taxonomy& category_tax,
               bool metadata)
    : spec_(std::move(spec)),
      reg_(reg),
      purpose_tax_(purpose_tax),
      category_tax_(category_tax),
      metadata_(metadata),
      left_(spec_.join ? spec_.join->left_window : WindowSpec{}),
      right_(spec_.join ? spec_.join->right_window : WindowSpec{}) {
  if (spec_.kind != OperatorKind::Join || !spec_.join)
    throw PeasError(ErrorCode::InvalidArgument, "operator is not a join");
}

std::vector<Tuple> JoinOp::process(Tuple t, JoinSide side) {
  if (!metadata_) return join_values_only(spec_, left_, right_, t, side);
  return apply_join(spec_, left_, right_, t, side, reg_, purpose_tax_,
                    category_tax_, &cache_);
}

}  // namespace peasflow

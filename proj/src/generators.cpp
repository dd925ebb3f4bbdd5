#include <random>
#include <sstream>

#include "json.hpp"
#include "peasflow/scenario.hpp"
#include "peasflow/simnet.hpp"

namespace peasflow {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// stable across toolchains, unlike the std distributions
std::uint64_t pick(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

}  // namespace

std::uint64_t stable_hash(const std::string& s) { return fnv1a(s); }

Taxonomy generate_random_tree(TaxonomyKind kind, const std::string& prefix,
                              int node_count, std::uint64_t seed) {
  if (node_count < 1)
    throw PeasError(ErrorCode::InvalidArgument, "tree needs at least one node");
  std::mt19937_64 rng(mix(seed, fnv1a(prefix)));
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int k = 1; k < node_count; ++k) {
    const int parent = static_cast<int>(pick(rng, k));
    edges.emplace_back(prefix + std::to_string(parent),
                       prefix + std::to_string(k));
  }
  return Taxonomy::build(kind, prefix + "0", edges);
}

std::vector<PrivacyPreference> generate_pp_set(PpSetKind kind,
                                               const Taxonomy& purpose_tax,
                                               const Taxonomy& category_tax,
                                               int count, std::uint64_t seed) {
  if (purpose_tax.size() < 2 || category_tax.size() < 2)
    throw PeasError(ErrorCode::InvalidArgument,
                    "pp generation needs trees with at least 2 nodes");
  std::mt19937_64 rng(mix(seed, kind == PpSetKind::FullPP ? 2 : 1));
  const auto& purposes = purpose_tax.nodes();
  const auto& categories = category_tax.nodes();

  auto pick_nodes = [&rng](const std::vector<NodeId>& pool, int lo, int hi) {
    std::set<NodeId> out;
    const int n = lo + static_cast<int>(pick(rng, hi - lo + 1));
    while (static_cast<int>(out.size()) < n)
      out.insert(pool[pick(rng, pool.size())]);
    return out;
  };

  std::vector<PrivacyPreference> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    PrivacyPreference pp;
    if (kind == PpSetKind::SimplePP || kind == PpSetKind::None) {
      pp.ip.aip = pick_nodes(purposes, 1, 1);
    } else {
      std::set<std::string> consumers;
      const int n = 1 + static_cast<int>(pick(rng, 3));
      while (static_cast<int>(consumers.size()) < n)
        consumers.insert("consumer-" + std::to_string(pick(rng, 5)));
      pp.consumer = std::move(consumers);
      pp.ip.aip = pick_nodes(purposes, 1, 2);
      pp.ip.exc = pick_nodes(purposes, 1, 1);
      pp.jac.adc = pick_nodes(categories, 1, 2);
      pp.jac.exc = pick_nodes(categories, 1, 1);
      pp.jac.ip.aip = pick_nodes(purposes, 1, 2);
      pp.jac.ip.exc = pick_nodes(purposes, 1, 1);
      pp.cdc = pick_nodes(categories, 1, 2);
    }
    out.push_back(std::move(pp));
  }
  return out;
}

namespace {

WindowSpec time_window(std::int64_t size_ms) {
  return WindowSpec{WindowMode::Time, size_ms, size_ms};
}

NodeSpec sensing_node(const std::string& id, const std::string& attribute,
                      const NodeId& category, int grid) {
  NodeSpec n;
  n.id = id;
  n.role = NodeRole::Sensing;
  n.smartness = Smartness::L1;
  SensingConfig cfg;
  cfg.attribute = attribute;
  cfg.category = {category};
  cfg.value_grid = grid;
  n.sensing = std::move(cfg);
  return n;
}

NodeSpec operator_node(const std::string& id, OperatorSpec op) {
  NodeSpec n;
  n.id = id;
  n.role = NodeRole::Processor;
  n.smartness = (op.kind == OperatorKind::Join ||
                 op.kind == OperatorKind::Aggregation)
                    ? Smartness::L3
                    : Smartness::L2;
  n.op = std::move(op);
  return n;
}

NodeSpec consumer_node(const std::string& id, const std::string& consumer_id,
                       const NodeId& purpose) {
  NodeSpec n;
  n.id = id;
  n.role = NodeRole::Consumer;
  n.smartness = Smartness::L3;
  n.policy = ConsumerPolicy{consumer_id, purpose};
  return n;
}

OperatorSpec join_op(const std::string& left, const std::string& right,
                     std::int64_t window_ms) {
  OperatorSpec op;
  op.kind = OperatorKind::Join;
  op.join = JoinSpec{left, right, time_window(window_ms), time_window(window_ms)};
  return op;
}

OperatorSpec projection_op(std::vector<ProjectionParam> params) {
  OperatorSpec op;
  op.kind = OperatorKind::Projection;
  op.parameters = std::move(params);
  return op;
}

OperatorSpec selection_op(const std::string& attr, Comparator cmp, Value c) {
  OperatorSpec op;
  op.kind = OperatorKind::Selection;
  op.predicate = SelectionPredicate{attr, cmp, std::move(c)};
  return op;
}

OperatorSpec aggregation_op(const std::string& name, const std::string& attr,
                            const std::string& fn, std::int64_t window_ms) {
  OperatorSpec op;
  op.kind = OperatorKind::Aggregation;
  op.parameters = {ProjectionParam{name, {attr}, fn}};
  op.window = time_window(window_ms);
  return op;
}

}  // namespace

QueryGraph generate_query_family(int n, int sensing_count, std::uint64_t seed) {
  if (n < 1 || n > 10)
    throw PeasError(ErrorCode::InvalidArgument, "family index must be in 1..10");
  if (sensing_count < 2)
    throw PeasError(ErrorCode::InvalidArgument, "joins need at least 2 sensing SOs");

  std::mt19937_64 rng(mix(seed, 11));
  QueryGraph g;
  g.name = "q" + std::to_string(n);

  for (int i = 1; i <= sensing_count; ++i) {
    const NodeId cat = "c" + std::to_string(pick(rng, 100));
    g.nodes.push_back(sensing_node("s" + std::to_string(i),
                                   "s" + std::to_string(i), cat, 4));
  }

  // selectivity decreases with n: tighter selections, larger windows
  const double threshold = 1.0 + 0.25 * n;
  const std::int64_t agg_window_ms = (2 + n) * 1000;

  std::string carry;  // attribute feeding the next block's left input
  std::string upstream;  // node id feeding the next block
  for (int i = 1; i <= n; ++i) {
    const std::string b = std::to_string(i);
    const int right_sensor = 2 + ((i - 1) % (sensing_count - 1));
    const std::string right_attr = "s" + std::to_string(right_sensor);
    const std::string left_attr = i == 1 ? "s1" : carry;

    g.nodes.push_back(operator_node("join" + b, join_op(left_attr, right_attr, 5000)));
    g.edges.emplace_back(i == 1 ? "s1" : upstream, "join" + b);
    g.edges.emplace_back("s" + std::to_string(right_sensor), "join" + b);

    g.nodes.push_back(operator_node(
        "proj" + b,
        projection_op({ProjectionParam{"k" + b, {left_attr}, "identity"},
                       ProjectionParam{"v" + b, {left_attr, right_attr}, "mul"}})));
    g.edges.emplace_back("join" + b, "proj" + b);

    g.nodes.push_back(operator_node(
        "sel" + b, selection_op("v" + b, Comparator::Ge, Value(threshold))));
    g.edges.emplace_back("proj" + b, "sel" + b);

    g.nodes.push_back(operator_node(
        "agg" + b, aggregation_op("g" + b, "k" + b, "max", agg_window_ms)));
    g.edges.emplace_back("sel" + b, "agg" + b);

    carry = "g" + b;
    upstream = "agg" + b;
  }

  const NodeId purpose = "p" + std::to_string(pick(rng, 100));
  g.nodes.push_back(consumer_node("consumer", "consumer-0", purpose));
  g.edges.emplace_back(upstream, "consumer");
  return g;
}

QueryGraph generate_sensing_chain(int sensing_count, std::uint64_t seed) {
  if (sensing_count < 1)
    throw PeasError(ErrorCode::InvalidArgument, "need at least one sensing SO");

  std::mt19937_64 rng(mix(seed, 13));
  QueryGraph g;
  g.name = "sensing" + std::to_string(sensing_count);

  for (int i = 1; i <= sensing_count; ++i) {
    const std::string b = std::to_string(i);
    const NodeId cat = "c" + std::to_string(pick(rng, 100));
    g.nodes.push_back(sensing_node("s" + b, "s" + b, cat, 4));
    g.nodes.push_back(
        operator_node("pre" + b, aggregation_op("a" + b, "s" + b, "max", 5000)));
    g.edges.emplace_back("s" + b, "pre" + b);
  }

  std::string upstream = "pre1";
  for (int k = 2; k <= sensing_count; ++k) {
    const std::string b = std::to_string(k);
    g.nodes.push_back(
        operator_node("join" + b, join_op("a1", "a" + b, 10000)));
    g.edges.emplace_back(upstream, "join" + b);
    g.edges.emplace_back("pre" + b, "join" + b);
    upstream = "join" + b;
  }

  const std::string tail_attr =
      sensing_count == 1 ? "a1" : "a" + std::to_string(sensing_count);
  g.nodes.push_back(operator_node(
      "proj", projection_op({ProjectionParam{"pc", {"a1", tail_attr}, "mul"}})));
  g.edges.emplace_back(upstream, "proj");
  g.nodes.push_back(
      operator_node("sel", selection_op("pc", Comparator::Ge, Value(1.0))));
  g.edges.emplace_back("proj", "sel");
  g.nodes.push_back(operator_node("agg", aggregation_op("out", "pc", "avg", 5000)));
  g.edges.emplace_back("sel", "agg");

  const NodeId purpose = "p" + std::to_string(pick(rng, 100));
  g.nodes.push_back(consumer_node("consumer", "consumer-0", purpose));
  g.edges.emplace_back("agg", "consumer");
  return g;
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

std::string MetricsReport::csv_header() {
  return "run_id,graph,enforcement,latency_us_p50,latency_us_p95,"
         "extra_bits_per_tuple,selectivity,bandwidth_kbit_h,tuples_in,"
         "tuples_out";
}

std::string MetricsReport::to_csv_row() const {
  std::ostringstream os;
  os << run_id << ',' << graph << ',' << (enforcement ? "on" : "off") << ','
     << format_double(latency.p50_us) << ',' << format_double(latency.p95_us)
     << ',' << format_double(extra_bits_per_tuple) << ','
     << format_double(selectivity) << ','
     << format_double(bandwidth_kbit_per_hour) << ',' << tuples_in << ','
     << tuples_out;
  return os.str();
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["run_id"] = run_id;
  j["graph"] = graph;
  j["enforcement"] = enforcement ? "on" : "off";
  j["tuples_in"] = tuples_in;
  j["tuples_out"] = tuples_out;
  j["selectivity"] = selectivity;
  j["extra_bits_per_tuple"] = extra_bits_per_tuple;
  j["bandwidth_kbit_per_hour"] = bandwidth_kbit_per_hour;
  j["latency_us"] = nlohmann::json{{"p50", latency.p50_us},
                                   {"p95", latency.p95_us},
                                   {"total", latency.total_us}};
  j["per_node_us"] = per_node_us;
  j["attributes_released"] = attributes_released;
  j["attributes_dropped"] = attributes_dropped;
  j["failed_check_counts"] = failed_check_counts;
  j["duration_seconds"] = duration_seconds;
  j["seed"] = seed;
  return j.dump(2);
}

}  // namespace peasflow

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "peasflow/compliance.hpp"
#include "peasflow/operators.hpp"
#include "peasflow/preferences.hpp"

namespace peasflow {

struct ScenarioDocument;

enum class NodeRole { Sensing, Processor, Consumer };
enum class Smartness { L1, L2, L3 };

const char* node_role_name(NodeRole r);
const char* smartness_name(Smartness s);

/// Sensing source: one attribute per tuple at a fixed rate. When
/// `value_grid` is set, values are uniform integers in [0, value_grid)
/// emitted as floats, so equi-joins downstream can match.
struct SensingConfig {
  std::string attribute;
  std::set<NodeId> category;
  std::optional<std::string> pp_ref;
  std::optional<double> rate_per_s;  // defaults to the workload rate
  std::optional<int> value_grid;
};

/// One smart object in the network: a sensing source, an operator host, or
/// the consumer running compliance checks.
struct NodeSpec {
  std::string id;
  NodeRole role{NodeRole::Processor};
  Smartness smartness{Smartness::L3};
  std::optional<SensingConfig> sensing;
  std::optional<OperatorSpec> op;
  std::optional<ConsumerPolicy> policy;
};

/// Acyclic operator network. Edge order matters: the first edge into a join
/// node feeds its left input.
struct QueryGraph {
  std::string name;
  std::vector<NodeSpec> nodes;
  std::vector<std::pair<std::string, std::string>> edges;

  const NodeSpec* find(const std::string& id) const;
};

enum class PpSetKind { None, SimplePP, FullPP };

const char* pp_set_kind_name(PpSetKind k);

/// Workload axes of the overhead experiments. Everything derived from
/// `seed` is deterministic.
struct WorkloadSpec {
  int sensing_so_count{2};
  double rate_per_stream{10.0};
  PpSetKind pp_set_kind{PpSetKind::None};
  int pp_coverage_percent{100};
  double duration_seconds{30.0};
  std::uint64_t seed{1};
};

struct LatencyStats {
  double p50_us{0};
  double p95_us{0};
  double total_us{0};
};

/// Measured outputs of one run. All fields except the latency block are
/// deterministic for a given scenario and seed.
struct MetricsReport {
  std::string run_id;
  std::string graph;
  bool enforcement{false};
  std::uint64_t tuples_in{0};
  std::uint64_t tuples_out{0};   // tuples reaching the consumer node
  double selectivity{0};         // tuples_out / tuples_in
  double extra_bits_per_tuple{0};
  double bandwidth_kbit_per_hour{0};
  LatencyStats latency;
  std::map<std::string, double> per_node_us;
  std::uint64_t attributes_released{0};
  std::uint64_t attributes_dropped{0};
  std::map<std::string, std::uint64_t> failed_check_counts;
  double duration_seconds{0};
  std::uint64_t seed{0};

  std::string to_json() const;
  std::string to_csv_row() const;
  static std::string csv_header();
};

struct SimOptions {
  bool parallel = false;
  std::string run_id;
};

/// Drives the workload through the graph in logical time. With enforcement
/// on, PEAS derivation runs at every operator and the consumer applies the
/// compliance check; with enforcement off only raw values flow.
MetricsReport run_simulation(const ScenarioDocument& scenario, bool enforcement,
                             const SimOptions& options = {});

struct OverheadReport {
  MetricsReport off;
  MetricsReport on;
  double overhead_percent{0};
};

/// Same scenario and seed with enforcement off, then on.
OverheadReport measure_overhead(const ScenarioDocument& scenario,
                                const SimOptions& options = {});

/// Random preference sets of the two complexity levels used by the
/// experiments: SimplePP constrains only the intended purpose; FullPP puts
/// a condition on every field.
std::vector<PrivacyPreference> generate_pp_set(PpSetKind kind,
                                               const Taxonomy& purpose_tax,
                                               const Taxonomy& category_tax,
                                               int count, std::uint64_t seed);

/// Qn: n selection, n projection, n aggregation and n join operators wired
/// into n chained blocks over `sensing_count` sources (>= 2), ending in one
/// consumer. Selection thresholds tighten and aggregation windows grow with
/// n, so selectivity decreases along the family.
QueryGraph generate_query_family(int n, int sensing_count, std::uint64_t seed);

/// Sensing-count axis: each of the m sources is pre-aggregated, the
/// aggregated streams are joined pairwise into a chain, then projected,
/// filtered, aggregated and consumed. m = 1 degenerates to a single chain
/// without joins.
QueryGraph generate_sensing_chain(int sensing_count, std::uint64_t seed);

/// Uniform random tree: node k's parent is uniform over nodes 0..k-1.
Taxonomy generate_random_tree(TaxonomyKind kind, const std::string& prefix,
                              int node_count, std::uint64_t seed);

/// Synthesizes a complete experiment scenario around a Qn family graph:
/// 100-node purpose and category trees, workload and enforcement flags.
ScenarioDocument build_family_scenario(int n, int sensing_count,
                                       PpSetKind pp_kind, int coverage_percent,
                                       std::uint64_t seed);

/// Same, around a sensing-chain graph with `sensing_count` sources.
ScenarioDocument build_sensing_scenario(int sensing_count, PpSetKind pp_kind,
                                        int coverage_percent,
                                        std::uint64_t seed);

/// FNV-1a, stable across toolchains; used to derive per-node RNG streams.
std::uint64_t stable_hash(const std::string& s);

}  // namespace peasflow

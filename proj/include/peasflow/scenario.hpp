#pragma once

#include <string>
#include <vector>

#include "peasflow/simnet.hpp"

namespace peasflow {

/// One self-contained experiment bundle: taxonomies, named preferences,
/// derivation paths, the query graph, the workload and enforcement flags.
/// Fully validated on load; immutable afterwards.
struct ScenarioDocument {
  Taxonomy purpose_tree;
  Taxonomy category_tree;
  std::map<std::string, PrivacyPreference> preferences;
  DerivationPathRegistry derivation_paths;
  QueryGraph graph;
  WorkloadSpec workload;
  ComplianceFlags flags;
};

struct GraphViolation {
  std::string where;  // node id or edge "a->b"
  std::string message;
};

/// Structural checks on a query graph: acyclicity, role in/out degrees, and
/// the smartness constraints (window-based operators need level 3).
std::vector<GraphViolation> validate_graph(const QueryGraph& g);

/// Parses and validates a scenario. Every id cross-reference must resolve
/// and the graph must pass validate_graph. Throws ParseError,
/// UnknownReference or InvariantViolation with the offending path.
ScenarioDocument load_scenario(const std::string& json_text);
ScenarioDocument load_scenario_file(const std::string& path);

std::string save_scenario(const ScenarioDocument& sc);

/// PEAS-annotated tuples in the scenario JSON form, for the check/encode
/// commands. Preferences may be inline objects or names defined by `sc`.
std::vector<Tuple> load_tuples_json(const std::string& json_text,
                                    const ScenarioDocument& sc);

/// Same format without a scenario: preferences must be inline and ids are
/// taken as opaque (no taxonomy validation). Used for bit accounting.
std::vector<Tuple> load_tuples_standalone(const std::string& json_text);

bool scenario_equal(const ScenarioDocument& a, const ScenarioDocument& b);

}  // namespace peasflow

#include "peasflow/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace peasflow {

using nlohmann::json;

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& path,
                       const std::string& what) {
  throw PeasError(code, path + ": " + what);
}

const json& require(const json& j, const std::string& key,
                    const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::ParseError, path, "missing field '" + key + "'");
  return *it;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(ErrorCode::ParseError, path, "expected a string");
  return j.get<std::string>();
}

std::set<std::string> string_set(const json& j, const std::string& path) {
  if (!j.is_array()) fail(ErrorCode::ParseError, path, "expected an array");
  std::set<std::string> out;
  for (const auto& e : j) out.insert(as_string(e, path));
  return out;
}

std::set<std::string> optional_string_set(const json& j, const std::string& key,
                                          const std::string& path) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  return string_set(*it, path + "." + key);
}

void check_ids(const std::set<NodeId>& ids, const Taxonomy& tax,
               const std::string& path) {
  for (const auto& id : ids)
    if (!tax.contains(id))
      fail(ErrorCode::UnknownReference, path,
           "unknown " +
               std::string(tax.kind() == TaxonomyKind::Purpose ? "purpose"
                                                               : "category") +
               " '" + id + "'");
}

Taxonomy parse_taxonomy(const json& j, TaxonomyKind kind,
                        const std::string& path) {
  if (!j.is_object()) fail(ErrorCode::ParseError, path, "expected an object");
  std::string root = as_string(require(j, "root", path), path + ".root");
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& e : require(j, "edges", path)) {
    if (!e.is_array() || e.size() != 2)
      fail(ErrorCode::ParseError, path + ".edges", "expected [parent, child]");
    edges.emplace_back(as_string(e[0], path), as_string(e[1], path));
  }
  return Taxonomy::build(kind, root, edges);
}

json taxonomy_json(const Taxonomy& t) {
  json j;
  j["root"] = t.root();
  json edges = json::array();
  for (const auto& [p, c] : t.edges()) edges.push_back(json::array({p, c}));
  j["edges"] = edges;
  return j;
}

IntendedPurpose parse_ip(const json& j, const std::string& path) {
  if (!j.is_object()) fail(ErrorCode::ParseError, path, "expected an object");
  IntendedPurpose ip;
  ip.aip = optional_string_set(j, "aip", path);
  ip.exc = optional_string_set(j, "exc", path);
  return ip;
}

PrivacyPreference parse_preference(const json& j, const std::string& path) {
  if (!j.is_object()) fail(ErrorCode::ParseError, path, "expected an object");
  PrivacyPreference pp;
  if (j.contains("attribute"))
    pp.attribute = as_string(j.at("attribute"), path + ".attribute");
  pp.consumer = optional_string_set(j, "consumer", path);
  if (j.contains("ip")) pp.ip = parse_ip(j.at("ip"), path + ".ip");
  if (j.contains("jac")) {
    const json& jj = j.at("jac");
    pp.jac.adc = optional_string_set(jj, "adc", path + ".jac");
    pp.jac.exc = optional_string_set(jj, "exc", path + ".jac");
    if (jj.contains("ip"))
      pp.jac.ip = parse_ip(jj.at("ip"), path + ".jac.ip");
  }
  pp.cdc = optional_string_set(j, "cdc", path);
  return pp;
}

void check_preference(const PrivacyPreference& pp, const Taxonomy& purpose_tax,
                      const Taxonomy& category_tax, const std::string& path) {
  check_ids(pp.ip.aip, purpose_tax, path + ".ip.aip");
  check_ids(pp.ip.exc, purpose_tax, path + ".ip.exc");
  check_ids(pp.jac.adc, category_tax, path + ".jac.adc");
  check_ids(pp.jac.exc, category_tax, path + ".jac.exc");
  check_ids(pp.jac.ip.aip, purpose_tax, path + ".jac.ip.aip");
  check_ids(pp.jac.ip.exc, purpose_tax, path + ".jac.ip.exc");
  check_ids(pp.cdc, category_tax, path + ".cdc");
}

json ip_json(const IntendedPurpose& ip) {
  return json{{"aip", ip.aip}, {"exc", ip.exc}};
}

json preference_json(const PrivacyPreference& pp) {
  json j;
  j["attribute"] = pp.attribute;
  j["consumer"] = pp.consumer;
  j["ip"] = ip_json(pp.ip);
  j["jac"] = json{{"adc", pp.jac.adc},
                  {"exc", pp.jac.exc},
                  {"ip", ip_json(pp.jac.ip)}};
  j["cdc"] = pp.cdc;
  return j;
}

OperatorKind parse_operator_kind(const std::string& s, const std::string& path) {
  if (s == "selection") return OperatorKind::Selection;
  if (s == "projection") return OperatorKind::Projection;
  if (s == "aggregation") return OperatorKind::Aggregation;
  if (s == "join") return OperatorKind::Join;
  fail(ErrorCode::ParseError, path, "unknown operator kind '" + s + "'");
}

Comparator parse_comparator(const std::string& s, const std::string& path) {
  if (s == "<") return Comparator::Lt;
  if (s == "<=") return Comparator::Le;
  if (s == ">") return Comparator::Gt;
  if (s == ">=") return Comparator::Ge;
  if (s == "==") return Comparator::Eq;
  if (s == "!=") return Comparator::Ne;
  fail(ErrorCode::ParseError, path, "unknown comparator '" + s + "'");
}

const char* comparator_text(Comparator c) {
  switch (c) {
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
    case Comparator::Gt: return ">";
    case Comparator::Ge: return ">=";
    case Comparator::Eq: return "==";
    case Comparator::Ne: return "!=";
  }
  return "?";
}

Value parse_value(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Value(j.get<std::int64_t>());
  if (j.is_number()) return Value(j.get<double>());
  if (j.is_string()) return Value(j.get<std::string>());
  fail(ErrorCode::ParseError, path, "expected a number or string");
}

json value_json(const Value& v) {
  if (v.is_integer()) return json(v.as_integer());
  if (v.is_number()) return json(v.as_double());
  return json(v.as_string());
}

WindowSpec parse_window(const json& j, const std::string& path) {
  WindowSpec w;
  if (j.contains("mode")) {
    std::string m = as_string(j.at("mode"), path + ".mode");
    if (m == "time")
      w.mode = WindowMode::Time;
    else if (m == "count")
      w.mode = WindowMode::Count;
    else
      fail(ErrorCode::ParseError, path + ".mode", "expected 'time' or 'count'");
  }
  if (j.contains("size")) w.size = j.at("size").get<std::int64_t>();
  if (j.contains("slide"))
    w.slide = j.at("slide").get<std::int64_t>();
  else
    w.slide = w.size;  // tumbling by default
  if (w.slide < 1 || w.size < w.slide)
    fail(ErrorCode::InvariantViolation, path, "window requires size >= slide >= 1");
  return w;
}

json window_json(const WindowSpec& w) {
  return json{{"mode", w.mode == WindowMode::Time ? "time" : "count"},
              {"size", w.size},
              {"slide", w.slide}};
}

ProjectionParam parse_param(const json& j, const std::string& path) {
  ProjectionParam pa;
  pa.name = as_string(require(j, "name", path), path + ".name");
  for (const auto& a : require(j, "attributes", path))
    pa.attributes.push_back(as_string(a, path + ".attributes"));
  if (pa.attributes.empty())
    fail(ErrorCode::InvariantViolation, path, "parameter references no attributes");
  pa.fn = as_string(require(j, "fn", path), path + ".fn");
  if (!is_known_scalar_fn(pa.fn))
    fail(ErrorCode::UnknownReference, path + ".fn", "unknown function '" + pa.fn + "'");
  return pa;
}

json param_json(const ProjectionParam& pa) {
  return json{{"name", pa.name}, {"attributes", pa.attributes}, {"fn", pa.fn}};
}

OperatorSpec parse_operator(const json& j, const std::string& path) {
  OperatorSpec op;
  op.kind = parse_operator_kind(as_string(require(j, "kind", path), path + ".kind"),
                                path + ".kind");
  switch (op.kind) {
    case OperatorKind::Selection: {
      const json& p = require(j, "predicate", path);
      SelectionPredicate pred;
      pred.attribute = as_string(require(p, "attribute", path), path + ".predicate");
      pred.cmp = parse_comparator(
          as_string(require(p, "comparator", path), path + ".predicate"),
          path + ".predicate.comparator");
      pred.constant = parse_value(require(p, "constant", path),
                                  path + ".predicate.constant");
      op.predicate = std::move(pred);
      break;
    }
    case OperatorKind::Projection: {
      const json& ps = require(j, "parameters", path);
      for (std::size_t i = 0; i < ps.size(); ++i)
        op.parameters.push_back(
            parse_param(ps[i], path + ".parameters[" + std::to_string(i) + "]"));
      if (op.parameters.empty())
        fail(ErrorCode::InvariantViolation, path, "projection with no parameters");
      break;
    }
    case OperatorKind::Aggregation: {
      op.parameters.push_back(
          parse_param(require(j, "parameter", path), path + ".parameter"));
      if (op.parameters.front().attributes.size() != 1)
        fail(ErrorCode::InvariantViolation, path + ".parameter",
             "aggregation references exactly one attribute");
      op.window = parse_window(
          j.contains("window") ? j.at("window") : json::object(), path + ".window");
      break;
    }
    case OperatorKind::Join: {
      JoinSpec js;
      js.left_attribute = as_string(require(j, "left", path), path + ".left");
      js.right_attribute = as_string(require(j, "right", path), path + ".right");
      js.left_window = parse_window(
          j.contains("left_window") ? j.at("left_window") : json::object(),
          path + ".left_window");
      js.right_window = parse_window(
          j.contains("right_window") ? j.at("right_window") : json::object(),
          path + ".right_window");
      op.join = std::move(js);
      break;
    }
  }
  return op;
}

json operator_json(const OperatorSpec& op) {
  json j;
  switch (op.kind) {
    case OperatorKind::Selection: {
      j["kind"] = "selection";
      j["predicate"] = json{{"attribute", op.predicate->attribute},
                            {"comparator", comparator_text(op.predicate->cmp)},
                            {"constant", value_json(op.predicate->constant)}};
      break;
    }
    case OperatorKind::Projection: {
      j["kind"] = "projection";
      json ps = json::array();
      for (const auto& pa : op.parameters) ps.push_back(param_json(pa));
      j["parameters"] = ps;
      break;
    }
    case OperatorKind::Aggregation: {
      j["kind"] = "aggregation";
      j["parameter"] = param_json(op.parameters.front());
      j["window"] = window_json(*op.window);
      break;
    }
    case OperatorKind::Join: {
      j["kind"] = "join";
      j["left"] = op.join->left_attribute;
      j["right"] = op.join->right_attribute;
      j["left_window"] = window_json(op.join->left_window);
      j["right_window"] = window_json(op.join->right_window);
      break;
    }
  }
  return j;
}

Smartness parse_smartness(const std::string& s, const std::string& path) {
  if (s == "L1") return Smartness::L1;
  if (s == "L2") return Smartness::L2;
  if (s == "L3") return Smartness::L3;
  fail(ErrorCode::ParseError, path, "unknown smartness level '" + s + "'");
}

bool is_window_operator(const OperatorSpec& op) {
  return op.kind == OperatorKind::Aggregation || op.kind == OperatorKind::Join;
}

NodeSpec parse_node(const json& j, const std::string& path) {
  NodeSpec n;
  n.id = as_string(require(j, "id", path), path + ".id");
  if (j.contains("sensing")) {
    const json& s = j.at("sensing");
    SensingConfig cfg;
    cfg.attribute = as_string(require(s, "attribute", path), path + ".sensing.attribute");
    cfg.category = optional_string_set(s, "category", path + ".sensing");
    if (s.contains("pp") && !s.at("pp").is_null())
      cfg.pp_ref = as_string(s.at("pp"), path + ".sensing.pp");
    if (s.contains("rate")) cfg.rate_per_s = s.at("rate").get<double>();
    if (s.contains("value_grid"))
      cfg.value_grid = s.at("value_grid").get<int>();
    n.sensing = std::move(cfg);
    n.role = NodeRole::Sensing;
    n.smartness = Smartness::L1;
  } else if (j.contains("operator")) {
    n.op = parse_operator(j.at("operator"), path + ".operator");
    n.role = NodeRole::Processor;
    n.smartness = is_window_operator(*n.op) ? Smartness::L3 : Smartness::L2;
  } else if (j.contains("policy")) {
    const json& p = j.at("policy");
    ConsumerPolicy cp;
    cp.consumer_id = as_string(require(p, "consumer_id", path), path + ".policy");
    cp.access_purpose = as_string(require(p, "purpose", path), path + ".policy");
    n.policy = std::move(cp);
    n.role = NodeRole::Consumer;
    n.smartness = Smartness::L3;
  } else {
    fail(ErrorCode::ParseError, path,
         "node needs a 'sensing', 'operator' or 'policy' payload");
  }
  if (j.contains("smartness"))
    n.smartness = parse_smartness(as_string(j.at("smartness"), path), path + ".smartness");
  return n;
}

json node_json(const NodeSpec& n) {
  json j;
  j["id"] = n.id;
  j["smartness"] = smartness_name(n.smartness);
  if (n.sensing) {
    json s;
    s["attribute"] = n.sensing->attribute;
    s["category"] = n.sensing->category;
    if (n.sensing->pp_ref) s["pp"] = *n.sensing->pp_ref;
    if (n.sensing->rate_per_s) s["rate"] = *n.sensing->rate_per_s;
    if (n.sensing->value_grid) s["value_grid"] = *n.sensing->value_grid;
    j["sensing"] = s;
  }
  if (n.op) j["operator"] = operator_json(*n.op);
  if (n.policy)
    j["policy"] = json{{"consumer_id", n.policy->consumer_id},
                       {"purpose", n.policy->access_purpose}};
  return j;
}

QueryGraph parse_graph(const json& j, const std::string& path) {
  QueryGraph g;
  if (j.contains("name")) g.name = as_string(j.at("name"), path + ".name");
  for (std::size_t i = 0; i < require(j, "nodes", path).size(); ++i)
    g.nodes.push_back(
        parse_node(j.at("nodes")[i], path + ".nodes[" + std::to_string(i) + "]"));
  for (const auto& e : require(j, "edges", path)) {
    if (!e.is_array() || e.size() != 2)
      fail(ErrorCode::ParseError, path + ".edges", "expected [from, to]");
    g.edges.emplace_back(as_string(e[0], path), as_string(e[1], path));
  }
  return g;
}

json graph_json(const QueryGraph& g) {
  json j;
  j["name"] = g.name;
  json nodes = json::array();
  for (const auto& n : g.nodes) nodes.push_back(node_json(n));
  j["nodes"] = nodes;
  json edges = json::array();
  for (const auto& [a, b] : g.edges) edges.push_back(json::array({a, b}));
  j["edges"] = edges;
  return j;
}

PpSetKind parse_pp_set_kind(const std::string& s, const std::string& path) {
  if (s == "none") return PpSetKind::None;
  if (s == "simple") return PpSetKind::SimplePP;
  if (s == "full") return PpSetKind::FullPP;
  fail(ErrorCode::ParseError, path, "expected 'none', 'simple' or 'full'");
}

WorkloadSpec parse_workload(const json& j, const std::string& path) {
  WorkloadSpec w;
  if (j.contains("sensing_so_count"))
    w.sensing_so_count = j.at("sensing_so_count").get<int>();
  if (j.contains("rate_per_stream"))
    w.rate_per_stream = j.at("rate_per_stream").get<double>();
  if (j.contains("pp_set"))
    w.pp_set_kind = parse_pp_set_kind(as_string(j.at("pp_set"), path), path + ".pp_set");
  if (j.contains("pp_coverage_percent"))
    w.pp_coverage_percent = j.at("pp_coverage_percent").get<int>();
  if (j.contains("duration_seconds"))
    w.duration_seconds = j.at("duration_seconds").get<double>();
  if (j.contains("seed")) w.seed = j.at("seed").get<std::uint64_t>();
  if (w.sensing_so_count < 1)
    fail(ErrorCode::InvariantViolation, path, "sensing_so_count must be >= 1");
  if (w.rate_per_stream <= 0)
    fail(ErrorCode::InvariantViolation, path, "rate_per_stream must be positive");
  if (w.pp_coverage_percent < 0 || w.pp_coverage_percent > 100)
    fail(ErrorCode::InvariantViolation, path, "pp_coverage_percent out of range");
  if (w.duration_seconds <= 0)
    fail(ErrorCode::InvariantViolation, path, "duration_seconds must be positive");
  return w;
}

json workload_json(const WorkloadSpec& w) {
  return json{{"sensing_so_count", w.sensing_so_count},
              {"rate_per_stream", w.rate_per_stream},
              {"pp_set", pp_set_kind_name(w.pp_set_kind)},
              {"pp_coverage_percent", w.pp_coverage_percent},
              {"duration_seconds", w.duration_seconds},
              {"seed", w.seed}};
}

DerivationPath parse_derivation_path(const json& j, const std::string& path) {
  DerivationPath dp;
  std::string kind = as_string(require(j, "key_kind", path), path + ".key_kind");
  if (kind == "names")
    dp.key_kind = DerivationPath::KeyKind::AttributeNames;
  else if (kind == "categories")
    dp.key_kind = DerivationPath::KeyKind::Categories;
  else
    fail(ErrorCode::ParseError, path + ".key_kind", "expected 'names' or 'categories'");
  for (const auto& k : require(j, "keys", path))
    dp.keys.insert(as_string(k, path + ".keys"));
  dp.fn = as_string(require(j, "fn", path), path + ".fn");
  dp.op = parse_operator_kind(as_string(require(j, "operator", path), path),
                              path + ".operator");
  dp.result_category =
      as_string(require(j, "result_category", path), path + ".result_category");
  return dp;
}

json derivation_path_json(const DerivationPath& dp) {
  return json{
      {"key_kind",
       dp.key_kind == DerivationPath::KeyKind::AttributeNames ? "names"
                                                              : "categories"},
      {"keys", dp.keys},
      {"fn", dp.fn},
      {"operator", operator_kind_name(dp.op)},
      {"result_category", dp.result_category}};
}

}  // namespace

const NodeSpec* QueryGraph::find(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const char* node_role_name(NodeRole r) {
  switch (r) {
    case NodeRole::Sensing: return "sensing";
    case NodeRole::Processor: return "processor";
    case NodeRole::Consumer: return "consumer";
  }
  return "?";
}

const char* smartness_name(Smartness s) {
  switch (s) {
    case Smartness::L1: return "L1";
    case Smartness::L2: return "L2";
    case Smartness::L3: return "L3";
  }
  return "?";
}

const char* pp_set_kind_name(PpSetKind k) {
  switch (k) {
    case PpSetKind::None: return "none";
    case PpSetKind::SimplePP: return "simple";
    case PpSetKind::FullPP: return "full";
  }
  return "?";
}

std::vector<GraphViolation> validate_graph(const QueryGraph& g) {
  std::vector<GraphViolation> out;
  std::map<std::string, const NodeSpec*> by_id;
  for (const auto& n : g.nodes) {
    if (!by_id.emplace(n.id, &n).second)
      out.push_back({n.id, "duplicate node id"});
  }

  std::map<std::string, int> in_deg, out_deg;
  for (const auto& [from, to] : g.edges) {
    const std::string where = from + "->" + to;
    if (!by_id.count(from)) out.push_back({where, "edge from unknown node"});
    if (!by_id.count(to)) out.push_back({where, "edge to unknown node"});
    if (by_id.count(from) && by_id.count(to)) {
      ++out_deg[from];
      ++in_deg[to];
    }
  }

  // Kahn's toposort for cycle detection
  std::map<std::string, int> pending = in_deg;
  std::vector<std::string> queue;
  for (const auto& n : g.nodes)
    if (!pending.count(n.id)) queue.push_back(n.id);
  std::size_t visited = 0;
  while (!queue.empty()) {
    std::string cur = queue.back();
    queue.pop_back();
    ++visited;
    for (const auto& [from, to] : g.edges)
      if (from == cur && --pending[to] == 0) queue.push_back(to);
  }
  if (visited != by_id.size()) out.push_back({g.name, "graph has a cycle"});

  for (const auto& n : g.nodes) {
    const int in = in_deg.count(n.id) ? in_deg[n.id] : 0;
    const int degree_out = out_deg.count(n.id) ? out_deg[n.id] : 0;
    switch (n.role) {
      case NodeRole::Sensing:
        if (!n.sensing) out.push_back({n.id, "sensing node without sensing config"});
        if (in != 0) out.push_back({n.id, "sensing in-degree must be 0"});
        if (n.smartness != Smartness::L1)
          out.push_back({n.id, "sensing role maps to smartness L1"});
        if (n.sensing && n.sensing->category.empty())
          out.push_back({n.id, "sensing category must be nonempty"});
        break;
      case NodeRole::Processor: {
        if (!n.op) {
          out.push_back({n.id, "processor node without operator"});
          break;
        }
        const int want = n.op->kind == OperatorKind::Join ? 2 : 1;
        if (in != want)
          out.push_back({n.id, std::string(operator_kind_name(n.op->kind)) +
                                   " in-degree must be " + std::to_string(want)});
        if (is_window_operator(*n.op) && n.smartness != Smartness::L3)
          out.push_back({n.id, "window op needs L3"});
        if (!is_window_operator(*n.op) && n.smartness == Smartness::L1)
          out.push_back({n.id, "processor role needs L2 or L3"});
        break;
      }
      case NodeRole::Consumer:
        if (!n.policy) out.push_back({n.id, "consumer node without policy"});
        if (degree_out != 0) out.push_back({n.id, "consumer out-degree must be 0"});
        if (n.smartness != Smartness::L3)
          out.push_back({n.id, "consumer role needs L3"});
        break;
    }
  }
  return out;
}

ScenarioDocument load_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw PeasError(ErrorCode::ParseError, e.what());
  }
  try {
    ScenarioDocument sc{
        parse_taxonomy(require(j, "purpose_tree", "$"), TaxonomyKind::Purpose,
                       "purpose_tree"),
        parse_taxonomy(require(j, "category_tree", "$"), TaxonomyKind::Category,
                       "category_tree"),
        {},
        {},
        {},
        {},
        {}};

    if (j.contains("preferences")) {
      for (const auto& [name, pj] : j.at("preferences").items()) {
        const std::string path = "preferences." + name;
        PrivacyPreference pp = parse_preference(pj, path);
        check_preference(pp, sc.purpose_tree, sc.category_tree, path);
        sc.preferences.emplace(name, std::move(pp));
      }
    }

    if (j.contains("derivation_paths")) {
      const json& dps = j.at("derivation_paths");
      for (std::size_t i = 0; i < dps.size(); ++i) {
        const std::string path = "derivation_paths[" + std::to_string(i) + "]";
        DerivationPath dp = parse_derivation_path(dps[i], path);
        if (!sc.category_tree.contains(dp.result_category))
          fail(ErrorCode::UnknownReference, path + ".result_category",
               "unknown category '" + dp.result_category + "'");
        if (dp.key_kind == DerivationPath::KeyKind::Categories)
          for (const auto& k : dp.keys)
            if (!sc.category_tree.contains(k))
              fail(ErrorCode::UnknownReference, path + ".keys",
                   "unknown category '" + k + "'");
        sc.derivation_paths.add(std::move(dp));
      }
    }

    sc.graph = parse_graph(require(j, "graph", "$"), "graph");
    for (std::size_t i = 0; i < sc.graph.nodes.size(); ++i) {
      const NodeSpec& n = sc.graph.nodes[i];
      const std::string path = "graph.nodes[" + std::to_string(i) + "]";
      if (n.sensing) {
        check_ids(n.sensing->category, sc.category_tree, path + ".sensing.category");
        if (n.sensing->pp_ref && !sc.preferences.count(*n.sensing->pp_ref))
          fail(ErrorCode::UnknownReference, path + ".sensing.pp",
               "unknown preference '" + *n.sensing->pp_ref + "'");
      }
      if (n.policy && !sc.purpose_tree.contains(n.policy->access_purpose))
        fail(ErrorCode::UnknownReference, path + ".policy.purpose",
             "unknown purpose '" + n.policy->access_purpose + "'");
    }

    if (j.contains("workload"))
      sc.workload = parse_workload(j.at("workload"), "workload");
    if (j.contains("flags")) {
      const json& f = j.at("flags");
      if (f.contains("jac_ip_vacuous_on_empty_history"))
        sc.flags.jac_ip_vacuous_on_empty_history =
            f.at("jac_ip_vacuous_on_empty_history").get<bool>();
    }

    std::vector<GraphViolation> violations = validate_graph(sc.graph);
    if (!violations.empty()) {
      std::ostringstream os;
      os << "graph invalid:";
      for (const auto& v : violations) os << " [" << v.where << "] " << v.message << ";";
      throw PeasError(ErrorCode::InvariantViolation, os.str());
    }
    return sc;
  } catch (const json::exception& e) {
    throw PeasError(ErrorCode::ParseError, e.what());
  }
}

ScenarioDocument load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw PeasError(ErrorCode::ParseError, "cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

std::string save_scenario(const ScenarioDocument& sc) {
  json j;
  j["purpose_tree"] = taxonomy_json(sc.purpose_tree);
  j["category_tree"] = taxonomy_json(sc.category_tree);
  json prefs = json::object();
  for (const auto& [name, pp] : sc.preferences) prefs[name] = preference_json(pp);
  j["preferences"] = prefs;
  json dps = json::array();
  for (const auto& dp : sc.derivation_paths.rules())
    dps.push_back(derivation_path_json(dp));
  j["derivation_paths"] = dps;
  j["graph"] = graph_json(sc.graph);
  j["workload"] = workload_json(sc.workload);
  j["flags"] = json{{"jac_ip_vacuous_on_empty_history",
                     sc.flags.jac_ip_vacuous_on_empty_history}};
  return j.dump(2);
}

namespace {

std::vector<Tuple> load_tuples_impl(const std::string& json_text,
                                    const ScenarioDocument* sc) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw PeasError(ErrorCode::ParseError, e.what());
  }
  if (!j.is_array()) throw PeasError(ErrorCode::ParseError, "expected an array of tuples");

  std::vector<Tuple> out;
  for (std::size_t ti = 0; ti < j.size(); ++ti) {
    const std::string tpath = "tuples[" + std::to_string(ti) + "]";
    const json& tj = j[ti];
    Tuple t;
    if (tj.contains("timestamp")) t.timestamp = tj.at("timestamp").get<std::int64_t>();
    const json& attrs = require(tj, "attributes", tpath);
    for (std::size_t ai = 0; ai < attrs.size(); ++ai) {
      const std::string apath = tpath + ".attributes[" + std::to_string(ai) + "]";
      const json& aj = attrs[ai];
      PeasAttribute a;
      a.name = as_string(require(aj, "name", apath), apath + ".name");
      a.value = parse_value(require(aj, "value", apath), apath + ".value");
      if (aj.contains("pp") && !aj.at("pp").is_null()) {
        PrivacyPreference pp;
        if (aj.at("pp").is_string()) {
          if (!sc)
            fail(ErrorCode::UnknownReference, apath + ".pp",
                 "preference references need a scenario");
          const std::string ref = aj.at("pp").get<std::string>();
          auto it = sc->preferences.find(ref);
          if (it == sc->preferences.end())
            fail(ErrorCode::UnknownReference, apath + ".pp",
                 "unknown preference '" + ref + "'");
          pp = it->second;
        } else {
          pp = parse_preference(aj.at("pp"), apath + ".pp");
          if (sc)
            check_preference(pp, sc->purpose_tree, sc->category_tree,
                             apath + ".pp");
        }
        a.pp = std::make_shared<const PrivacyPreference>(std::move(pp));
      }
      a.category = optional_string_set(aj, "category", apath);
      if (sc) check_ids(a.category, sc->category_tree, apath + ".category");
      if (aj.contains("history")) {
        for (const auto& hj : aj.at("history")) {
          HistoryEntry he;
          he.ac = optional_string_set(hj, "ac", apath + ".history");
          he.rc = optional_string_set(hj, "rc", apath + ".history");
          if (sc) {
            check_ids(he.ac, sc->category_tree, apath + ".history.ac");
            check_ids(he.rc, sc->category_tree, apath + ".history.rc");
          }
          a.history.push_back(std::move(he));
        }
      }
      t.attributes.push_back(std::move(a));
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::vector<Tuple> load_tuples_json(const std::string& json_text,
                                    const ScenarioDocument& sc) {
  return load_tuples_impl(json_text, &sc);
}

std::vector<Tuple> load_tuples_standalone(const std::string& json_text) {
  return load_tuples_impl(json_text, nullptr);
}

bool scenario_equal(const ScenarioDocument& a, const ScenarioDocument& b) {
  auto tax_equal = [](const Taxonomy& x, const Taxonomy& y) {
    return x.kind() == y.kind() && x.root() == y.root() && x.edges() == y.edges();
  };
  auto dp_equal = [](const DerivationPath& x, const DerivationPath& y) {
    return x.key_kind == y.key_kind && x.keys == y.keys && x.fn == y.fn &&
           x.op == y.op && x.result_category == y.result_category;
  };
  if (!tax_equal(a.purpose_tree, b.purpose_tree)) return false;
  if (!tax_equal(a.category_tree, b.category_tree)) return false;
  if (a.preferences != b.preferences) return false;
  const auto& ra = a.derivation_paths.rules();
  const auto& rb = b.derivation_paths.rules();
  if (ra.size() != rb.size()) return false;
  for (std::size_t i = 0; i < ra.size(); ++i)
    if (!dp_equal(ra[i], rb[i])) return false;

  auto node_equal = [](const NodeSpec& x, const NodeSpec& y) {
    auto sensing_equal = [](const std::optional<SensingConfig>& s,
                            const std::optional<SensingConfig>& t) {
      if (s.has_value() != t.has_value()) return false;
      if (!s) return true;
      return s->attribute == t->attribute && s->category == t->category &&
             s->pp_ref == t->pp_ref && s->rate_per_s == t->rate_per_s &&
             s->value_grid == t->value_grid;
    };
    return x.id == y.id && x.role == y.role && x.smartness == y.smartness &&
           sensing_equal(x.sensing, y.sensing) && x.op == y.op &&
           x.policy == y.policy;
  };
  if (a.graph.name != b.graph.name || a.graph.edges != b.graph.edges ||
      a.graph.nodes.size() != b.graph.nodes.size())
    return false;
  for (std::size_t i = 0; i < a.graph.nodes.size(); ++i)
    if (!node_equal(a.graph.nodes[i], b.graph.nodes[i])) return false;

  const WorkloadSpec &wa = a.workload, &wb = b.workload;
  if (wa.sensing_so_count != wb.sensing_so_count ||
      wa.rate_per_stream != wb.rate_per_stream ||
      wa.pp_set_kind != wb.pp_set_kind ||
      wa.pp_coverage_percent != wb.pp_coverage_percent ||
      wa.duration_seconds != wb.duration_seconds || wa.seed != wb.seed)
    return false;
  return a.flags.jac_ip_vacuous_on_empty_history ==
         b.flags.jac_ip_vacuous_on_empty_history;
}

}  // namespace peasflow

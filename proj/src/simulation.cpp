#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <queue>
#include <random>
#include <thread>

#include "peasflow/encoding.hpp"
#include "peasflow/engine.hpp"
#include "peasflow/scenario.hpp"
#include "peasflow/simnet.hpp"

namespace peasflow {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

/// Outgoing edge: destination node and the input port it feeds there.
/// Port 0 is a join's left input, port 1 its right input.
struct OutEdge {
  int target;
  int port;
};

/// Per-node mutable state and instrumentation.
struct NodeRt {
  const NodeSpec* spec = nullptr;
  std::vector<OutEdge> succ;
  int in_ports = 0;
  std::unique_ptr<ProjectionOp> proj;
  std::unique_ptr<AggregationOp> agg;
  std::unique_ptr<JoinOp> join;
  std::unique_ptr<NormalizeCache> normalize_cache;  // consumer only
  std::shared_ptr<const PrivacyPreference> pp;      // sensing only
  double rate = 0;
  std::int64_t emissions = 0;

  double busy_ns = 0;
  std::vector<double> invocation_us;
};

struct ConsumerStats {
  std::uint64_t tuples_out = 0;
  std::uint64_t attributes_released = 0;
  std::uint64_t attributes_dropped = 0;
  std::map<std::string, std::uint64_t> failed_check_counts;
  double total_bits = 0;
  IdInterner interner;
};

struct SimContext {
  const ScenarioDocument* sc = nullptr;
  bool enforcement = false;
  std::vector<NodeRt> nodes;
  std::vector<int> topo;
  std::int64_t end_ts = 0;
};

class Stopwatch {
 public:
  explicit Stopwatch(NodeRt& node) : node_(node), start_(Clock::now()) {}
  ~Stopwatch() {
    const double ns = std::chrono::duration<double, std::nano>(Clock::now() -
                                                               start_)
                          .count();
    node_.busy_ns += ns;
    node_.invocation_us.push_back(ns / 1000.0);
  }

 private:
  NodeRt& node_;
  Clock::time_point start_;
};

Tuple make_sensing_tuple(const NodeRt& node, std::int64_t ts, double value,
                         bool enforcement) {
  Tuple t;
  t.timestamp = ts;
  const SensingConfig& cfg = *node.spec->sensing;
  if (enforcement) {
    t.attributes.push_back(
        init_peas(cfg.attribute, Value(value), node.pp, cfg.category));
  } else {
    PeasAttribute a;
    a.name = cfg.attribute;
    a.value = Value(value);
    t.attributes.push_back(std::move(a));
  }
  return t;
}

SimContext prepare(const ScenarioDocument& sc, bool enforcement) {
  std::vector<GraphViolation> violations = validate_graph(sc.graph);
  if (!violations.empty())
    throw PeasError(ErrorCode::InvalidGraph,
                    violations.front().where + ": " + violations.front().message);

  SimContext ctx;
  ctx.sc = &sc;
  ctx.enforcement = enforcement;
  ctx.end_ts = static_cast<std::int64_t>(sc.workload.duration_seconds * 1000.0);

  std::map<std::string, int> index;
  for (std::size_t i = 0; i < sc.graph.nodes.size(); ++i)
    index[sc.graph.nodes[i].id] = static_cast<int>(i);

  ctx.nodes.resize(sc.graph.nodes.size());
  for (std::size_t i = 0; i < sc.graph.nodes.size(); ++i)
    ctx.nodes[i].spec = &sc.graph.nodes[i];
  for (const auto& [from, to] : sc.graph.edges) {
    NodeRt& dst = ctx.nodes[index[to]];
    ctx.nodes[index[from]].succ.push_back({index[to], dst.in_ports});
    dst.in_ports += 1;
  }

  // topological order (graph already validated acyclic)
  std::vector<int> in_deg(ctx.nodes.size(), 0);
  for (const auto& n : ctx.nodes)
    for (const OutEdge& e : n.succ) ++in_deg[e.target];
  std::deque<int> q;
  for (std::size_t i = 0; i < ctx.nodes.size(); ++i)
    if (in_deg[i] == 0) q.push_back(static_cast<int>(i));
  while (!q.empty()) {
    int cur = q.front();
    q.pop_front();
    ctx.topo.push_back(cur);
    for (const OutEdge& e : ctx.nodes[cur].succ)
      if (--in_deg[e.target] == 0) q.push_back(e.target);
  }

  // resolve sensing preferences: scenario refs or a generated set
  std::vector<int> sensing_nodes;
  for (std::size_t i = 0; i < ctx.nodes.size(); ++i)
    if (ctx.nodes[i].spec->role == NodeRole::Sensing)
      sensing_nodes.push_back(static_cast<int>(i));

  const WorkloadSpec& w = sc.workload;
  std::vector<PrivacyPreference> generated;
  std::vector<bool> covered(sensing_nodes.size(), true);
  if (w.pp_set_kind != PpSetKind::None && !sensing_nodes.empty()) {
    generated = generate_pp_set(w.pp_set_kind, sc.purpose_tree, sc.category_tree,
                                static_cast<int>(sensing_nodes.size()), w.seed);
    const int k = static_cast<int>(
        std::llround(sensing_nodes.size() * w.pp_coverage_percent / 100.0));
    std::vector<int> order(sensing_nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::mt19937_64 shuffle_rng(mix_seed(w.seed, 17));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng() % i]);
    covered.assign(sensing_nodes.size(), false);
    for (int i = 0; i < k && i < static_cast<int>(order.size()); ++i)
      covered[order[i]] = true;
  }

  for (std::size_t si = 0; si < sensing_nodes.size(); ++si) {
    NodeRt& node = ctx.nodes[sensing_nodes[si]];
    const SensingConfig& cfg = *node.spec->sensing;
    node.rate = cfg.rate_per_s.value_or(w.rate_per_stream);
    if (node.rate <= 0)
      throw PeasError(ErrorCode::InvalidArgument,
                      "sensing rate must be positive: " + node.spec->id);
    node.emissions =
        static_cast<std::int64_t>(std::floor(w.duration_seconds * node.rate));

    if (w.pp_set_kind == PpSetKind::None) {
      if (cfg.pp_ref) {
        auto it = sc.preferences.find(*cfg.pp_ref);
        if (it == sc.preferences.end())
          throw PeasError(ErrorCode::UnknownReference,
                          "preference " + *cfg.pp_ref + " not in scenario");
        auto pp = it->second;
        pp.attribute = cfg.attribute;
        node.pp = std::make_shared<const PrivacyPreference>(std::move(pp));
      }
    } else if (covered[si]) {
      auto pp = generated[si];
      pp.attribute = cfg.attribute;
      node.pp = std::make_shared<const PrivacyPreference>(std::move(pp));
    }
  }

  // operator instances
  for (auto& node : ctx.nodes) {
    if (node.spec->role == NodeRole::Consumer) {
      node.normalize_cache =
          std::make_unique<NormalizeCache>(sc.purpose_tree, sc.category_tree);
      continue;
    }
    if (node.spec->role != NodeRole::Processor) continue;
    const OperatorSpec& op = *node.spec->op;
    if (op.kind == OperatorKind::Projection)
      node.proj = std::make_unique<ProjectionOp>(op, sc.derivation_paths,
                                                 sc.purpose_tree,
                                                 sc.category_tree, enforcement);
    else if (op.kind == OperatorKind::Aggregation)
      node.agg = std::make_unique<AggregationOp>(op, sc.derivation_paths,
                                                 sc.purpose_tree, sc.category_tree,
                                                 enforcement);
    else if (op.kind == OperatorKind::Join)
      node.join = std::make_unique<JoinOp>(op, sc.derivation_paths,
                                           sc.purpose_tree, sc.category_tree,
                                           enforcement);
  }
  return ctx;
}

double sensing_value(const SensingConfig& cfg, std::mt19937_64& rng) {
  if (cfg.value_grid)
    return static_cast<double>(rng() % static_cast<std::uint64_t>(*cfg.value_grid));
  return uniform01(rng) * 100.0;
}

std::vector<Tuple> process_at(SimContext& ctx, int node_idx, const Tuple& t,
                              int port, ConsumerStats& consumer) {
  NodeRt& node = ctx.nodes[node_idx];
  const NodeSpec& spec = *node.spec;
  std::vector<Tuple> out;

  if (spec.role == NodeRole::Consumer) {
    consumer.tuples_out += 1;
    if (ctx.enforcement) {
      {
        Stopwatch timer(node);
        auto [released, verdicts] =
            compliance_check(t, *spec.policy, ctx.sc->purpose_tree,
                             ctx.sc->category_tree, ctx.sc->flags,
                             node.normalize_cache.get());
        consumer.attributes_released += released.attributes.size();
        consumer.attributes_dropped +=
            t.attributes.size() - released.attributes.size();
        for (const auto& v : verdicts)
          for (CheckKind k : v.failed)
            consumer.failed_check_counts[check_kind_name(k)] += 1;
      }
      // bit accounting sits outside the timed region
      for (const auto& a : t.attributes)
        consumer.total_bits +=
            static_cast<double>(metadata_bits(a, consumer.interner));
    } else {
      consumer.attributes_released += t.attributes.size();
    }
    return out;
  }

  const OperatorSpec& op = *spec.op;
  Stopwatch timer(node);
  switch (op.kind) {
    case OperatorKind::Selection: {
      if (auto kept = apply_selection(*op.predicate, t))
        out.push_back(std::move(*kept));
      break;
    }
    case OperatorKind::Projection: {
      out.push_back(node.proj->process(t));
      break;
    }
    case OperatorKind::Aggregation: {
      out = node.agg->process(t);
      break;
    }
    case OperatorKind::Join: {
      out = node.join->process(t, port == 1 ? JoinSide::Right : JoinSide::Left);
      break;
    }
  }
  return out;
}

struct Event {
  std::int64_t ts;
  std::uint64_t seq;
  int target;
  int port;       // -1 for sensing ticks
  std::int64_t k; // emission index for sensing ticks
  Tuple tuple;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.ts != b.ts) return a.ts > b.ts;
    return a.seq > b.seq;
  }
};

struct SerialRun {
  std::priority_queue<Event, std::vector<Event>, EventAfter> heap;
  std::uint64_t seq = 0;
  std::uint64_t tuples_in = 0;
  ConsumerStats consumer;
  std::vector<std::mt19937_64> rng;
};

void deliver(SimContext& ctx, SerialRun& run, int from, std::vector<Tuple> outs) {
  for (auto& t : outs) {
    for (const OutEdge& edge : ctx.nodes[from].succ) {
      Event e;
      e.ts = t.timestamp;
      e.seq = run.seq++;
      e.target = edge.target;
      e.port = edge.port;
      e.k = 0;
      e.tuple = t;
      run.heap.push(std::move(e));
    }
  }
}

void drain(SimContext& ctx, SerialRun& run) {
  while (!run.heap.empty()) {
    Event e = run.heap.top();
    run.heap.pop();
    NodeRt& node = ctx.nodes[e.target];
    if (e.port < 0) {
      // sensing tick: emit tuple k, schedule k+1
      run.tuples_in += 1;
      const double value = sensing_value(*node.spec->sensing, run.rng[e.target]);
      Tuple t;
      {
        Stopwatch timer(node);
        t = make_sensing_tuple(node, e.ts, value, ctx.enforcement);
      }
      deliver(ctx, run, e.target, {std::move(t)});
      if (e.k + 1 < node.emissions) {
        Event next;
        next.ts = static_cast<std::int64_t>(
            std::llround((e.k + 1) * 1000.0 / node.rate));
        next.seq = run.seq++;
        next.target = e.target;
        next.port = -1;
        next.k = e.k + 1;
        run.heap.push(std::move(next));
      }
    } else {
      std::vector<Tuple> outs = process_at(ctx, e.target, e.tuple, e.port,
                                           run.consumer);
      deliver(ctx, run, e.target, std::move(outs));
    }
  }
}

void run_serial(SimContext& ctx, SerialRun& run) {
  run.rng.reserve(ctx.nodes.size());
  for (std::size_t i = 0; i < ctx.nodes.size(); ++i)
    run.rng.emplace_back(
        mix_seed(ctx.sc->workload.seed, stable_hash(ctx.nodes[i].spec->id)));

  for (std::size_t i = 0; i < ctx.nodes.size(); ++i) {
    NodeRt& node = ctx.nodes[i];
    if (node.spec->role != NodeRole::Sensing || node.emissions <= 0) continue;
    Event e;
    e.ts = 0;
    e.seq = run.seq++;
    e.target = static_cast<int>(i);
    e.port = -1;
    e.k = 0;
    run.heap.push(std::move(e));
  }
  drain(ctx, run);

  // end of stream: flush window state in topological order so deep chains
  // still emit within a finite run
  for (int idx : ctx.topo) {
    NodeRt& node = ctx.nodes[idx];
    if (node.agg) {
      std::vector<Tuple> outs;
      {
        Stopwatch timer(node);
        outs = node.agg->close(ctx.end_ts);
      }
      deliver(ctx, run, idx, std::move(outs));
      drain(ctx, run);
    }
  }
}

// ---- parallel actor mode -------------------------------------------------

/// FIFO channel between two nodes; unbounded, closed by the producer.
class Channel {
 public:
  void send(Tuple t) {
    std::lock_guard<std::mutex> lock(m_);
    q_.push_back(std::move(t));
    cv_.notify_all();
  }
  void close() {
    std::lock_guard<std::mutex> lock(m_);
    closed_ = true;
    cv_.notify_all();
  }
  /// Blocks until a tuple is available or the channel is closed empty.
  bool peek_ts(std::int64_t& ts) {
    std::unique_lock<std::mutex> lock(m_);
    cv_.wait(lock, [&] { return !q_.empty() || closed_; });
    if (q_.empty()) return false;
    ts = q_.front().timestamp;
    return true;
  }
  std::optional<Tuple> pop() {
    std::unique_lock<std::mutex> lock(m_);
    cv_.wait(lock, [&] { return !q_.empty() || closed_; });
    if (q_.empty()) return std::nullopt;
    Tuple t = std::move(q_.front());
    q_.pop_front();
    return t;
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  std::deque<Tuple> q_;
  bool closed_ = false;
};

struct ParallelRun {
  std::uint64_t tuples_in = 0;
  ConsumerStats consumer;
  std::mutex metrics_mutex;
};

void run_parallel(SimContext& ctx, ParallelRun& run) {
  const std::size_t n = ctx.nodes.size();
  // one channel per edge; indexed by (target, port) for the reader
  std::map<std::pair<int, int>, std::unique_ptr<Channel>> channels;
  for (std::size_t i = 0; i < n; ++i)
    for (const OutEdge& e : ctx.nodes[i].succ)
      channels.emplace(std::make_pair(e.target, e.port),
                       std::make_unique<Channel>());

  auto outgoing = [&](int idx) {
    std::vector<Channel*> out;
    for (const OutEdge& e : ctx.nodes[idx].succ)
      out.push_back(channels.at({e.target, e.port}).get());
    return out;
  };
  auto incoming = [&](int idx) {
    std::vector<Channel*> in;
    for (int p = 0; p < ctx.nodes[idx].in_ports; ++p)
      in.push_back(channels.at({idx, p}).get());
    return in;
  };

  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    threads.emplace_back([&, idx = static_cast<int>(i)] {
      NodeRt& node = ctx.nodes[idx];
      auto outs = outgoing(idx);
      auto send_all = [&](std::vector<Tuple> tuples) {
        for (auto& t : tuples)
          for (Channel* c : outs) c->send(t);
      };

      if (node.spec->role == NodeRole::Sensing) {
        std::mt19937_64 rng(
            mix_seed(ctx.sc->workload.seed, stable_hash(node.spec->id)));
        for (std::int64_t k = 0; k < node.emissions; ++k) {
          const auto ts =
              static_cast<std::int64_t>(std::llround(k * 1000.0 / node.rate));
          const double value = sensing_value(*node.spec->sensing, rng);
          Tuple t;
          {
            Stopwatch timer(node);
            t = make_sensing_tuple(node, ts, value, ctx.enforcement);
          }
          {
            std::lock_guard<std::mutex> lock(run.metrics_mutex);
            run.tuples_in += 1;
          }
          send_all({std::move(t)});
        }
        for (Channel* c : outs) c->close();
        return;
      }

      auto ins = incoming(idx);
      ConsumerStats local;
      // merge all inputs by (timestamp, port order); deterministic and
      // equivalent to the serial schedule up to same-timestamp reordering
      std::vector<bool> open(ins.size(), true);
      while (true) {
        int best = -1;
        std::int64_t best_ts = 0;
        for (std::size_t c = 0; c < ins.size(); ++c) {
          if (!open[c]) continue;
          std::int64_t ts;
          if (!ins[c]->peek_ts(ts)) {
            open[c] = false;
            continue;
          }
          if (best < 0 || ts < best_ts) {
            best = static_cast<int>(c);
            best_ts = ts;
          }
        }
        if (best < 0) break;
        std::optional<Tuple> t = ins[best]->pop();
        if (!t) continue;
        std::vector<Tuple> produced = process_at(ctx, idx, *t, best, local);
        send_all(std::move(produced));
      }
      if (node.agg) {
        std::vector<Tuple> outs_close;
        {
          Stopwatch timer(node);
          outs_close = node.agg->close(ctx.end_ts);
        }
        send_all(std::move(outs_close));
      }
      for (Channel* c : outs) c->close();

      if (node.spec->role == NodeRole::Consumer) {
        std::lock_guard<std::mutex> lock(run.metrics_mutex);
        run.consumer.tuples_out += local.tuples_out;
        run.consumer.attributes_released += local.attributes_released;
        run.consumer.attributes_dropped += local.attributes_dropped;
        for (const auto& [k, v] : local.failed_check_counts)
          run.consumer.failed_check_counts[k] += v;
        run.consumer.total_bits += local.total_bits;
      }
    });
  }
  for (auto& th : threads) th.join();
}

MetricsReport finalize(const SimContext& ctx, std::uint64_t tuples_in,
                       const ConsumerStats& consumer,
                       const SimOptions& options) {
  const WorkloadSpec& w = ctx.sc->workload;
  MetricsReport r;
  r.run_id = options.run_id.empty()
                 ? ctx.sc->graph.name + (ctx.enforcement ? "-on" : "-off") +
                       "-s" + std::to_string(w.seed)
                 : options.run_id;
  r.graph = ctx.sc->graph.name;
  r.enforcement = ctx.enforcement;
  r.tuples_in = tuples_in;
  r.tuples_out = consumer.tuples_out;
  r.selectivity =
      tuples_in == 0 ? 0.0
                     : static_cast<double>(consumer.tuples_out) / tuples_in;
  r.extra_bits_per_tuple =
      consumer.tuples_out == 0 ? 0.0 : consumer.total_bits / consumer.tuples_out;
  const double tuples_per_hour =
      consumer.tuples_out / w.duration_seconds * 3600.0;
  r.bandwidth_kbit_per_hour = r.extra_bits_per_tuple * tuples_per_hour / 1000.0;
  r.attributes_released = consumer.attributes_released;
  r.attributes_dropped = consumer.attributes_dropped;
  r.failed_check_counts = consumer.failed_check_counts;
  r.duration_seconds = w.duration_seconds;
  r.seed = w.seed;

  std::vector<double> samples;
  double total_ns = 0;
  for (const auto& node : ctx.nodes) {
    total_ns += node.busy_ns;
    r.per_node_us[node.spec->id] = node.busy_ns / 1000.0;
    samples.insert(samples.end(), node.invocation_us.begin(),
                   node.invocation_us.end());
  }
  r.latency.total_us = total_ns / 1000.0;
  if (!samples.empty()) {
    std::sort(samples.begin(), samples.end());
    r.latency.p50_us = samples[samples.size() / 2];
    r.latency.p95_us = samples[static_cast<std::size_t>(
        0.95 * static_cast<double>(samples.size() - 1))];
  }
  return r;
}

}  // namespace

MetricsReport run_simulation(const ScenarioDocument& scenario, bool enforcement,
                             const SimOptions& options) {
  SimContext ctx = prepare(scenario, enforcement);
  if (options.parallel) {
    ParallelRun run;
    run_parallel(ctx, run);
    return finalize(ctx, run.tuples_in, run.consumer, options);
  }
  SerialRun run;
  run_serial(ctx, run);
  return finalize(ctx, run.tuples_in, run.consumer, options);
}

OverheadReport measure_overhead(const ScenarioDocument& scenario,
                                const SimOptions& options) {
  OverheadReport r;
  r.off = run_simulation(scenario, false, options);
  r.on = run_simulation(scenario, true, options);
  r.overhead_percent =
      r.off.latency.total_us <= 0.0
          ? 0.0
          : (r.on.latency.total_us - r.off.latency.total_us) /
                r.off.latency.total_us * 100.0;
  return r;
}

ScenarioDocument build_family_scenario(int n, int sensing_count,
                                       PpSetKind pp_kind, int coverage_percent,
                                       std::uint64_t seed) {
  ScenarioDocument sc{
      generate_random_tree(TaxonomyKind::Purpose, "p", 100, seed * 2 + 1),
      generate_random_tree(TaxonomyKind::Category, "c", 100, seed * 2 + 2),
      {},
      {},
      generate_query_family(n, sensing_count, seed),
      {},
      {}};
  sc.workload.sensing_so_count = sensing_count;
  sc.workload.rate_per_stream = 10.0;
  sc.workload.pp_set_kind = pp_kind;
  sc.workload.pp_coverage_percent = coverage_percent;
  sc.workload.duration_seconds = 30.0;
  sc.workload.seed = seed;
  return sc;
}

ScenarioDocument build_sensing_scenario(int sensing_count, PpSetKind pp_kind,
                                        int coverage_percent,
                                        std::uint64_t seed) {
  ScenarioDocument sc{
      generate_random_tree(TaxonomyKind::Purpose, "p", 100, seed * 2 + 1),
      generate_random_tree(TaxonomyKind::Category, "c", 100, seed * 2 + 2),
      {},
      {},
      generate_sensing_chain(sensing_count, seed),
      {},
      {}};
  sc.workload.sensing_so_count = sensing_count;
  sc.workload.rate_per_stream = 10.0;
  sc.workload.pp_set_kind = pp_kind;
  sc.workload.pp_coverage_percent = coverage_percent;
  sc.workload.duration_seconds = 30.0;
  sc.workload.seed = seed;
  return sc;
}

}  // namespace peasflow

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "peasflow/encoding.hpp"
#include "peasflow/scenario.hpp"
#include "peasflow/simnet.hpp"

namespace fs = std::filesystem;
using namespace peasflow;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;
constexpr int kExitNonCompliant = 3;

std::uint64_t effective_seed(std::uint64_t cli_seed) {
  if (const char* env = std::getenv("PEASFLOW_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw PeasError(ErrorCode::InvalidArgument,
                      std::string("PEASFLOW_SEED is not a number: ") + env);
    }
  }
  return cli_seed;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out)
    throw PeasError(ErrorCode::InvalidArgument,
                    "cannot write " + path.string());
  out << content;
  if (!content.empty() && content.back() != '\n') out << '\n';
}

void write_report(const fs::path& dir, const MetricsReport& r) {
  fs::create_directories(dir);
  write_file(dir / ("report_" + r.run_id + ".json"), r.to_json());
  write_file(dir / ("report_" + r.run_id + ".csv"),
             MetricsReport::csv_header() + "\n" + r.to_csv_row());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw PeasError(ErrorCode::ParseError, "cannot open file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

PpSetKind parse_pp_kind(const std::string& s) {
  if (s == "none") return PpSetKind::None;
  if (s == "simple") return PpSetKind::SimplePP;
  if (s == "full") return PpSetKind::FullPP;
  throw PeasError(ErrorCode::InvalidArgument,
                  "pp set must be none, simple or full: " + s);
}

/// "a..b" or a single number; returns the inclusive range.
std::pair<int, int> parse_range(std::string s, const std::string& what) {
  // accept q1..q10 styled values too
  std::erase(s, 'q');
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const int v = std::stoi(s);
      return {v, v};
    }
    const int lo = std::stoi(s.substr(0, dots));
    const int hi = std::stoi(s.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("empty range");
    return {lo, hi};
  } catch (const std::exception&) {
    throw PeasError(ErrorCode::InvalidArgument,
                    "bad " + what + " range: " + s);
  }
}

int cmd_run(const std::string& scenario_path, const std::string& enforcement,
            std::uint64_t seed, bool seed_given, const std::string& out_dir,
            bool parallel) {
  ScenarioDocument sc = load_scenario_file(scenario_path);
  if (seed_given) sc.workload.seed = seed;
  sc.workload.seed = effective_seed(sc.workload.seed);

  SimOptions opt;
  opt.parallel = parallel;

  if (enforcement == "both") {
    OverheadReport rep = measure_overhead(sc, opt);
    write_report(out_dir, rep.off);
    write_report(out_dir, rep.on);
    std::cerr << "overhead: " << rep.overhead_percent << "% ("
              << rep.off.latency.total_us << " us off, "
              << rep.on.latency.total_us << " us on)\n";
    std::cout << rep.on.to_json() << "\n";
    return 0;
  }
  const bool on = enforcement == "on";
  if (!on && enforcement != "off")
    throw PeasError(ErrorCode::InvalidArgument,
                    "--enforcement must be on, off or both");
  MetricsReport r = run_simulation(sc, on, opt);
  write_report(out_dir, r);
  std::cout << r.to_json() << "\n";
  return 0;
}

int cmd_sweep(const std::string& template_path, const std::string& family,
              const std::string& pp, const std::string& sensing,
              std::uint64_t seed, bool seed_given, const std::string& out_dir,
              int repetitions) {
  const int axes = (family.empty() ? 0 : 1) + (pp.empty() ? 0 : 1) +
                   (sensing.empty() ? 0 : 1);
  if (axes != 1)
    throw PeasError(ErrorCode::InvalidArgument,
                    "pick exactly one sweep axis: --family, --pp or --sensing");

  ScenarioDocument tpl = load_scenario_file(template_path);
  if (seed_given) tpl.workload.seed = seed;
  tpl.workload.seed = effective_seed(tpl.workload.seed);

  fs::create_directories(out_dir);
  std::ofstream csv(fs::path(out_dir) / "sweep.csv");
  csv << MetricsReport::csv_header() << "\n";

  auto run_point = [&](ScenarioDocument& sc, const std::string& tag) {
    for (int rep = 0; rep < repetitions; ++rep) {
      SimOptions opt;
      OverheadReport r = measure_overhead(sc, opt);
      const std::string suffix =
          repetitions > 1 ? "-r" + std::to_string(rep) : "";
      r.off.run_id = tag + "-off" + suffix;
      r.on.run_id = tag + "-on" + suffix;
      csv << r.off.to_csv_row() << "\n" << r.on.to_csv_row() << "\n";
      write_report(out_dir, r.off);
      write_report(out_dir, r.on);
      std::cerr << tag << (repetitions > 1 ? " rep " + std::to_string(rep) : "")
                << ": overhead " << r.overhead_percent << "%\n";
    }
  };

  if (!family.empty()) {
    auto [lo, hi] = parse_range(family, "family");
    for (int n = lo; n <= hi; ++n) {
      ScenarioDocument sc = build_family_scenario(
          n, tpl.workload.sensing_so_count, tpl.workload.pp_set_kind,
          tpl.workload.pp_coverage_percent, tpl.workload.seed);
      sc.workload.rate_per_stream = tpl.workload.rate_per_stream;
      sc.workload.duration_seconds = tpl.workload.duration_seconds;
      sc.flags = tpl.flags;
      run_point(sc, "q" + std::to_string(n));
    }
  } else if (!sensing.empty()) {
    auto [lo, hi] = parse_range(sensing, "sensing");
    for (int m = lo; m <= hi; ++m) {
      ScenarioDocument sc = build_sensing_scenario(
          m, tpl.workload.pp_set_kind, tpl.workload.pp_coverage_percent,
          tpl.workload.seed);
      sc.workload.rate_per_stream = tpl.workload.rate_per_stream;
      sc.workload.duration_seconds = tpl.workload.duration_seconds;
      sc.flags = tpl.flags;
      run_point(sc, "sensing" + std::to_string(m));
    }
  } else {
    std::istringstream kinds(pp);
    std::string kind;
    bool any = false;
    while (std::getline(kinds, kind, ',')) {
      if (kind.empty()) continue;
      any = true;
      ScenarioDocument sc = tpl;
      sc.workload.pp_set_kind = parse_pp_kind(kind);
      run_point(sc, "pp-" + kind);
    }
    if (!any)
      throw PeasError(ErrorCode::InvalidArgument, "empty --pp sweep spec");
  }
  return 0;
}

int cmd_gen(int family, int sensing_count, bool chain, const std::string& pp,
            int coverage, std::uint64_t seed, const std::string& out_path) {
  ScenarioDocument sc =
      chain ? build_sensing_scenario(sensing_count, parse_pp_kind(pp), coverage,
                                     effective_seed(seed))
            : build_family_scenario(family, sensing_count, parse_pp_kind(pp),
                                    coverage, effective_seed(seed));
  const std::string text = save_scenario(sc);
  if (out_path.empty() || out_path == "-")
    std::cout << text << "\n";
  else
    write_file(out_path, text);
  return 0;
}

int cmd_check(const std::string& scenario_path, const std::string& tuple_path,
              const std::string& consumer, const std::string& purpose) {
  ScenarioDocument sc = load_scenario_file(scenario_path);
  if (!sc.purpose_tree.contains(purpose))
    throw PeasError(ErrorCode::UnknownReference,
                    "purpose " + purpose + " not in purpose tree");
  std::vector<Tuple> tuples = load_tuples_json(read_file(tuple_path), sc);

  ConsumerPolicy policy{consumer, purpose};
  nlohmann::json out = nlohmann::json::array();
  bool any_dropped = false;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    auto [released, verdicts] = compliance_check(
        tuples[i], policy, sc.purpose_tree, sc.category_tree, sc.flags);
    for (const auto& v : verdicts) {
      nlohmann::json vj;
      vj["tuple"] = i;
      vj["attribute"] = v.attribute;
      vj["passed"] = v.passed;
      nlohmann::json failed = nlohmann::json::array();
      for (CheckKind k : v.failed) failed.push_back(check_kind_name(k));
      vj["failed"] = failed;
      out.push_back(vj);
      if (!v.passed) {
        any_dropped = true;
        std::cerr << "tuple " << i << ": " << v.attribute << " FAIL(";
        bool first = true;
        for (CheckKind k : v.failed) {
          if (!first) std::cerr << ",";
          std::cerr << check_kind_name(k);
          first = false;
        }
        std::cerr << ")\n";
      }
    }
  }
  std::cout << out.dump(2) << "\n";
  return any_dropped ? kExitNonCompliant : 0;
}

int cmd_encode(const std::string& scenario_path, const std::string& tuple_path) {
  std::vector<Tuple> tuples;
  if (!scenario_path.empty()) {
    ScenarioDocument sc = load_scenario_file(scenario_path);
    tuples = load_tuples_json(read_file(tuple_path), sc);
  } else {
    tuples = load_tuples_standalone(read_file(tuple_path));
  }

  IdInterner table;
  nlohmann::json out = nlohmann::json::array();
  std::size_t total = 0;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    for (const auto& a : tuples[i].attributes) {
      const std::size_t bits = metadata_bits(a, table);
      total += bits;
      out.push_back(nlohmann::json{
          {"tuple", i}, {"attribute", a.name}, {"bits", bits}});
    }
  }
  nlohmann::json doc;
  doc["attributes"] = out;
  doc["total_bits"] = total;
  std::cout << doc.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privacy-enforcing stream engine and smart-object network simulator"};
  app.require_subcommand(1);

  std::string scenario, out_dir = "reports", enforcement = "on";
  std::uint64_t seed = 0;
  bool parallel = false;

  auto* run = app.add_subcommand("run", "run one scenario and write reports");
  run->add_option("scenario", scenario, "scenario JSON path")->required();
  run->add_option("--enforcement", enforcement, "on | off | both");
  auto* run_seed = run->add_option("--seed", seed, "workload seed override");
  run->add_option("--out", out_dir, "report directory");
  run->add_flag("--parallel", parallel, "run nodes as concurrent actors");

  std::string family, pp_axis, sensing_axis;
  int repetitions = 1;
  auto* sweep = app.add_subcommand("sweep", "run an experiment axis");
  sweep->add_option("template", scenario, "template scenario JSON")->required();
  sweep->add_option("--family", family, "query family range, e.g. q1..q10");
  sweep->add_option("--pp", pp_axis, "pp sets, e.g. simple,full");
  sweep->add_option("--sensing", sensing_axis, "sensing SO range, e.g. 1..10");
  auto* sweep_seed = sweep->add_option("--seed", seed, "workload seed override");
  sweep->add_option("--out", out_dir, "report directory");
  sweep->add_option("--repetitions", repetitions, "runs per sweep point");

  int gen_family = 1, gen_sensing = 2, gen_coverage = 100;
  bool gen_chain = false;
  std::string gen_pp = "full", gen_out;
  auto* gen = app.add_subcommand("gen", "generate a scenario file");
  gen->add_option("--family", gen_family, "query family index 1..10");
  gen->add_option("--sensing", gen_sensing, "sensing SO count");
  gen->add_flag("--chain", gen_chain, "sensing-chain graph instead of a family");
  gen->add_option("--pp", gen_pp, "pp set kind: none | simple | full");
  gen->add_option("--coverage", gen_coverage, "pp coverage percent");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--out", gen_out, "output path ('-' for stdout)");

  std::string tuple_path, consumer, purpose;
  auto* check = app.add_subcommand("check", "compliance-check a tuple file");
  check->add_option("scenario", scenario, "scenario JSON path")->required();
  check->add_option("--tuple", tuple_path, "tuple JSON file")->required();
  check->add_option("--consumer", consumer, "consumer id")->required();
  check->add_option("--purpose", purpose, "access purpose")->required();

  std::string enc_scenario;
  auto* encode = app.add_subcommand("encode", "meta-data bit accounting");
  encode->add_option("--tuple", tuple_path, "tuple JSON file")->required();
  encode->add_option("--scenario", enc_scenario,
                     "scenario for preference refs (optional)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(scenario, enforcement, seed, !run_seed->empty(), out_dir,
                     parallel);
    if (sweep->parsed())
      return cmd_sweep(scenario, family, pp_axis, sensing_axis, seed,
                       !sweep_seed->empty(), out_dir, repetitions);
    if (gen->parsed())
      return cmd_gen(gen_family, gen_sensing, gen_chain, gen_pp, gen_coverage,
                     seed, gen_out);
    if (check->parsed()) return cmd_check(scenario, tuple_path, consumer, purpose);
    if (encode->parsed()) return cmd_encode(enc_scenario, tuple_path);
  } catch (const PeasError& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ParseError:
      case ErrorCode::UnknownReference:
      case ErrorCode::InvariantViolation:
      case ErrorCode::InvalidArgument:
      case ErrorCode::UnknownNode:
        return kExitInput;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

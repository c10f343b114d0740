// evac: generate, solve, simulate and report on evacuation planning
// instances. Machine artifacts go to the output directory; progress goes
// to stderr. All randomness sits behind explicit --seed values.

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

#include "evac/generators.hpp"
#include "evac/hardness.hpp"
#include "evac/instance_io.hpp"
#include "evac/lns.hpp"
#include "evac/serialize.hpp"
#include "evac/sim.hpp"
#include "evac/teg.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNoIncumbent = 4;

struct CliError : std::runtime_error {
  int code;
  CliError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
};

evac::EvacuationNetwork load_valid_instance(const fs::path& path) {
  evac::EvacuationNetwork net = [&] {
    try {
      return evac::load_instance(path);
    } catch (const evac::ParseError& e) {
      throw CliError(kExitInvalidInput, std::string("parse error: ") + e.what());
    }
  }();
  const auto violations = evac::validate(net);
  if (!violations.empty()) {
    std::string msg = "invalid instance " + path.string() + ":";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw CliError(kExitInvalidInput, msg);
  }
  return net;
}

std::chrono::milliseconds parse_duration(const std::string& text) {
  try {
    if (text.size() > 2 && text.substr(text.size() - 2) == "ms") {
      return std::chrono::milliseconds(std::stoll(text.substr(0, text.size() - 2)));
    }
    if (!text.empty() && text.back() == 's') {
      return std::chrono::milliseconds(
          static_cast<int64_t>(std::stod(text.substr(0, text.size() - 1)) * 1000.0));
    }
    return std::chrono::milliseconds(static_cast<int64_t>(std::stod(text) * 1000.0));
  } catch (const std::exception&) {
    throw CliError(kExitInvalidInput, "cannot parse duration '" + text + "'");
  }
}

evac::PerturbationModel parse_perturbation(const std::string& text, uint64_t seed) {
  if (text.empty() || text == "none") return evac::PerturbationModel::none();
  if (text.rfind("normal:", 0) == 0) {
    const double sigma = std::stod(text.substr(7));
    if (!(sigma > 0)) throw CliError(kExitInvalidInput, "normal perturbation needs sigma > 0");
    return evac::PerturbationModel::normal(sigma, seed);
  }
  if (text.rfind("uniform:", 0) == 0) {
    const std::string rest = text.substr(8);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) {
      throw CliError(kExitInvalidInput, "uniform perturbation is uniform:lo,hi");
    }
    const auto lo = static_cast<evac::Timestep>(std::stol(rest.substr(0, comma)));
    const auto hi = static_cast<evac::Timestep>(std::stol(rest.substr(comma + 1)));
    if (lo > hi) throw CliError(kExitInvalidInput, "uniform perturbation needs lo <= hi");
    return evac::PerturbationModel::uniform(lo, hi, seed);
  }
  throw CliError(kExitInvalidInput, "unknown perturbation '" + text + "'");
}

// "tail-head@t" -> failure of the first edge matching (tail, head).
evac::EdgeFailure parse_failure(const evac::EvacuationNetwork& net, const std::string& text) {
  const auto at = text.rfind('@');
  if (at == std::string::npos) throw CliError(kExitInvalidInput, "failure format is tail-head@t");
  const std::string edge_part = text.substr(0, at);
  const auto dash = edge_part.find('-');
  if (dash == std::string::npos) throw CliError(kExitInvalidInput, "failure format is tail-head@t");
  const std::string tail = edge_part.substr(0, dash);
  const std::string head = edge_part.substr(dash + 1);
  const auto t = net.find_node(tail);
  const auto h = net.find_node(head);
  if (!t || !h) throw CliError(kExitInvalidInput, "failure names unknown node in '" + text + "'");
  for (evac::EdgeIndex e = 0; e < static_cast<evac::EdgeIndex>(net.num_edges()); ++e) {
    if (net.edge(e).tail == *t && net.edge(e).head == *h) {
      return evac::EdgeFailure{e, static_cast<evac::Timestep>(std::stol(text.substr(at + 1)))};
    }
  }
  throw CliError(kExitInvalidInput, "failure names missing edge in '" + text + "'");
}

void write_manifest(const fs::path& dir, const Json& manifest) {
  evac::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOptions {
  std::string kind;
  std::string output = "instance.json";
  uint64_t seed = 0;
  int rows = 4, cols = 4, sources = 2;
  int max_nodes = 8, max_sources = 3;
  evac::Timestep max_horizon = 6;
  std::string objective = "average";
  double fraction = 0.75;
  std::string fixture = "yes1";
  int64_t M = 4;
  evac::Timestep horizon_cap = evac::kDefaultGadgetHorizonCap;
};

int run_generate(const GenerateOptions& opt) {
  evac::EvacuationNetwork net = [&] {
    if (opt.kind == "sample") return evac::sample_network();
    if (opt.kind == "grid") return evac::grid_network(opt.rows, opt.cols, opt.sources, opt.seed);
    if (opt.kind == "random") {
      evac::RandomInstanceParams params;
      params.max_nodes = opt.max_nodes;
      params.max_sources = opt.max_sources;
      params.max_horizon = opt.max_horizon;
      if (opt.objective == "completion") params.objective = evac::ObjectiveKind::CompletionTime;
      if (opt.objective == "outlier") {
        params.objective = evac::ObjectiveKind::OutlierAverage;
        params.outlier_fraction = opt.fraction;
      }
      return evac::random_network(opt.seed, params);
    }
    if (opt.kind == "two-path-gadget") {
      return evac::build_two_path_gadget(evac::two_path_fixture(opt.fixture), opt.M,
                                         opt.horizon_cap);
    }
    if (opt.kind == "grid-gadget") {
      return evac::build_grid_gadget(evac::grid_fixture(opt.fixture), opt.M, opt.horizon_cap);
    }
    throw CliError(kExitInvalidInput, "unknown generate kind '" + opt.kind + "'");
  }();
  const auto violations = evac::validate(net);
  if (!violations.empty()) {
    throw CliError(kExitInvalidInput, "generated instance failed validation: " + violations[0]);
  }
  evac::save_instance(net, opt.output);
  std::cerr << "wrote " << opt.output << " (" << net.num_nodes() << " nodes, "
            << net.num_edges() << " edges, horizon " << net.horizon() << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveOptions {
  std::string instance;
  std::string method = "exact";
  std::string out_dir = "run";
  std::vector<uint64_t> seeds;
  int jobs = 1;
  int workers = 1;
  std::string time_limit;
  double threshold_gap = -1.0;  // <0: method default
  int iterations = -1;
  double p = -1.0, p_inc = -1.0;
  evac::Timestep shrink_threshold = -1;
  bool accept_worse = false;
  bool no_shrink = false;
};

Json solve_manifest(const SolveOptions& opt, uint64_t seed) {
  Json m = Json::object();
  m["command"] = "solve";
  m["instance"] = fs::absolute(opt.instance).string();
  m["method"] = opt.method;
  m["seed"] = seed;
  m["workers"] = opt.workers;
  if (!opt.time_limit.empty()) m["time_limit"] = opt.time_limit;
  if (opt.threshold_gap >= 0) m["threshold_gap"] = opt.threshold_gap;
  if (opt.iterations >= 0) m["iterations"] = opt.iterations;
  if (opt.p >= 0) m["p"] = opt.p;
  if (opt.p_inc >= 0) m["p_inc"] = opt.p_inc;
  if (opt.shrink_threshold >= 0) m["horizon_shrink_threshold"] = opt.shrink_threshold;
  if (opt.no_shrink) m["no_shrink"] = true;
  if (opt.accept_worse) m["accept_worse"] = true;
  m["outputs"] = Json::array({"plan.json", "report.json", "bounds.csv"});
  return m;
}

int solve_one(const SolveOptions& opt, uint64_t seed, const fs::path& dir) {
  const auto net = std::make_shared<evac::EvacuationNetwork>(load_valid_instance(opt.instance));
  fs::create_directories(dir);

  evac::SolveReport report;
  std::optional<evac::LnsTrace> lns_trace;
  if (opt.method == "exact") {
    evac::SolveLimits limits;
    if (!opt.time_limit.empty()) limits.time_limit = parse_duration(opt.time_limit);
    if (opt.threshold_gap >= 0) limits.threshold_gap = opt.threshold_gap;
    limits.workers = opt.workers;
    const auto teg = evac::build_variant_teg(net);
    std::cerr << "exact solve on " << opt.instance << " (TEG " << teg.nodes().size()
              << " nodes)\n";
    report = evac::solve(teg, {}, limits);
  } else if (opt.method == "lns") {
    evac::LnsParams params = evac::default_params();
    params.rng_seed = seed;
    params.workers = opt.workers;
    if (opt.iterations >= 0) params.iterations = opt.iterations;
    if (opt.p >= 0) params.p = opt.p;
    if (opt.p_inc >= 0) params.p_inc = opt.p_inc;
    if (opt.threshold_gap >= 0) params.threshold_gap = opt.threshold_gap;
    if (opt.shrink_threshold >= 0) params.horizon_shrink_threshold = opt.shrink_threshold;
    if (opt.no_shrink) {
      params.horizon_shrink_threshold = std::numeric_limits<evac::Timestep>::max() / 2;
    }
    params.accept_worse = opt.accept_worse;
    params.progress = true;
    if (!opt.time_limit.empty()) {
      params.inner_time_limit = parse_duration(opt.time_limit) / std::max(1, params.iterations);
    }
    std::cerr << "lns solve on " << opt.instance << " seed " << seed << "\n";
    try {
      evac::LnsResult result = evac::run(net, params);
      report = std::move(result.report);
      lns_trace = std::move(result.trace);
    } catch (const evac::InfeasibleError& e) {
      report.status = evac::SolveStatus::Infeasible;
      std::cerr << "infeasible: " << e.what() << "\n";
    }
  } else {
    throw CliError(kExitInvalidInput, "unknown method '" + opt.method + "'");
  }

  evac::write_text_file(dir / "report.json", evac::report_to_json(report));
  evac::write_text_file(dir / "bounds.csv", evac::bound_trace_to_csv(report));
  if (lns_trace) evac::write_text_file(dir / "trace.csv", evac::lns_trace_to_csv(*lns_trace));
  write_manifest(dir, solve_manifest(opt, seed));
  if (report.best_plan) {
    evac::save_plan(*net, *report.best_plan, dir / "plan.json");
    std::cerr << "status " << evac::to_string(report.status) << ", objective "
              << evac::format_double(report.objective->value()) << "\n";
    return kExitOk;
  }
  if (report.status == evac::SolveStatus::Infeasible) {
    std::cerr << "no feasible plan exists\n";
    return kExitInfeasible;
  }
  std::cerr << "no incumbent within limits\n";
  return kExitNoIncumbent;
}

int run_seeded(const std::vector<uint64_t>& seeds_in, int jobs, const std::string& out_dir,
               const std::function<int(uint64_t, const fs::path&)>& one) {
  std::vector<uint64_t> seeds = seeds_in;
  if (seeds.empty()) seeds.push_back(0);
  if (seeds.size() == 1) return one(seeds[0], out_dir);
  // Independent seeds; --jobs parallelizes across them only.
  std::vector<int> codes(seeds.size(), kExitOk);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      const fs::path dir = fs::path(out_dir) / ("seed_" + std::to_string(seeds[i]));
      try {
        codes[i] = one(seeds[i], dir);
      } catch (const CliError& e) {
        std::cerr << e.what() << "\n";
        codes[i] = e.code;
      } catch (const evac::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        codes[i] = kExitInfeasible;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        codes[i] = 1;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  int rc = kExitOk;
  for (const int c : codes) rc = std::max(rc, c);
  return rc;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::string instance;
  std::string plan;
  std::string out_dir = "simrun";
  std::vector<uint64_t> seeds;
  int jobs = 1;
  std::string perturb;
  std::vector<std::string> failures;
  evac::Timestep max_time = -1;
};

int simulate_one(const SimulateOptions& opt, uint64_t seed, const fs::path& dir) {
  const auto net = load_valid_instance(opt.instance);
  const evac::EvacuationPlan plan = [&] {
    try {
      return evac::load_plan(net, opt.plan);
    } catch (const evac::ParseError& e) {
      throw CliError(kExitInvalidInput, std::string("plan error: ") + e.what());
    } catch (const evac::Error& e) {
      throw CliError(kExitInvalidInput, std::string("plan/instance mismatch: ") + e.what());
    }
  }();
  try {
    evac::require_valid_routes(net, plan.routes);
  } catch (const evac::Error& e) {
    throw CliError(kExitInvalidInput, std::string("plan/instance mismatch: ") + e.what());
  }

  std::vector<evac::EdgeFailure> failures;
  for (const std::string& f : opt.failures) failures.push_back(parse_failure(net, f));
  const evac::PerturbationModel model = parse_perturbation(opt.perturb, seed);
  const evac::Timestep max_time = opt.max_time >= 0 ? opt.max_time : 4 * net.horizon();

  std::cerr << "simulating " << opt.plan << " on " << opt.instance << " seed " << seed << "\n";
  const evac::SimResult result = evac::simulate(net, plan, model, failures, max_time);

  fs::create_directories(dir);
  evac::write_text_file(dir / "simresult.json", evac::sim_result_to_json(net, result));
  evac::write_text_file(dir / "events.csv", evac::events_to_csv(result));
  evac::write_text_file(dir / "rate.csv", evac::rate_curve_to_csv(result));
  Json manifest = Json::object();
  manifest["command"] = "simulate";
  manifest["instance"] = fs::absolute(opt.instance).string();
  manifest["plan"] = fs::absolute(opt.plan).string();
  manifest["seed"] = seed;
  manifest["perturb"] = opt.perturb.empty() ? "none" : opt.perturb;
  manifest["failures"] = opt.failures;
  manifest["max_time"] = max_time;
  manifest["outputs"] = Json::array({"simresult.json", "events.csv", "rate.csv"});
  write_manifest(dir, manifest);
  std::cerr << "arrived " << (result.agents.size() - static_cast<size_t>(result.unsuccessful))
            << "/" << result.agents.size() << ", completion " << result.completion_time << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportRow {
  std::string run;
  std::string kind;
  double average = 0;
  double completion = 0;
  double non_outlier = 0;
  int64_t total_time = 0;
  int64_t unsuccessful = 0;
  std::string status;
};

ReportRow report_solve_run(const fs::path& dir, const Json& manifest, double fraction) {
  ReportRow row;
  row.run = dir.string();
  row.kind = "solve";
  const auto net = load_valid_instance(manifest.at("instance").get<std::string>());
  const double p_out = net.objective().kind == evac::ObjectiveKind::OutlierAverage
                           ? net.objective().fraction
                           : fraction;
  if (!fs::exists(dir / "plan.json")) {
    throw CliError(kExitInvalidInput, dir.string() + ": missing plan.json");
  }
  const auto plan = evac::load_plan(net, dir / "plan.json");
  const evac::PlanMetrics m = evac::evaluate_plan(net, plan, p_out);
  row.average = m.average();
  row.completion = static_cast<double>(m.completion);
  row.non_outlier = m.outlier_average();
  row.total_time = m.total_time;
  const Json report = Json::parse(evac::read_text_file(dir / "report.json"));
  if (!report.contains("status")) {
    throw CliError(kExitInvalidInput, (dir / "report.json").string() + ": missing field status");
  }
  row.status = report.at("status").get<std::string>();
  return row;
}

ReportRow report_sim_run(const fs::path& dir, const Json& manifest, double fraction) {
  (void)manifest;
  ReportRow row;
  row.run = dir.string();
  row.kind = "simulate";
  if (!fs::exists(dir / "simresult.json")) {
    throw CliError(kExitInvalidInput, dir.string() + ": missing simresult.json");
  }
  const Json result = Json::parse(evac::read_text_file(dir / "simresult.json"));
  for (const char* field : {"agents", "completion_time", "unsuccessful"}) {
    if (!result.contains(field)) {
      throw CliError(kExitInvalidInput,
                     (dir / "simresult.json").string() + ": missing field " + field);
    }
  }
  std::vector<evac::Timestep> arrivals;
  for (const Json& a : result.at("agents")) {
    if (!a.at("arrival").is_null()) arrivals.push_back(a.at("arrival").get<evac::Timestep>());
  }
  std::sort(arrivals.begin(), arrivals.end());
  int64_t total = 0;
  for (const auto t : arrivals) total += t;
  row.total_time = total;
  row.average = arrivals.empty()
                    ? 0.0
                    : static_cast<double>(total) / static_cast<double>(arrivals.size());
  row.completion = result.at("completion_time").get<double>();
  const auto drop = static_cast<size_t>(
      std::floor((1.0 - fraction) * static_cast<double>(arrivals.size()) + 1e-9));
  int64_t kept = 0;
  for (size_t i = 0; i + drop < arrivals.size(); ++i) kept += arrivals[i];
  row.non_outlier = arrivals.size() > drop
                        ? static_cast<double>(kept) / static_cast<double>(arrivals.size() - drop)
                        : 0.0;
  row.unsuccessful = result.at("unsuccessful").get<int64_t>();
  row.status = "simulated";
  return row;
}

int run_report(const std::vector<std::string>& dirs, const std::string& format,
               const std::string& output, double fraction) {
  std::vector<ReportRow> rows;
  for (const std::string& d : dirs) {
    const fs::path dir(d);
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
      throw CliError(kExitInvalidInput, d + ": missing manifest.json");
    }
    const Json manifest = Json::parse(evac::read_text_file(manifest_path));
    const std::string command = manifest.at("command").get<std::string>();
    if (command == "solve") {
      rows.push_back(report_solve_run(dir, manifest, fraction));
    } else if (command == "simulate") {
      rows.push_back(report_sim_run(dir, manifest, fraction));
    } else {
      throw CliError(kExitInvalidInput, d + ": unknown manifest command '" + command + "'");
    }
  }

  auto stat_block = [&](const std::function<double(const ReportRow&)>& get) {
    std::vector<double> vals;
    for (const auto& r : rows) vals.push_back(get(r));
    const double best = *std::min_element(vals.begin(), vals.end());
    const double worst = *std::max_element(vals.begin(), vals.end());
    double mean = 0;
    for (const double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0;
    for (const double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vals.size());
    return std::array<double, 4>{best, worst, mean, std::sqrt(var)};
  };
  const std::array<std::pair<const char*, std::function<double(const ReportRow&)>>, 3> metrics{{
      {"average", [](const ReportRow& r) { return r.average; }},
      {"completion", [](const ReportRow& r) { return r.completion; }},
      {"non_outlier_average", [](const ReportRow& r) { return r.non_outlier; }},
  }};

  std::ostringstream os;
  if (format == "json") {
    Json doc = Json::object();
    doc["runs"] = Json::array();
    for (const auto& r : rows) {
      Json item = Json::object();
      item["run"] = r.run;
      item["kind"] = r.kind;
      item["average"] = r.average;
      item["completion"] = r.completion;
      item["non_outlier_average"] = r.non_outlier;
      item["total_evacuation_time"] = r.total_time;
      item["unsuccessful"] = r.unsuccessful;
      item["status"] = r.status;
      doc["runs"].push_back(std::move(item));
    }
    if (rows.size() > 1) {
      Json summary = Json::object();
      for (const auto& [name, get] : metrics) {
        const auto s = stat_block(get);
        Json block = Json::object();
        block["best"] = s[0];
        block["worst"] = s[1];
        block["mean"] = s[2];
        block["stddev"] = s[3];
        summary[name] = std::move(block);
      }
      doc["summary"] = std::move(summary);
    }
    os << doc.dump(2) << "\n";
  } else if (format == "csv") {
    os << "run,kind,average,completion,non_outlier_average,total_evacuation_time,"
          "unsuccessful,status\n";
    for (const auto& r : rows) {
      os << r.run << ',' << r.kind << ',' << evac::format_double(r.average) << ','
         << evac::format_double(r.completion) << ',' << evac::format_double(r.non_outlier) << ','
         << r.total_time << ',' << r.unsuccessful << ',' << r.status << '\n';
    }
    if (rows.size() > 1) {
      os << "\nmetric,best,worst,mean,stddev\n";
      for (const auto& [name, get] : metrics) {
        const auto s = stat_block(get);
        os << name << ',' << evac::format_double(s[0]) << ',' << evac::format_double(s[1]) << ','
           << evac::format_double(s[2]) << ',' << evac::format_double(s[3]) << '\n';
      }
    }
  } else {
    throw CliError(kExitInvalidInput, "unknown report format '" + format + "'");
  }
  if (output.empty() || output == "-") {
    std::cout << os.str();
  } else {
    evac::write_text_file(output, os.str());
    std::cerr << "wrote " << output << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evacuation route and schedule optimization"};
  app.require_subcommand(1);

  GenerateOptions gen;
  CLI::App* generate = app.add_subcommand("generate", "emit an instance file");
  generate->add_option("kind", gen.kind, "sample|grid|two-path-gadget|grid-gadget|random")
      ->required();
  generate->add_option("-o,--output", gen.output, "output instance path");
  generate->add_option("--seed", gen.seed, "generator seed");
  generate->add_option("--rows", gen.rows, "grid rows");
  generate->add_option("--cols", gen.cols, "grid cols");
  generate->add_option("--sources", gen.sources, "number of sources");
  generate->add_option("--max-nodes", gen.max_nodes, "random: max nodes");
  generate->add_option("--max-sources", gen.max_sources, "random: max sources");
  generate->add_option("--max-horizon", gen.max_horizon, "random: max horizon");
  generate->add_option("--objective", gen.objective, "average|completion|outlier");
  generate->add_option("--fraction", gen.fraction, "outlier kept fraction");
  generate->add_option("--fixture", gen.fixture, "gadget fixture name (yes1|no1)");
  generate->add_option("--M", gen.M, "gadget scale M");
  generate->add_option("--horizon-cap", gen.horizon_cap, "gadget horizon clip");

  SolveOptions sol;
  CLI::App* solve_cmd = app.add_subcommand("solve", "compute a plan");
  solve_cmd->add_option("instance", sol.instance, "instance file")->required();
  solve_cmd->add_option("--method", sol.method, "exact|lns");
  solve_cmd->add_option("--out", sol.out_dir, "output directory");
  solve_cmd->add_option("--seed", sol.seeds, "seed(s); several run independently");
  solve_cmd->add_option("--jobs", sol.jobs, "parallel independent seeds");
  solve_cmd->add_option("--workers", sol.workers, "parallel tree workers per solve");
  solve_cmd->add_option("--time-limit", sol.time_limit, "total wall budget (e.g. 10s)");
  solve_cmd->add_option("--gap", sol.threshold_gap, "relative gap threshold");
  solve_cmd->add_option("--iterations", sol.iterations, "lns iterations");
  solve_cmd->add_option("--p", sol.p, "lns initial free percentage");
  solve_cmd->add_option("--p-inc", sol.p_inc, "lns per-iteration p increment");
  solve_cmd->add_option("--shrink-threshold", sol.shrink_threshold,
                        "horizon shrink threshold (timesteps)");
  solve_cmd->add_flag("--no-shrink", sol.no_shrink, "disable horizon shrinking");
  solve_cmd->add_flag("--accept-worse", sol.accept_worse, "unconditional LNS acceptance");

  SimulateOptions sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "run the queue simulator on a plan");
  sim_cmd->add_option("instance", sim.instance, "instance file")->required();
  sim_cmd->add_option("plan", sim.plan, "plan file")->required();
  sim_cmd->add_option("--out", sim.out_dir, "output directory");
  sim_cmd->add_option("--seed", sim.seeds, "seed(s)");
  sim_cmd->add_option("--jobs", sim.jobs, "parallel independent seeds");
  sim_cmd->add_option("--perturb", sim.perturb, "normal:SIGMA or uniform:LO,HI");
  sim_cmd->add_option("--fail", sim.failures, "edge failure tail-head@t (repeatable)");
  sim_cmd->add_option("--max-time", sim.max_time, "simulation cutoff (default 4x horizon)");

  std::vector<std::string> report_dirs;
  std::string report_format = "csv";
  std::string report_output;
  double report_fraction = 0.9;
  CLI::App* report_cmd = app.add_subcommand("report", "aggregate run directories");
  report_cmd->add_option("dirs", report_dirs, "run directories")->required();
  report_cmd->add_option("--format", report_format, "csv|json");
  report_cmd->add_option("-o,--output", report_output, "output file (default stdout)");
  report_cmd->add_option("--fraction", report_fraction,
                         "kept fraction for the non-outlier metric");

  std::string dump_instance;
  std::string dump_output = "teg.csv";
  CLI::App* dump_cmd = app.add_subcommand("dump-teg", "debug CSV of the time-expanded graph");
  dump_cmd->add_option("instance", dump_instance, "instance file")->required();
  dump_cmd->add_option("-o,--output", dump_output, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalidInput;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*solve_cmd) {
      return run_seeded(sol.seeds, sol.jobs, sol.out_dir,
                        [&](uint64_t seed, const fs::path& dir) { return solve_one(sol, seed, dir); });
    }
    if (*sim_cmd) {
      return run_seeded(sim.seeds, sim.jobs, sim.out_dir, [&](uint64_t seed, const fs::path& dir) {
        return simulate_one(sim, seed, dir);
      });
    }
    if (*report_cmd) return run_report(report_dirs, report_format, report_output, report_fraction);
    if (*dump_cmd) {
      const auto net =
          std::make_shared<evac::EvacuationNetwork>(load_valid_instance(dump_instance));
      const auto teg = evac::build_variant_teg(net);
      std::ostringstream os;
      teg.dump_csv(os);
      evac::write_text_file(dump_output, os.str());
      std::cerr << "wrote " << dump_output << "\n";
      return kExitOk;
    }
  } catch (const CliError& e) {
    std::cerr << e.what() << "\n";
    return e.code;
  } catch (const evac::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const evac::InfeasibleAfterPruneError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const evac::HorizonTooSmallError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const evac::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}

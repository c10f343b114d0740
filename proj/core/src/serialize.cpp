#include "evac/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace evac {

namespace {
using Json = nlohmann::ordered_json;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string plan_to_json(const EvacuationNetwork& net, const EvacuationPlan& plan) {
  Json doc = Json::object();
  doc["routes"] = Json::array();
  for (const auto& [v, e] : plan.routes.successor) {
    Json item = Json::object();
    item["node"] = net.node(v).id;
    item["next"] = net.node(net.edge(e).head).id;
    doc["routes"].push_back(std::move(item));
  }
  doc["departures"] = Json::array();
  for (const auto& [key, count] : plan.schedule.departures) {
    Json item = Json::object();
    item["source"] = net.node(key.first).id;
    item["t"] = key.second;
    item["count"] = count;
    doc["departures"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

EvacuationPlan plan_from_json(const EvacuationNetwork& net, const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid plan JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("routes") || !doc.contains("departures")) {
    throw ParseError("plan: expected object with \"routes\" and \"departures\"");
  }
  EvacuationPlan plan;
  for (const Json& item : doc.at("routes")) {
    const std::string node = item.at("node").get<std::string>();
    const std::string next = item.at("next").get<std::string>();
    const auto v = net.find_node(node);
    const auto w = net.find_node(next);
    if (!v || !w) throw ParseError("plan route references unknown node '" + node + "'");
    EdgeIndex chosen = -1;
    for (EdgeIndex e : net.out_edges(*v)) {
      if (net.edge(e).head == *w) {
        chosen = e;
        break;  // parallel edges resolve to the lowest index
      }
    }
    if (chosen < 0) {
      throw ParseError("plan route uses missing edge (" + node + ", " + next + ")");
    }
    plan.routes.successor[*v] = chosen;
  }
  for (const Json& item : doc.at("departures")) {
    const std::string source = item.at("source").get<std::string>();
    const auto v = net.find_node(source);
    if (!v) throw ParseError("plan departure references unknown node '" + source + "'");
    const Timestep t = item.at("t").get<Timestep>();
    const int64_t count = item.at("count").get<int64_t>();
    plan.schedule.departures[{*v, t}] += count;
  }
  return plan;
}

void save_plan(const EvacuationNetwork& net, const EvacuationPlan& plan,
               const std::filesystem::path& path) {
  write_text_file(path, plan_to_json(net, plan));
}

EvacuationPlan load_plan(const EvacuationNetwork& net, const std::filesystem::path& path) {
  return plan_from_json(net, read_text_file(path));
}

std::string report_to_json(const SolveReport& report) {
  Json doc = Json::object();
  doc["status"] = to_string(report.status);
  if (std::isinf(report.upper_bound)) {
    doc["upper_bound"] = nullptr;
  } else {
    doc["upper_bound"] = report.upper_bound;
  }
  if (std::isinf(report.lower_bound)) {
    doc["lower_bound"] = nullptr;
  } else {
    doc["lower_bound"] = report.lower_bound;
  }
  doc["gap"] = report.gap;
  doc["nodes_explored"] = report.nodes_explored;
  if (report.objective) {
    Json obj = Json::object();
    switch (report.objective->kind) {
      case ObjectiveKind::Average: obj["kind"] = "average"; break;
      case ObjectiveKind::CompletionTime: obj["kind"] = "completion"; break;
      case ObjectiveKind::OutlierAverage: obj["kind"] = "outlier"; break;
    }
    obj["numerator"] = report.objective->numerator;
    obj["denominator"] = report.objective->denominator;
    obj["value"] = report.objective->value();
    doc["objective"] = std::move(obj);
  } else {
    doc["objective"] = nullptr;
  }
  return doc.dump(2) + "\n";
}

std::string bound_trace_to_csv(const SolveReport& report) {
  std::ostringstream os;
  os << "wall_ms,Z_U,Z_L,gap\n";
  for (const BoundTracePoint& p : report.trace) {
    os << p.wall_ms << ',' << format_double(p.upper_bound) << ','
       << format_double(p.lower_bound) << ',' << format_double(p.gap) << '\n';
  }
  return os.str();
}

std::string lns_trace_to_csv(const LnsTrace& trace) {
  std::ostringstream os;
  os << "iter,objective,completion,horizon,p,status\n";
  for (const LnsIterationRecord& r : trace.rows) {
    os << r.iteration << ',' << format_double(r.objective) << ',' << r.completion << ','
       << r.horizon << ',' << format_double(r.p) << ',' << r.inner_status << '\n';
  }
  return os.str();
}

std::string sim_result_to_json(const EvacuationNetwork& net, const SimResult& result) {
  Json doc = Json::object();
  doc["arrived"] = static_cast<int64_t>(result.agents.size()) - result.unsuccessful;
  doc["unsuccessful"] = result.unsuccessful;
  doc["total_evacuation_time"] = result.total_evacuation_time;
  doc["completion_time"] = result.completion_time;
  doc["agents"] = Json::array();
  for (const AgentOutcome& a : result.agents) {
    Json item = Json::object();
    item["agent"] = a.agent;
    item["source"] = net.node(a.source).id;
    item["prescribed"] = a.prescribed;
    item["actual"] = a.actual;
    item["arrival"] = a.arrival ? Json(*a.arrival) : Json(nullptr);
    doc["agents"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

std::string events_to_csv(const SimResult& result) {
  std::ostringstream os;
  os << "t,agent,event,location\n";
  for (const SimEvent& e : result.events) {
    os << e.t << ',' << e.agent << ',' << to_string(e.type) << ',' << e.location << '\n';
  }
  return os.str();
}

std::string rate_curve_to_csv(const SimResult& result) {
  std::ostringstream os;
  os << "t,cumulative_arrived\n";
  for (size_t t = 0; t < result.rate_curve.size(); ++t) {
    os << t << ',' << result.rate_curve[t] << '\n';
  }
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace evac

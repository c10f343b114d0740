#include "evac/instance_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace evac {

namespace {

using Json = nlohmann::ordered_json;

void require_keys(const Json& obj, const std::string& where,
                  const std::set<std::string>& required,
                  const std::set<std::string>& optional = {}) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    if (!required.count(item.key()) && !optional.count(item.key())) {
      throw ParseError(where + ": unknown key \"" + item.key() + "\"");
    }
  }
  for (const auto& key : required) {
    if (!obj.contains(key)) throw ParseError(where + ": missing key \"" + key + "\"");
  }
}

int64_t get_int(const Json& obj, const std::string& where, const std::string& key) {
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) throw ParseError(where + "." + key + ": expected an integer");
  return v.get<int64_t>();
}

std::string get_string(const Json& obj, const std::string& where, const std::string& key) {
  const Json& v = obj.at(key);
  if (!v.is_string()) throw ParseError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

NodeKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "source") return NodeKind::Source;
  if (s == "transit") return NodeKind::Transit;
  if (s == "safe") return NodeKind::Safe;
  throw ParseError(where + ".kind: unknown node kind \"" + s + "\"");
}

const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Source: return "source";
    case NodeKind::Transit: return "transit";
    case NodeKind::Safe: return "safe";
  }
  return "transit";
}

}  // namespace

EvacuationNetwork instance_from_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  require_keys(doc, "instance", {"nodes", "edges", "horizon", "objective"}, {"metadata"});

  NetworkBuilder builder;
  const Json& nodes = doc.at("nodes");
  if (!nodes.is_array()) throw ParseError("nodes: expected an array");
  for (size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const Json& n = nodes[i];
    require_keys(n, where, {"id", "kind"}, {"demand"});
    const std::string id = get_string(n, where, "id");
    const NodeKind kind = parse_kind(get_string(n, where, "kind"), where);
    const int64_t demand = n.contains("demand") ? get_int(n, where, "demand") : 0;
    builder.node(id, kind, demand);
  }

  const Json& edges = doc.at("edges");
  if (!edges.is_array()) throw ParseError("edges: expected an array");
  for (size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "edges[" + std::to_string(i) + "]";
    const Json& e = edges[i];
    require_keys(e, where, {"tail", "head", "travel_time", "capacity"}, {"deadline"});
    std::optional<Timestep> deadline;
    if (e.contains("deadline") && !e.at("deadline").is_null()) {
      deadline = static_cast<Timestep>(get_int(e, where, "deadline"));
    }
    builder.edge(get_string(e, where, "tail"), get_string(e, where, "head"),
                 static_cast<Timestep>(get_int(e, where, "travel_time")),
                 get_int(e, where, "capacity"), deadline);
  }

  builder.horizon(static_cast<Timestep>(get_int(doc, "instance", "horizon")));

  const Json& obj = doc.at("objective");
  const std::string type = get_string(obj, "objective", "type");
  if (type == "average") {
    require_keys(obj, "objective", {"type"});
    builder.objective(ObjectiveSpec::average());
  } else if (type == "completion") {
    require_keys(obj, "objective", {"type"});
    builder.objective(ObjectiveSpec::completion());
  } else if (type == "outlier") {
    require_keys(obj, "objective", {"type", "fraction"});
    const Json& f = obj.at("fraction");
    if (!f.is_number()) throw ParseError("objective.fraction: expected a number");
    builder.objective(ObjectiveSpec::outlier(f.get<double>()));
  } else {
    throw ParseError("objective.type: unknown objective \"" + type + "\"");
  }

  if (doc.contains("metadata")) builder.metadata(doc.at("metadata").dump());
  return builder.build();
}

std::string instance_to_json(const EvacuationNetwork& net) {
  Json doc = Json::object();
  doc["nodes"] = Json::array();
  for (const Node& n : net.nodes()) {
    Json item = Json::object();
    item["id"] = n.id;
    item["kind"] = kind_name(n.kind);
    item["demand"] = n.demand;
    doc["nodes"].push_back(std::move(item));
  }
  doc["edges"] = Json::array();
  for (const Edge& e : net.edges()) {
    Json item = Json::object();
    item["tail"] = net.node(e.tail).id;
    item["head"] = net.node(e.head).id;
    item["travel_time"] = e.travel_time;
    item["capacity"] = e.capacity;
    item["deadline"] = e.deadline ? Json(*e.deadline) : Json(nullptr);
    doc["edges"].push_back(std::move(item));
  }
  doc["horizon"] = net.horizon();
  Json obj = Json::object();
  switch (net.objective().kind) {
    case ObjectiveKind::Average: obj["type"] = "average"; break;
    case ObjectiveKind::CompletionTime: obj["type"] = "completion"; break;
    case ObjectiveKind::OutlierAverage:
      obj["type"] = "outlier";
      obj["fraction"] = net.objective().fraction;
      break;
  }
  doc["objective"] = std::move(obj);
  if (!net.metadata_json().empty()) doc["metadata"] = Json::parse(net.metadata_json());
  return doc.dump(2) + "\n";
}

EvacuationNetwork load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

void save_instance(const EvacuationNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write instance file " + path.string());
  out << instance_to_json(net);
}

}  // namespace evac

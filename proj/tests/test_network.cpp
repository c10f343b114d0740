#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "evac/generators.hpp"
#include "evac/instance_io.hpp"
#include "evac/network.hpp"
#include "test_util.hpp"

using namespace evac;

namespace {

EvacuationNetwork with_horizon(const EvacuationNetwork& net, Timestep h) {
  return EvacuationNetwork(net.nodes(), net.edges(), h, net.objective(), net.metadata_json());
}

bool has_violation(const std::vector<std::string>& violations, const std::string& needle) {
  for (const auto& v : violations) {
    if (v.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("sample network is valid") {
  const auto net = sample_network();
  CHECK(validate(net).empty());
  CHECK(net.total_demand() == 2);
  CHECK(net.sources().size() == 2);
  CHECK(net.safe_nodes().size() == 1);
}

TEST_CASE("validate flags demand on non-source") {
  NetworkBuilder b;
  b.node("0", NodeKind::Source, 1);
  b.node("1", NodeKind::Source, 1);
  b.node("2", NodeKind::Transit, 1);  // misplaced demand
  b.node("A", NodeKind::Safe);
  b.edge("0", "2", 1, 1);
  b.edge("1", "2", 1, 1);
  b.edge("2", "A", 1, 1);
  b.horizon(3);
  const auto violations = validate(b.build());
  REQUIRE(violations.size() == 1);
  CHECK(has_violation(violations, "demand on non-source"));
}

TEST_CASE("validate flags unreachable safety within horizon") {
  // Shortest route from either source needs 2 timesteps; H=1 fails.
  const auto net = with_horizon(sample_network(), 1);
  const auto violations = validate(net);
  CHECK(has_violation(violations, "cannot reach any safe node within horizon"));
  CHECK(has_violation(violations, "source '0'"));
}

TEST_CASE("validate catches structural defects") {
  NetworkBuilder b;
  b.node("s", NodeKind::Source, 2);
  b.node("f", NodeKind::Safe);
  b.node("lonely", NodeKind::Source, 1);
  b.edge("s", "f", 1, 1);
  b.edge("f", "s", 1, 1);  // safe node with outgoing edge
  b.horizon(3);
  const auto violations = validate(b.build());
  CHECK(has_violation(violations, "safe node 'f' has outgoing edges"));
  CHECK(has_violation(violations, "source 'lonely' has no outgoing edge"));
}

TEST_CASE("validate is idempotent and side-effect free") {
  const auto net = sample_network();
  const auto first = validate(net);
  const auto second = validate(net);
  CHECK(first == second);
}

TEST_CASE("shortest route on the sample network") {
  const auto net = sample_network();
  const Route r = shortest_route_to_safety(net, *net.find_node("0"));
  REQUIRE(r.nodes.size() == 3);
  CHECK(net.node(r.nodes[0]).id == "0");
  CHECK(net.node(r.nodes[1]).id == "2");
  CHECK(net.node(r.nodes[2]).id == "A");
  CHECK(r.travel_time == 2);
}

TEST_CASE("shortest route: single edge to safety") {
  NetworkBuilder b;
  b.node("s", NodeKind::Source, 1);
  b.node("f", NodeKind::Safe);
  b.edge("s", "f", 2, 1);
  b.horizon(2);
  const auto net = b.build();
  const Route r = shortest_route_to_safety(net, 0);
  CHECK(r.edges.size() == 1);
  CHECK(r.travel_time == 2);
}

TEST_CASE("shortest route throws NoRoute") {
  NetworkBuilder b;
  b.node("s", NodeKind::Source, 1);
  b.node("m", NodeKind::Transit);
  b.node("f", NodeKind::Safe);
  b.edge("s", "m", 1, 1);
  b.horizon(2);
  const auto net = b.build();
  CHECK_THROWS_AS(shortest_route_to_safety(net, 0), NoRouteError);
}

TEST_CASE("shortest route tie-break on a grid with two equidistant safes") {
  // Random 4x4 grids; the winner is checked against exhaustive simple-path
  // enumeration under the (time, edges, id-sequence) order.
  const auto net = grid_network(4, 4, 2, /*seed=*/11);
  for (NodeIndex k : net.sources()) {
    const Route got = shortest_route_to_safety(net, k);
    const auto paths = evac::testing::all_paths_to_safety(net, k);
    REQUIRE(!paths.empty());
    int64_t best_time = std::numeric_limits<int64_t>::max();
    for (const auto& [nodes, time] : paths) best_time = std::min(best_time, time);
    CHECK(got.travel_time == best_time);
    std::optional<std::pair<size_t, std::vector<std::string>>> expect;
    for (const auto& [nodes, time] : paths) {
      if (time != best_time) continue;
      std::vector<std::string> ids;
      for (NodeIndex v : nodes) ids.push_back(net.node(v).id);
      std::pair<size_t, std::vector<std::string>> cand{nodes.size(), ids};
      if (!expect || cand < *expect) expect = cand;
    }
    std::vector<std::string> got_ids;
    for (NodeIndex v : got.nodes) got_ids.push_back(net.node(v).id);
    CHECK(got_ids == expect->second);
  }
}

TEST_CASE("shortest route distances match the label-correcting oracle") {
  for (uint64_t seed = 1; seed <= 25; ++seed) {
    const auto net = random_network(seed);
    const auto oracle = evac::testing::distance_to_safety_oracle(net);
    for (NodeIndex k : net.sources()) {
      const Route r = shortest_route_to_safety(net, k);
      CHECK(r.travel_time == oracle[static_cast<size_t>(k)]);
    }
  }
}

TEST_CASE("instance io round trip") {
  const auto net = sample_network();
  const std::string text = instance_to_json(net);
  const auto back = instance_from_json(text);
  CHECK(instance_to_json(back) == text);
  CHECK(back.num_nodes() == net.num_nodes());
  CHECK(back.num_edges() == net.num_edges());
  CHECK(back.horizon() == net.horizon());
}

TEST_CASE("instance io preserves deadlines and metadata over a corpus") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    auto net = random_network(seed);
    // Stamp a deadline onto the first edge to exercise the optional field.
    auto edges = net.edges();
    edges[0].deadline = net.horizon() - 1;
    const EvacuationNetwork with_deadline(net.nodes(), edges, net.horizon(), net.objective(),
                                          "{\"seed\":" + std::to_string(seed) + "}");
    const std::string text = instance_to_json(with_deadline);
    const auto back = instance_from_json(text);
    CHECK(instance_to_json(back) == text);
    REQUIRE(back.edge(0).deadline.has_value());
    CHECK(*back.edge(0).deadline == net.horizon() - 1);
    CHECK(back.metadata_json() == with_deadline.metadata_json());
  }
}

TEST_CASE("unknown node kind is a parse error naming the field") {
  const std::string text = R"({
    "nodes": [{"id": "0", "kind": "harbor", "demand": 1}],
    "edges": [],
    "horizon": 3,
    "objective": {"type": "average"}
  })";
  CHECK_THROWS_WITH_AS(instance_from_json(text),
                       doctest::Contains("unknown node kind \"harbor\""), ParseError);
}

TEST_CASE("unknown keys are rejected") {
  const std::string text = R"({
    "nodes": [{"id": "0", "kind": "source", "demand": 1, "risk": 2}],
    "edges": [],
    "horizon": 3,
    "objective": {"type": "average"}
  })";
  CHECK_THROWS_WITH_AS(instance_from_json(text), doctest::Contains("unknown key"), ParseError);
}

TEST_CASE("objective fraction only for outlier") {
  const std::string text = R"({
    "nodes": [],
    "edges": [],
    "horizon": 3,
    "objective": {"type": "average", "fraction": 0.5}
  })";
  CHECK_THROWS_AS(instance_from_json(text), ParseError);
  const std::string outlier = R"({
    "nodes": [],
    "edges": [],
    "horizon": 3,
    "objective": {"type": "outlier", "fraction": 0.5}
  })";
  const auto net = instance_from_json(outlier);
  CHECK(net.objective().kind == ObjectiveKind::OutlierAverage);
  CHECK(net.objective().fraction == doctest::Approx(0.5));
}

TEST_CASE("file round trip via load/save") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "evac_test_io";
  fs::create_directories(dir);
  const fs::path path = dir / "sample.json";
  save_instance(sample_network(), path);
  const auto net = load_instance(path);
  CHECK(net.num_nodes() == 4);
  fs::remove_all(dir);
}

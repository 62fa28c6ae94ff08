#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sdwan/model.h"

using namespace sdwan;

namespace {

Topology two_hub_three_spoke() {
  Topology topo;
  topo.nodes = {{"h1", NodeRole::Hub},
                {"h2", NodeRole::Hub},
                {"s1", NodeRole::Spoke},
                {"s2", NodeRole::Spoke},
                {"s3", NodeRole::Spoke}};
  for (const char* hub : {"h1", "h2"})
    for (const char* spoke : {"s1", "s2", "s3"})
      topo.links.push_back({std::string("mstp.") + hub + "." + spoke, hub, spoke,
                            6.0, 10.0, LinkKind::Mstp});
  for (int si = 0; si < 3; ++si) {
    const std::string hub = si % 2 == 0 ? "h1" : "h2";
    const std::string spoke = std::string("s") + std::to_string(si + 1);
    topo.links.push_back({"mv." + hub + "." + spoke, hub, spoke, 12.0, 15.0,
                          LinkKind::Mv});
  }
  topo.links.push_back({"man.h1.h2", "h1", "h2", 24.0, 5.0, LinkKind::Man});
  return topo;
}

}  // namespace

TEST_CASE("validate_topology accepts the hub/spoke mix") {
  CHECK(validate_topology(two_hub_three_spoke()).empty());
}

TEST_CASE("validate_topology flags a zero-capacity link") {
  Topology topo = two_hub_three_spoke();
  topo.links[0].capacity_mbps = 0.0;
  const auto violations = validate_topology(topo);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find(topo.links[0].id) != std::string::npos);
  CHECK(violations[0].find("capacity") != std::string::npos);
}

TEST_CASE("validate_topology flags a dangling endpoint") {
  Topology topo = two_hub_three_spoke();
  topo.links[2].dst = "h9";
  const auto violations = validate_topology(topo);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("h9") != std::string::npos);
}

TEST_CASE("validate_topology reports negative delay and duplicates") {
  Topology topo = two_hub_three_spoke();
  topo.links[0].prop_delay_ms = -1.0;
  topo.links.push_back(topo.links[1]);
  const auto violations = validate_topology(topo);
  CHECK(violations.size() == 2);
}

TEST_CASE("index_links is dense, sorted and bijective") {
  Topology topo;
  topo.nodes = {{"a", NodeRole::Hub}, {"b", NodeRole::Spoke}};

  SUBCASE("simple ids") {
    topo.links = {{"a", "a", "b", 1.0, 0.0, LinkKind::Mstp},
                  {"b", "a", "b", 1.0, 0.0, LinkKind::Mstp},
                  {"c", "a", "b", 1.0, 0.0, LinkKind::Mstp}};
    const auto index = index_links(topo);
    CHECK(index.at("a") == 0);
    CHECK(index.at("b") == 1);
    CHECK(index.at("c") == 2);
  }

  SUBCASE("empty topology") { CHECK(index_links(Topology{}).empty()); }

  SUBCASE("ordering is lexicographic, not numeric") {
    topo.links = {{"L2", "a", "b", 1.0, 0.0, LinkKind::Mstp},
                  {"L10", "a", "b", 1.0, 0.0, LinkKind::Mstp},
                  {"L1", "a", "b", 1.0, 0.0, LinkKind::Mstp}};
    const auto index = index_links(topo);
    CHECK(index.at("L1") == 0);
    CHECK(index.at("L10") == 1);
    CHECK(index.at("L2") == 2);
  }

  SUBCASE("duplicate ids throw") {
    topo.links = {{"a", "a", "b", 1.0, 0.0, LinkKind::Mstp},
                  {"a", "a", "b", 1.0, 0.0, LinkKind::Mstp}};
    CHECK_THROWS_AS(index_links(topo), std::invalid_argument);
  }

  SUBCASE("stable across repeated calls") {
    topo.links = {{"x", "a", "b", 1.0, 0.0, LinkKind::Mstp},
                  {"m", "a", "b", 1.0, 0.0, LinkKind::Mstp}};
    CHECK(index_links(topo) == index_links(topo));
  }
}

TEST_CASE("flow group route lookup") {
  FlowGroup g;
  g.id = "office.s1";
  g.routes = {{"mstp.h1.s1", std::nullopt}, {"man.h1.h2", std::string("mstp.h2.s1")}};
  CHECK(g.allowed_links() == std::vector<std::string>{"mstp.h1.s1", "man.h1.h2"});
  REQUIRE(g.route_for("man.h1.h2") != nullptr);
  CHECK(g.route_for("man.h1.h2")->is_relay());
  CHECK(g.route_for("nope") == nullptr);
}

TEST_CASE("enum string round trips") {
  for (LinkKind k : {LinkKind::Mstp, LinkKind::Mv, LinkKind::Man})
    CHECK(link_kind_from_string(to_string(k)) == k);
  for (Tier t : {Tier::Strict, Tier::Weighted})
    CHECK(tier_from_string(to_string(t)) == t);
  for (NodeRole r : {NodeRole::Hub, NodeRole::Spoke})
    CHECK(node_role_from_string(to_string(r)) == r);
  CHECK(!link_kind_from_string("frame-relay").has_value());
}

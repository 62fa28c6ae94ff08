#include "sdwan/scenario.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sdwan {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError("scenario: " + where + ": " + what);
}

const Json& member(const Json& obj, const std::string& where, const char* key) {
  if (!obj.is_object()) fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& obj, const std::string& where, const char* key) {
  const Json& v = member(obj, where, key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

double number_or(const Json& obj, const char* key, double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return it->get<double>();
}

std::string text(const Json& obj, const std::string& where, const char* key) {
  const Json& v = member(obj, where, key);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

Topology parse_topology(const Json& j) {
  Topology topo;
  for (const auto& jn : member(j, "topology", "nodes")) {
    Node n;
    n.id = text(jn, "node", "id");
    const auto role = node_role_from_string(text(jn, "node", "role"));
    if (!role) fail("node '" + n.id + "'", "role must be hub or spoke");
    n.role = *role;
    topo.nodes.push_back(std::move(n));
  }
  for (const auto& jl : member(j, "topology", "links")) {
    OverlayLink l;
    l.id = text(jl, "link", "id");
    l.src = text(jl, "link '" + l.id + "'", "src");
    l.dst = text(jl, "link '" + l.id + "'", "dst");
    l.capacity_mbps = number(jl, "link '" + l.id + "'", "capacity_mbps");
    l.prop_delay_ms = number(jl, "link '" + l.id + "'", "prop_delay_ms");
    const auto kind = link_kind_from_string(text(jl, "link '" + l.id + "'", "kind"));
    if (!kind) fail("link '" + l.id + "'", "kind must be mstp, mv or man");
    l.kind = *kind;
    topo.links.push_back(std::move(l));
  }
  return topo;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ScenarioError(std::string("scenario: JSON parse error: ") + e.what());
  }

  Scenario s;
  s.schema_version = static_cast<int>(number(j, "scenario", "schema_version"));
  if (s.schema_version != 1)
    fail("scenario", "unsupported schema_version " + std::to_string(s.schema_version));
  s.name = text(j, "scenario", "name");
  s.topology = parse_topology(member(j, "scenario", "topology"));

  for (const auto& jc : member(j, "scenario", "classes")) {
    ClassSpec c;
    c.name = text(jc, "class", "name");
    c.max_e2e_delay_ms = number(jc, "class '" + c.name + "'", "max_e2e_delay_ms");
    const auto tier = tier_from_string(text(jc, "class '" + c.name + "'", "tier"));
    if (!tier) fail("class '" + c.name + "'", "tier must be strict or weighted");
    c.tier = *tier;
    c.strict_rank = static_cast<int>(number_or(jc, "strict_rank", -1.0));
    s.classes.push_back(std::move(c));
  }

  for (const auto& jg : member(j, "scenario", "flow_groups")) {
    FlowGroup g;
    g.id = text(jg, "flow_group", "id");
    const std::string where = "flow_group '" + g.id + "'";
    g.klass = text(jg, where, "class");
    g.src = text(jg, where, "src");
    g.dst = text(jg, where, "dst");
    const auto cls = std::find_if(s.classes.begin(), s.classes.end(),
                                  [&](const ClassSpec& c) { return c.name == g.klass; });
    if (cls == s.classes.end()) fail(where, "unknown class '" + g.klass + "'");
    g.sla.max_e2e_delay_ms = cls->max_e2e_delay_ms;
    g.tier = cls->tier;
    g.strict_rank = cls->strict_rank;
    for (const auto& jr : member(jg, where, "routes")) {
      RouteOption r;
      r.entry_link = text(jr, where + ".route", "entry");
      if (jr.contains("continuation"))
        r.continuation = jr.at("continuation").get<std::string>();
      g.routes.push_back(std::move(r));
    }
    g.demand_mbps = number_or(jg, "demand_mbps", 0.0);
    s.groups.push_back(std::move(g));
  }

  if (j.contains("traffic")) {
    for (const auto& [group, jt] : j.at("traffic").items()) {
      DiurnalSpec d;
      d.base_rate_mbps = number(jt, "traffic '" + group + "'", "base_rate_mbps");
      d.diurnal_amplitude = number_or(jt, "diurnal_amplitude", 0.0);
      d.diurnal_period_s = number_or(jt, "diurnal_period_s", 86400.0);
      d.noise_std = number_or(jt, "noise_std", 0.0);
      s.traffic.per_group[group] = d;
    }
  }

  if (j.contains("delay_model")) {
    const Json& jd = j.at("delay_model");
    const std::string variant = jd.contains("variant") ? jd.at("variant").get<std::string>() : "mm1";
    if (variant != "mm1") fail("delay_model", "unknown variant '" + variant + "'");
    s.delay_model.variant = DelayModelSpec::Variant::MM1;
    s.delay_model.mean_packet_bits = number_or(jd, "mean_packet_bits", 12000.0);
  }

  if (j.contains("sim")) {
    const Json& js = j.at("sim");
    s.sim.tick_s = number_or(js, "tick_s", 0.1);
    s.sim.measurement_period_s = number_or(js, "measurement_period_s", 1.0);
    s.sim.buffer_limit_mbit = number_or(js, "buffer_limit_mbit", 0.25);
    s.sim.horizon_s = number_or(js, "horizon_s", 600.0);
    s.sim.seed = static_cast<std::uint64_t>(number_or(js, "seed", 0.0));
  }

  if (j.contains("control")) {
    const Json& jc = j.at("control");
    s.control.spr_period_s = number_or(jc, "spr_period_s", 50.0);
    s.control.qos_period_s = number_or(jc, "qos_period_s", 10.0);
    s.control.demand_ewma_alpha = number_or(jc, "demand_ewma_alpha", 0.3);
    if (jc.contains("mode")) {
      const auto mode = policy_mode_from_string(jc.at("mode").get<std::string>());
      if (!mode) fail("control", "mode must be all-tns, mlu or mlu-qos");
      s.control.mode = *mode;
    }
  }

  return s;
}

std::string scenario_to_json(const Scenario& s) {
  Json j;
  j["schema_version"] = s.schema_version;
  j["name"] = s.name;

  Json nodes = Json::array();
  for (const auto& n : s.topology.nodes)
    nodes.push_back({{"id", n.id}, {"role", to_string(n.role)}});
  Json links = Json::array();
  for (const auto& l : s.topology.links)
    links.push_back({{"id", l.id},
                     {"src", l.src},
                     {"dst", l.dst},
                     {"capacity_mbps", l.capacity_mbps},
                     {"prop_delay_ms", l.prop_delay_ms},
                     {"kind", to_string(l.kind)}});
  j["topology"] = {{"nodes", nodes}, {"links", links}};

  Json classes = Json::array();
  for (const auto& c : s.classes) {
    Json jc = {{"name", c.name},
               {"max_e2e_delay_ms", c.max_e2e_delay_ms},
               {"tier", to_string(c.tier)}};
    if (c.tier == Tier::Strict) jc["strict_rank"] = c.strict_rank;
    classes.push_back(std::move(jc));
  }
  j["classes"] = classes;

  Json groups = Json::array();
  for (const auto& g : s.groups) {
    Json routes = Json::array();
    for (const auto& r : g.routes) {
      Json jr = {{"entry", r.entry_link}};
      if (r.continuation) jr["continuation"] = *r.continuation;
      routes.push_back(std::move(jr));
    }
    Json jg = {{"id", g.id}, {"class", g.klass}, {"src", g.src},
               {"dst", g.dst}, {"routes", routes}};
    if (g.demand_mbps != 0.0) jg["demand_mbps"] = g.demand_mbps;
    groups.push_back(std::move(jg));
  }
  j["flow_groups"] = groups;

  Json traffic = Json::object();
  for (const auto& [group, d] : s.traffic.per_group)
    traffic[group] = {{"base_rate_mbps", d.base_rate_mbps},
                      {"diurnal_amplitude", d.diurnal_amplitude},
                      {"diurnal_period_s", d.diurnal_period_s},
                      {"noise_std", d.noise_std}};
  j["traffic"] = traffic;

  j["delay_model"] = {{"variant", "mm1"},
                      {"mean_packet_bits", s.delay_model.mean_packet_bits}};
  j["sim"] = {{"tick_s", s.sim.tick_s},
              {"measurement_period_s", s.sim.measurement_period_s},
              {"buffer_limit_mbit", s.sim.buffer_limit_mbit},
              {"horizon_s", s.sim.horizon_s},
              {"seed", s.sim.seed}};
  j["control"] = {{"spr_period_s", s.control.spr_period_s},
                  {"qos_period_s", s.control.qos_period_s},
                  {"mode", to_string(s.control.mode)},
                  {"demand_ewma_alpha", s.control.demand_ewma_alpha}};
  return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path_or_builtin) {
  if (path_or_builtin.rfind("builtin:", 0) == 0) {
    const std::string name = path_or_builtin.substr(8);
    if (name == "mstp_only") return builtin_mstp_only();
    if (name == "sdwan_mix") return builtin_sdwan_mix();
    throw ScenarioError("scenario: unknown builtin '" + name + "'");
  }
  std::ifstream in(path_or_builtin, std::ios::binary);
  if (!in)
    throw std::ios_base::failure("scenario: cannot open '" + path_or_builtin + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str());
  const auto violations = validate_scenario(s);
  if (!violations.empty()) {
    std::string msg = "scenario: '" + path_or_builtin + "' is not runnable:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw ScenarioError(msg);
  }
  return s;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> out = validate_topology(s.topology);

  std::set<std::string> class_names;
  for (const auto& c : s.classes) {
    if (!class_names.insert(c.name).second)
      out.push_back("duplicate class '" + c.name + "'");
    if (!(c.max_e2e_delay_ms > 0.0))
      out.push_back("class '" + c.name + "' needs a positive delay bound");
    if (c.tier == Tier::Strict && (c.strict_rank < 0 || c.strict_rank > 3))
      out.push_back("class '" + c.name + "' strict rank must be in 0..3");
  }

  std::set<std::string> group_ids;
  for (const auto& g : s.groups) {
    const std::string where = "flow group '" + g.id + "'";
    if (!group_ids.insert(g.id).second) out.push_back("duplicate " + where);
    if (!class_names.count(g.klass))
      out.push_back(where + " references unknown class '" + g.klass + "'");
    const Node* src = s.topology.find_node(g.src);
    const Node* dst = s.topology.find_node(g.dst);
    if (!src || src->role != NodeRole::Hub)
      out.push_back(where + " src '" + g.src + "' is not a hub");
    if (!dst || dst->role != NodeRole::Spoke)
      out.push_back(where + " dst '" + g.dst + "' is not a spoke");
    if (g.routes.empty()) out.push_back(where + " has no candidate route");
    if (g.demand_mbps < 0.0) out.push_back(where + " has negative demand");

    std::set<std::string> entries, continuations;
    for (const auto& r : g.routes) {
      if (!entries.insert(r.entry_link).second)
        out.push_back(where + " lists entry '" + r.entry_link + "' twice");
      const OverlayLink* entry = s.topology.find_link(r.entry_link);
      if (!entry) {
        out.push_back(where + " route entry '" + r.entry_link + "' does not exist");
        continue;
      }
      if (entry->src != g.src)
        out.push_back(where + " entry '" + r.entry_link + "' does not leave " + g.src);
      if (!r.continuation) {
        if (entry->dst != g.dst)
          out.push_back(where + " direct entry '" + r.entry_link +
                        "' does not reach " + g.dst);
        continue;
      }
      continuations.insert(*r.continuation);
      const OverlayLink* cont = s.topology.find_link(*r.continuation);
      if (!cont) {
        out.push_back(where + " continuation '" + *r.continuation + "' does not exist");
        continue;
      }
      const Node* mid = s.topology.find_node(entry->dst);
      if (!mid || mid->role != NodeRole::Hub)
        out.push_back(where + " relay entry '" + r.entry_link +
                      "' must end at a hub");
      if (cont->src != entry->dst || cont->dst != g.dst)
        out.push_back(where + " continuation '" + *r.continuation +
                      "' does not bridge " + entry->dst + " to " + g.dst);
    }
    for (const auto& e : entries)
      if (continuations.count(e))
        out.push_back(where + " uses '" + e + "' as both entry and continuation");
  }

  for (const auto& [group, d] : s.traffic.per_group) {
    if (!group_ids.count(group))
      out.push_back("traffic stream references unknown flow group '" + group + "'");
    if (d.base_rate_mbps < 0.0)
      out.push_back("traffic for '" + group + "' has negative base rate");
    if (d.diurnal_amplitude < 0.0 || d.diurnal_amplitude >= 1.0)
      out.push_back("traffic for '" + group + "' amplitude must be in [0, 1)");
    if (d.diurnal_amplitude > 0.0 && d.diurnal_period_s <= 0.0)
      out.push_back("traffic for '" + group + "' needs a positive diurnal period");
    if (d.noise_std < 0.0)
      out.push_back("traffic for '" + group + "' has negative noise");
  }

  if (!(s.delay_model.mean_packet_bits > 0.0))
    out.push_back("delay model needs positive mean packet size");

  if (!(s.sim.tick_s > 0.0) || !(s.sim.measurement_period_s > 0.0) ||
      !(s.sim.horizon_s > 0.0) || !(s.sim.buffer_limit_mbit > 0.0)) {
    out.push_back("sim parameters must be positive");
  } else {
    const double r = s.sim.measurement_period_s / s.sim.tick_s;
    if (std::abs(r - std::round(r)) > 1e-9)
      out.push_back("tick does not divide the measurement period");
  }

  auto is_multiple = [](double a, double b) {
    if (b <= 0.0) return false;
    const double r = a / b;
    return std::abs(r - std::round(r)) < 1e-9;
  };
  if (!is_multiple(s.control.spr_period_s, s.control.qos_period_s))
    out.push_back("qos period does not divide the spr period");
  if (!is_multiple(s.control.qos_period_s, s.sim.measurement_period_s) ||
      !is_multiple(s.control.spr_period_s, s.sim.measurement_period_s))
    out.push_back("control periods must be multiples of the measurement period");
  if (s.control.demand_ewma_alpha <= 0.0 || s.control.demand_ewma_alpha > 1.0)
    out.push_back("demand EWMA alpha must be in (0, 1]");

  return out;
}

namespace {

struct ClassDef {
  const char* name;
  double sla_ms;
  Tier tier;
  int rank;
  double base_rate_mbps;
};

// Application mix: four preemptive classes and two WFQ classes. Base rates
// are sized so the aggregate diurnal peak sits around 1.2x the post-
// migration bottleneck, the regime the policy comparison needs.
constexpr ClassDef kClasses[] = {
    {"Critical", 15.0, Tier::Strict, 0, 1.3},
    {"VoIP", 20.0, Tier::Strict, 1, 1.3},
    {"Video", 40.0, Tier::Strict, 2, 3.0},
    {"Interactive", 30.0, Tier::Strict, 3, 2.6},
    {"Bulk", 100.0, Tier::Weighted, -1, 1.0},
    {"Office", 150.0, Tier::Weighted, -1, 2.2},
};

constexpr const char* kSpokes[] = {"s1", "s2", "s3"};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string serving_hub(int spoke_index) {
  // Spokes alternate between the two regional hubs.
  return spoke_index % 2 == 0 ? "h1" : "h2";
}

std::string other_hub(const std::string& hub) { return hub == "h1" ? "h2" : "h1"; }

Scenario scaffold(const std::string& name) {
  Scenario s;
  s.name = name;
  s.topology.nodes = {{"h1", NodeRole::Hub},
                      {"h2", NodeRole::Hub},
                      {"s1", NodeRole::Spoke},
                      {"s2", NodeRole::Spoke},
                      {"s3", NodeRole::Spoke}};
  for (const auto& c : kClasses)
    s.classes.push_back({c.name, c.sla_ms, c.tier, c.rank});

  s.sim.tick_s = 0.1;
  s.sim.measurement_period_s = 1.0;
  s.sim.buffer_limit_mbit = 0.25;
  s.sim.horizon_s = 600.0;
  s.sim.seed = 42;
  s.control = ControlConfig{};
  return s;
}

void add_groups_and_traffic(Scenario& s, bool sdwan_mix) {
  // s2 leans toward the elastic applications, the other spokes toward the
  // interactive ones; the aggregate keeps the same diurnal peak.
  constexpr double kStrictScale[3] = {1.0, 0.8, 1.0};
  constexpr double kWeightedScale[3] = {1.0, 1.4, 1.0};
  for (int si = 0; si < 3; ++si) {
    const std::string spoke = kSpokes[si];
    const std::string hub = serving_hub(si);
    for (const auto& c : kClasses) {
      FlowGroup g;
      g.id = lower(c.name) + "." + spoke;
      g.klass = c.name;
      g.src = hub;
      g.dst = spoke;
      g.sla.max_e2e_delay_ms = c.sla_ms;
      g.tier = c.tier;
      g.strict_rank = c.rank;

      const std::string mstp = "mstp." + hub + "." + spoke;
      g.routes.push_back({mstp, std::nullopt});
      if (sdwan_mix) {
        g.routes.push_back({"mv." + hub + "." + spoke, std::nullopt});
        if (c.tier == Tier::Weighted) {
          // Delay-tolerant classes may detour over the MAN via the other
          // hub's MSTP line.
          const std::string other = other_hub(hub);
          g.routes.push_back({"man." + hub + "." + other,
                              "mstp." + other + "." + spoke});
        }
      }
      s.groups.push_back(std::move(g));

      DiurnalSpec d;
      d.base_rate_mbps = c.base_rate_mbps *
                         (c.tier == Tier::Strict ? kStrictScale[si] : kWeightedScale[si]);
      d.diurnal_amplitude = 0.5;
      d.diurnal_period_s = 120.0;
      d.noise_std = 0.1;
      s.traffic.per_group[lower(c.name) + "." + spoke] = d;
    }
  }
}

}  // namespace

Scenario builtin_mstp_only() {
  Scenario s = scaffold("mstp_only");
  for (const char* hub : {"h1", "h2"}) {
    for (const char* spoke : kSpokes) {
      s.topology.links.push_back({std::string("mstp.") + hub + "." + spoke, hub,
                                  spoke, 18.0, 10.0, LinkKind::Mstp});
    }
  }
  add_groups_and_traffic(s, /*sdwan_mix=*/false);
  return s;
}

Scenario builtin_sdwan_mix() {
  Scenario s = scaffold("sdwan_mix");
  for (const char* hub : {"h1", "h2"}) {
    for (const char* spoke : kSpokes) {
      // Existing MSTP lines downsized 66%: 18 -> 6 Mbps.
      s.topology.links.push_back({std::string("mstp.") + hub + "." + spoke, hub,
                                  spoke, 6.0, 10.0, LinkKind::Mstp});
    }
  }
  for (int si = 0; si < 3; ++si) {
    const std::string hub = serving_hub(si);
    s.topology.links.push_back({"mv." + hub + "." + kSpokes[si], hub, kSpokes[si],
                                12.0, 15.0, LinkKind::Mv});
  }
  s.topology.links.push_back({"man.h1.h2", "h1", "h2", 24.0, 5.0, LinkKind::Man});
  s.topology.links.push_back({"man.h2.h1", "h2", "h1", 24.0, 5.0, LinkKind::Man});
  add_groups_and_traffic(s, /*sdwan_mix=*/true);
  return s;
}

}  // namespace sdwan

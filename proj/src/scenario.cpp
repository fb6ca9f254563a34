#include "gos/scenario.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gos {

namespace {

std::string join_issues(const std::vector<std::string>& problems) {
  std::string out = "scenario invalid:";
  for (const auto& p : problems) {
    out += "\n  ";
    out += p;
  }
  return out;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : std::runtime_error(join_issues(problems)), issues(std::move(problems)) {}

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) {
    if (tok[0] == '#') break;
    out.push_back(tok);
  }
  return out;
}

// key=value fields after a directive word.
std::map<std::string, std::string> kv_of(const std::vector<std::string>& toks, size_t from,
                                         int line, std::vector<std::string>& problems) {
  std::map<std::string, std::string> out;
  for (size_t i = from; i < toks.size(); ++i) {
    const auto eq = toks[i].find('=');
    if (eq == std::string::npos || eq == 0) {
      problems.push_back("line " + std::to_string(line) + ": expected key=value, got '" +
                         toks[i] + "'");
      continue;
    }
    out[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
  }
  return out;
}

bool to_i64(const std::string& s, int64_t& out) {
  try {
    size_t pos = 0;
    out = std::stoll(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool to_u64(const std::string& s, uint64_t& out) {
  try {
    size_t pos = 0;
    out = std::stoull(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool to_f64(const std::string& s, double& out) {
  try {
    size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

ScenarioSpec parse_scenario(std::istream& in, const std::string& source_name) {
  ScenarioSpec spec;
  std::vector<std::string> problems;
  std::string line;
  int line_no = 0;
  bool in_inline_topo = false;
  std::string inline_text;

  auto bad = [&](int ln, const std::string& msg) {
    problems.push_back("line " + std::to_string(ln) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (in_inline_topo) {
      auto toks = tokens_of(line);
      if (toks.size() == 1 && toks[0] == "end") {
        in_inline_topo = false;
      } else {
        inline_text += line;
        inline_text += '\n';
      }
      continue;
    }
    auto toks = tokens_of(line);
    if (toks.empty()) continue;
    const std::string& dir = toks[0];

    if (dir == "topology") {
      if (toks.size() >= 2 && toks[1] == "generate") {
        if (toks.size() != 4 || toks[2] != "att_like" || toks[3].rfind("seed=", 0) != 0) {
          bad(line_no, "usage: topology generate att_like seed=N");
          continue;
        }
        uint64_t seed;
        if (!to_u64(toks[3].substr(5), seed)) {
          bad(line_no, "bad seed");
          continue;
        }
        spec.generate_seed = seed;
      } else if (toks.size() == 2 && toks[1] == "inline") {
        in_inline_topo = true;
      } else if (toks.size() == 3 && toks[1] == "file") {
        spec.topo_path = toks[2];
      } else if (toks.size() == 2) {
        spec.topo_path = toks[1];
      } else {
        bad(line_no, "usage: topology <path> | topology file <path> | "
                     "topology generate att_like seed=N | topology inline ... end");
      }
    } else if (dir == "gos_nodes") {
      if (toks.size() == 2 && toks[1] == "none") {
        spec.mark_mode = GosMarkMode::None;
      } else if (toks.size() >= 2 && toks[1] == "list") {
        spec.mark_mode = GosMarkMode::List;
        spec.gos_list.assign(toks.begin() + 2, toks.end());
        if (spec.gos_list.empty()) bad(line_no, "gos_nodes list wants node ids");
      } else if (toks.size() == 3 && toks[1] == "top_degree") {
        int64_t k;
        if (!to_i64(toks[2], k) || k < 1) {
          bad(line_no, "bad top_degree count");
        } else {
          spec.mark_mode = GosMarkMode::TopDegree;
          spec.top_degree_k = static_cast<size_t>(k);
        }
      } else if (toks.size() == 3 && toks[1] == "spacing") {
        int64_t k;
        if (!to_i64(toks[2], k) || k < 1) {
          bad(line_no, "bad spacing");
        } else {
          spec.mark_mode = GosMarkMode::Spacing;
          spec.spacing_k = static_cast<size_t>(k);
        }
      } else {
        bad(line_no, "usage: gos_nodes none | list <ids> | top_degree k | spacing k");
      }
    } else if (dir == "gos_buffer_bytes") {
      uint64_t v;
      if (toks.size() != 2 || !to_u64(toks[1], v) || v == 0)
        bad(line_no, "gos_buffer_bytes wants a positive byte count");
      else
        spec.gos_buffer_bytes = v;
    } else if (dir == "flow") {
      auto kv = kv_of(toks, 1, line_no, problems);
      FlowSpec f;
      f.line = line_no;
      bool ok = true;
      auto need = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) {
          bad(line_no, std::string("flow missing ") + key);
          ok = false;
          return std::nullopt;
        }
        return it->second;
      };
      if (auto v = need("fec")) {
        uint64_t fec;
        if (!to_u64(*v, fec) || fec > UINT32_MAX) {
          bad(line_no, "bad fec");
          ok = false;
        } else {
          f.fec = static_cast<uint32_t>(fec);
        }
      }
      if (auto v = need("src")) f.src = *v;
      if (auto v = need("dst")) f.dst = *v;
      if (auto v = need("rate_bps")) {
        if (!to_i64(*v, f.rate_bps)) {
          bad(line_no, "bad rate_bps");
          ok = false;
        }
      }
      if (auto it = kv.find("packet_bytes"); it != kv.end()) {
        uint64_t sz;
        if (!to_u64(it->second, sz) || sz == 0 || sz > 65535) {
          bad(line_no, "bad packet_bytes");
          ok = false;
        } else {
          f.packet_size_bytes = static_cast<uint32_t>(sz);
        }
      }
      if (auto it = kv.find("level"); it != kv.end()) {
        uint64_t lv;
        if (!to_u64(it->second, lv) || lv > UINT16_MAX) {
          bad(line_no, "bad level");
          ok = false;
        } else {
          f.level = GosLevel{static_cast<uint16_t>(lv)};
        }
      }
      if (auto it = kv.find("start_s"); it != kv.end())
        if (!to_f64(it->second, f.start_s)) {
          bad(line_no, "bad start_s");
          ok = false;
        }
      if (auto it = kv.find("stop_s"); it != kv.end())
        if (!to_f64(it->second, f.stop_s)) {
          bad(line_no, "bad stop_s");
          ok = false;
        }
      if (ok) spec.flows.push_back(std::move(f));
    } else if (dir == "drop") {
      if (toks.size() == 2 && toks[1] == "none") {
        spec.drop.mode = DropMode::None;
      } else if (toks.size() >= 2 && toks[1] == "bernoulli") {
        spec.drop.mode = DropMode::Bernoulli;
        auto kv = kv_of(toks, 2, line_no, problems);
        if (auto it = kv.find("rate"); it != kv.end()) {
          if (!to_f64(it->second, spec.drop.rate)) bad(line_no, "bad drop rate");
        } else {
          bad(line_no, "drop bernoulli wants rate=");
        }
        if (auto it = kv.find("nodes"); it != kv.end()) {
          if (it->second == "all") {
            spec.drop.nodes_all = true;
          } else if (it->second == "gos") {
            spec.drop.nodes_gos = true;
          } else {
            std::istringstream ids(it->second);
            std::string id;
            while (std::getline(ids, id, ','))
              if (!id.empty()) spec.drop.node_ids.insert(id);
            if (spec.drop.node_ids.empty()) bad(line_no, "empty drop node list");
          }
        } else {
          spec.drop.nodes_all = true;
        }
      } else if (toks.size() >= 2 && toks[1] == "queue") {
        spec.drop.mode = DropMode::Queue;
        auto kv = kv_of(toks, 2, line_no, problems);
        int64_t cap = 0;
        if (auto it = kv.find("cap"); it == kv.end() || !to_i64(it->second, cap) || cap < 1)
          bad(line_no, "drop queue wants cap=N (>=1)");
        else
          spec.drop.queue_cap = static_cast<int>(cap);
      } else {
        bad(line_no, "usage: drop none | bernoulli rate=R [nodes=...] | queue cap=N");
      }
    } else if (dir == "inject") {
      auto kv = kv_of(toks, 1, line_no, problems);
      InjectedDrop inj;
      bool ok = true;
      if (auto it = kv.find("node"); it != kv.end()) {
        inj.node = it->second;
      } else {
        bad(line_no, "inject wants node=");
        ok = false;
      }
      uint64_t v;
      if (auto it = kv.find("fec"); it != kv.end() && to_u64(it->second, v)) {
        inj.fec = static_cast<uint32_t>(v);
      } else {
        bad(line_no, "inject wants fec=");
        ok = false;
      }
      if (auto it = kv.find("pid"); it != kv.end() && to_u64(it->second, v)) {
        inj.packet_id = static_cast<uint32_t>(v);
      } else {
        bad(line_no, "inject wants pid=");
        ok = false;
      }
      if (auto it = kv.find("attempt"); it != kv.end()) {
        if (to_u64(it->second, v))
          inj.attempt = static_cast<uint32_t>(v);
        else {
          bad(line_no, "bad inject attempt");
          ok = false;
        }
      }
      if (ok) spec.drop.injections.push_back(std::move(inj));
    } else if (dir == "duration_s") {
      if (toks.size() != 2 || !to_f64(toks[1], spec.duration_s))
        bad(line_no, "duration_s wants a number");
    } else if (dir == "sample_interval_s") {
      if (toks.size() != 2 || !to_f64(toks[1], spec.sample_interval_s))
        bad(line_no, "sample_interval_s wants a number");
    } else if (dir == "d_gos") {
      if (toks.size() != 2 || !to_f64(toks[1], spec.d_gos))
        bad(line_no, "d_gos wants a number");
    } else if (dir == "reorder_window") {
      int64_t w;
      if (toks.size() != 2 || !to_i64(toks[1], w) || w < 1)
        bad(line_no, "reorder_window wants a positive integer");
      else
        spec.reorder_window = static_cast<int>(w);
    } else if (dir == "emission") {
      if (toks.size() == 2 && toks[1] == "fixed")
        spec.poisson = false;
      else if (toks.size() == 2 && toks[1] == "poisson")
        spec.poisson = true;
      else
        bad(line_no, "emission wants fixed|poisson");
    } else if (dir == "gos_enabled") {
      int64_t v;
      if (toks.size() != 2 || !to_i64(toks[1], v) || (v != 0 && v != 1))
        bad(line_no, "gos_enabled wants 0|1");
      else
        spec.gos_enabled = v == 1;
    } else if (dir == "reservation_unit_bytes") {
      uint64_t v;
      if (toks.size() != 2 || !to_u64(toks[1], v) || v == 0)
        bad(line_no, "reservation_unit_bytes wants a positive byte count");
      else
        spec.reservation_unit_bytes = v;
    } else {
      bad(line_no, "unknown directive '" + dir + "'");
    }
  }
  if (in_inline_topo) problems.push_back("unterminated inline topology (missing 'end')");
  if (!inline_text.empty()) spec.topo_inline_text = inline_text;

  const int sources = (spec.topo_path ? 1 : 0) + (spec.generate_seed ? 1 : 0) +
                      (spec.topo_inline_text ? 1 : 0);
  if (sources == 0) problems.push_back(source_name + ": no topology section");
  if (sources > 1) problems.push_back(source_name + ": multiple topology sections");
  if (spec.duration_s <= 0) problems.push_back(source_name + ": duration_s must be positive");
  if (spec.sample_interval_s <= 0 || spec.sample_interval_s > spec.duration_s)
    problems.push_back(source_name + ": sample_interval_s must be in (0, duration_s]");
  if (spec.d_gos <= 0) problems.push_back(source_name + ": d_gos must be positive");
  if (spec.flows.empty()) problems.push_back(source_name + ": no flows");

  if (!problems.empty()) throw ScenarioError(std::move(problems));
  return spec;
}

ScenarioSpec parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({"cannot open scenario file " + path});
  return parse_scenario(in, path);
}

Topology realize_topology(const ScenarioSpec& spec) {
  if (spec.generate_seed) return generate_att_like(*spec.generate_seed);
  if (spec.topo_inline_text) {
    try {
      return parse_topology_text(*spec.topo_inline_text);
    } catch (const ParseError& e) {
      throw ScenarioError({std::string("inline topology: ") + e.what()});
    }
  }
  std::ifstream in(*spec.topo_path);
  if (!in) throw ScenarioError({"cannot open topology file " + *spec.topo_path});
  try {
    return parse_topology(in);
  } catch (const ParseError& e) {
    throw ScenarioError({*spec.topo_path + ": " + e.what()});
  }
}

void apply_gos_marking(Topology& topo, const ScenarioSpec& spec,
                       const std::vector<RoutePath>& flow_routes) {
  std::set<std::string> marked;
  switch (spec.mark_mode) {
    case GosMarkMode::None:
      break;
    case GosMarkMode::List:
      marked.insert(spec.gos_list.begin(), spec.gos_list.end());
      break;
    case GosMarkMode::TopDegree:
      marked = place_gos_nodes(topo, spec.top_degree_k);
      break;
    case GosMarkMode::Spacing: {
      for (size_t fi = 0; fi < flow_routes.size(); ++fi) {
        if (fi < spec.flows.size() && spec.flows[fi].level.value == 0) continue;
        const auto& route = flow_routes[fi];
        if (spec.spacing_k >= route.nodes.size())
          throw ScenarioError({"gos_nodes spacing " + std::to_string(spec.spacing_k) +
                               " >= route length " + std::to_string(route.nodes.size())});
        for (size_t p = 0; p < route.nodes.size(); p += spec.spacing_k)
          marked.insert(route.nodes[p]);
      }
      break;
    }
  }
  for (size_t i = 0; i < topo.nodes().size(); ++i) {
    NodeSpec& n = topo.node_mut(i);
    const bool on = marked.count(n.id) != 0;
    n.gos_capable = on;
    if (on && n.gos_buffer_bytes == 0) n.gos_buffer_bytes = spec.gos_buffer_bytes;
    if (!on) n.gos_buffer_bytes = 0;
  }
}

void validate_scenario(const ScenarioSpec& spec, const Topology& topo) {
  std::vector<std::string> problems;
  auto flow_tag = [](const FlowSpec& f) {
    return "flow fec=" + std::to_string(f.fec) + " (line " + std::to_string(f.line) + ")";
  };

  std::set<uint32_t> fecs;
  for (const auto& f : spec.flows) {
    if (!fecs.insert(f.fec).second) problems.push_back(flow_tag(f) + ": duplicate fec");
    const NodeSpec* src = topo.find_node(f.src);
    const NodeSpec* dst = topo.find_node(f.dst);
    if (!src)
      problems.push_back(flow_tag(f) + ": unknown src " + f.src);
    else if (src->kind != NodeKind::LER)
      problems.push_back(flow_tag(f) + ": src " + f.src + " is not a LER");
    if (!dst)
      problems.push_back(flow_tag(f) + ": unknown dst " + f.dst);
    else if (dst->kind != NodeKind::LER)
      problems.push_back(flow_tag(f) + ": dst " + f.dst + " is not a LER");
    if (f.src == f.dst) problems.push_back(flow_tag(f) + ": src equals dst");
    if (f.rate_bps < 64'000 || f.rate_bps > 4'000'000)
      problems.push_back(flow_tag(f) + ": rate_bps outside [64e3, 4e6]");
    if (f.start_s < 0 || f.start_s >= spec.duration_s)
      problems.push_back(flow_tag(f) + ": start_s outside [0, duration)");
    if (f.stop_s >= 0 && f.stop_s <= f.start_s)
      problems.push_back(flow_tag(f) + ": stop_s before start_s");
  }

  if (spec.drop.mode == DropMode::Bernoulli) {
    const double r = spec.drop.rate;
    if (r != 0 && (r < 0.0001 || r > 0.04))
      problems.push_back("drop: bernoulli rate outside [0.01%, 4%]");
    for (const auto& id : spec.drop.node_ids)
      if (!topo.find_node(id)) problems.push_back("drop: unknown node " + id);
  }
  for (const auto& inj : spec.drop.injections) {
    if (!topo.find_node(inj.node)) problems.push_back("inject: unknown node " + inj.node);
    if (!fecs.count(inj.fec))
      problems.push_back("inject: fec " + std::to_string(inj.fec) + " has no flow");
  }
  if (spec.mark_mode == GosMarkMode::List)
    for (const auto& id : spec.gos_list)
      if (!topo.find_node(id)) problems.push_back("gos_nodes: unknown node " + id);
  if (spec.mark_mode == GosMarkMode::TopDegree && spec.top_degree_k > topo.nodes().size())
    problems.push_back("gos_nodes: top_degree k exceeds node count");

  if (!problems.empty()) throw ScenarioError(std::move(problems));
}

ScenarioSpec diameter_spacing_scenario(const Topology& topo, const RoutePath& route, size_t k) {
  validate_route(topo, route);
  if (k < 1 || k >= route.nodes.size())
    throw ScenarioError({"spacing k must satisfy 1 <= k < route length"});
  ScenarioSpec spec;
  spec.topo_inline_text = serialize_topology(topo);
  spec.mark_mode = GosMarkMode::List;
  for (size_t p = 0; p < route.nodes.size(); p += k) spec.gos_list.push_back(route.nodes[p]);
  FlowSpec f;
  f.fec = 1;
  f.src = route.nodes.front();
  f.dst = route.nodes.back();
  f.rate_bps = 1'000'000;
  f.level = GosLevel{1};
  spec.flows.push_back(f);
  spec.duration_s = 60;
  return spec;
}

}  // namespace gos

#include "gos/topology.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "gos/rng.hpp"

namespace gos {

const char* to_string(NodeKind k) { return k == NodeKind::LER ? "LER" : "LSR"; }

void Topology::add_node(NodeSpec n) {
  if (n.id.empty()) throw TopologyError("empty node id");
  if (index_.count(n.id)) throw TopologyError("duplicate node id " + n.id);
  if (addr_index_.count(n.address))
    throw TopologyError("duplicate node address " + format_ipv4(n.address) + " on " + n.id);
  if (n.gos_capable && n.gos_buffer_bytes == 0)
    throw TopologyError("node " + n.id + " is GoS capable but has zero buffer");
  index_[n.id] = nodes_.size();
  addr_index_[n.address] = nodes_.size();
  nodes_.push_back(std::move(n));
  out_.emplace_back();
  in_count_.push_back(0);
}

void Topology::add_link(LinkSpec l) {
  const auto from = node_index(l.from);
  const auto to = node_index(l.to);
  if (!from) throw TopologyError("link endpoint " + l.from + " is not a node");
  if (!to) throw TopologyError("link endpoint " + l.to + " is not a node");
  if (*from == *to) throw TopologyError("self loop on " + l.from);
  if (l.delay_us <= 0) throw TopologyError("non-positive delay on link " + l.from + "->" + l.to);
  if (l.capacity_bps <= 0)
    throw TopologyError("non-positive capacity on link " + l.from + "->" + l.to);
  if (link_index_.count({*from, *to}))
    throw TopologyError("duplicate link " + l.from + "->" + l.to);
  link_index_[{*from, *to}] = links_.size();
  out_[*from].push_back(links_.size());
  in_count_[*to]++;
  links_.push_back(std::move(l));
}

std::optional<size_t> Topology::node_index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const NodeSpec* Topology::find_node(const std::string& id) const {
  auto idx = node_index(id);
  return idx ? &nodes_[*idx] : nullptr;
}

std::optional<size_t> Topology::node_index_by_address(uint32_t addr) const {
  auto it = addr_index_.find(addr);
  if (it == addr_index_.end()) return std::nullopt;
  return it->second;
}

const LinkSpec* Topology::find_link(const std::string& from, const std::string& to) const {
  const auto f = node_index(from);
  const auto t = node_index(to);
  if (!f || !t) return nullptr;
  auto it = link_index_.find({*f, *t});
  if (it == link_index_.end()) return nullptr;
  return &links_[it->second];
}

bool Topology::connected() const {
  if (nodes_.empty()) return true;
  // Undirected reachability over directed records.
  std::vector<std::vector<size_t>> adj(nodes_.size());
  for (const auto& l : links_) {
    const size_t a = *node_index(l.from);
    const size_t b = *node_index(l.to);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(nodes_.size(), false);
  std::queue<size_t> q;
  q.push(0);
  seen[0] = true;
  size_t count = 1;
  while (!q.empty()) {
    const size_t n = q.front();
    q.pop();
    for (size_t m : adj[n]) {
      if (!seen[m]) {
        seen[m] = true;
        ++count;
        q.push(m);
      }
    }
  }
  return count == nodes_.size();
}

uint32_t parse_ipv4(const std::string& s) {
  uint32_t out = 0;
  int octets = 0;
  size_t i = 0;
  while (i < s.size()) {
    if (octets == 4) throw TopologyError("bad address " + s);
    size_t j = i;
    long v = 0;
    while (j < s.size() && s[j] >= '0' && s[j] <= '9') {
      v = v * 10 + (s[j] - '0');
      if (v > 255) throw TopologyError("bad address " + s);
      ++j;
    }
    if (j == i) throw TopologyError("bad address " + s);
    out = out << 8 | static_cast<uint32_t>(v);
    ++octets;
    if (j < s.size()) {
      if (s[j] != '.') throw TopologyError("bad address " + s);
      ++j;
      if (j == s.size()) throw TopologyError("bad address " + s);
    }
    i = j;
  }
  if (octets != 4) throw TopologyError("bad address " + s);
  return out;
}

std::string format_ipv4(uint32_t addr) {
  std::string out;
  for (int shift = 24; shift >= 0; shift -= 8) {
    if (!out.empty()) out.push_back('.');
    out += std::to_string(addr >> shift & 0xff);
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) {
    if (tok[0] == '#') break;
    out.push_back(tok);
  }
  return out;
}

int64_t parse_int_field(const std::string& s, int line_no, const char* what) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line_no, std::string("bad ") + what + " '" + s + "'");
  }
}

}  // namespace

Topology parse_topology(std::istream& in) {
  Topology t;
  std::string line;
  int line_no = 0;
  // Links are buffered so node lines may appear in any order.
  std::vector<std::pair<int, LinkSpec>> pending_links;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = split_fields(line);
    if (f.empty()) continue;
    if (f[0] == "node") {
      if (f.size() != 6) throw ParseError(line_no, "node wants: id addr LER|LSR gos buffer");
      NodeSpec n;
      n.id = f[1];
      try {
        n.address = parse_ipv4(f[2]);
      } catch (const TopologyError& e) {
        throw ParseError(line_no, e.what());
      }
      if (f[3] == "LER")
        n.kind = NodeKind::LER;
      else if (f[3] == "LSR")
        n.kind = NodeKind::LSR;
      else
        throw ParseError(line_no, "bad node kind '" + f[3] + "'");
      const int64_t gos = parse_int_field(f[4], line_no, "gos flag");
      if (gos != 0 && gos != 1) throw ParseError(line_no, "gos flag must be 0 or 1");
      n.gos_capable = gos == 1;
      const int64_t buf = parse_int_field(f[5], line_no, "buffer size");
      if (buf < 0) throw ParseError(line_no, "negative buffer size");
      n.gos_buffer_bytes = static_cast<uint64_t>(buf);
      try {
        t.add_node(std::move(n));
      } catch (const TopologyError& e) {
        throw ParseError(line_no, e.what());
      }
    } else if (f[0] == "link") {
      if (f.size() != 5) throw ParseError(line_no, "link wants: from to delay_us capacity_bps");
      LinkSpec l;
      l.from = f[1];
      l.to = f[2];
      l.delay_us = parse_int_field(f[3], line_no, "delay");
      l.capacity_bps = parse_int_field(f[4], line_no, "capacity");
      pending_links.emplace_back(line_no, std::move(l));
    } else {
      throw ParseError(line_no, "unknown directive '" + f[0] + "'");
    }
  }
  for (auto& [ln, l] : pending_links) {
    try {
      t.add_link(std::move(l));
    } catch (const TopologyError& e) {
      throw ParseError(ln, e.what());
    }
  }
  return t;
}

Topology parse_topology_text(const std::string& text) {
  std::istringstream iss(text);
  return parse_topology(iss);
}

std::string serialize_topology(const Topology& t) {
  std::ostringstream out;
  for (const auto& n : t.nodes()) {
    out << "node " << n.id << ' ' << format_ipv4(n.address) << ' ' << to_string(n.kind) << ' '
        << (n.gos_capable ? 1 : 0) << ' ' << n.gos_buffer_bytes << '\n';
  }
  for (const auto& l : t.links()) {
    out << "link " << l.from << ' ' << l.to << ' ' << l.delay_us << ' ' << l.capacity_bps << '\n';
  }
  return out.str();
}

namespace {

struct Point {
  double x, y;
};

double dist(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Distance-derived one-way delay in [500, 5000] us.
int64_t delay_from_dist(double d) {
  return 500 + static_cast<int64_t>(std::llround(d * 3181.98));
}

std::string core_id(size_t i) {
  std::string n = std::to_string(i + 1);
  if (n.size() < 2) n.insert(0, "0");
  return "lsr" + n;
}

std::string edge_id(size_t i) {
  std::string n = std::to_string(i + 1);
  while (n.size() < 3) n.insert(0, "0");
  return "ler" + n;
}

}  // namespace

Topology generate_att_like(uint64_t seed) {
  constexpr size_t kCore = 30;
  constexpr size_t kEdge = 120;
  constexpr size_t kExtraCoreLinks = 31;

  Rng rng(seed);
  std::vector<Point> core_pos(kCore);
  for (auto& p : core_pos) {
    p.x = rng.uniform_real01();
    p.y = rng.uniform_real01();
  }
  std::vector<Point> edge_pos(kEdge);
  for (auto& p : edge_pos) {
    p.x = rng.uniform_real01();
    p.y = rng.uniform_real01();
  }

  Topology t;
  for (size_t i = 0; i < kCore; ++i) {
    NodeSpec n;
    n.id = core_id(i);
    n.address = 0x0a000000u | static_cast<uint32_t>(i + 1);  // 10.0.0.x
    n.kind = NodeKind::LSR;
    t.add_node(std::move(n));
  }
  for (size_t i = 0; i < kEdge; ++i) {
    NodeSpec n;
    n.id = edge_id(i);
    n.address = 0x0a010000u | static_cast<uint32_t>(i + 1);  // 10.1.0.x
    n.kind = NodeKind::LER;
    t.add_node(std::move(n));
  }

  auto add_pair = [&](const std::string& a, const std::string& b, double d) {
    const int64_t delay = delay_from_dist(d);
    const int64_t cap =
        static_cast<int64_t>(rng.uniform_u64(45'000'000ull, 2'500'000'000ull));
    t.add_link({a, b, delay, cap});
    t.add_link({b, a, delay, cap});
  };

  // Core spanning structure: each core node joins the nearest earlier one.
  std::set<std::pair<size_t, size_t>> core_edges;
  for (size_t i = 1; i < kCore; ++i) {
    size_t best = 0;
    double bd = dist(core_pos[i], core_pos[0]);
    for (size_t j = 1; j < i; ++j) {
      const double d = dist(core_pos[i], core_pos[j]);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    core_edges.insert({std::min(i, best), std::max(i, best)});
    add_pair(core_id(i), core_id(best), bd);
  }

  // Densify the core with the closest unlinked pairs.
  struct Cand {
    double d;
    size_t a, b;
  };
  std::vector<Cand> cands;
  for (size_t a = 0; a < kCore; ++a)
    for (size_t b = a + 1; b < kCore; ++b)
      if (!core_edges.count({a, b})) cands.push_back({dist(core_pos[a], core_pos[b]), a, b});
  std::sort(cands.begin(), cands.end(), [](const Cand& l, const Cand& r) {
    if (l.d != r.d) return l.d < r.d;
    if (l.a != r.a) return l.a < r.a;
    return l.b < r.b;
  });
  for (size_t k = 0; k < kExtraCoreLinks && k < cands.size(); ++k)
    add_pair(core_id(cands[k].a), core_id(cands[k].b), cands[k].d);

  // Each LER attaches to its nearest core node.
  for (size_t i = 0; i < kEdge; ++i) {
    size_t best = 0;
    double bd = dist(edge_pos[i], core_pos[0]);
    for (size_t j = 1; j < kCore; ++j) {
      const double d = dist(edge_pos[i], core_pos[j]);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    add_pair(edge_id(i), core_id(best), bd);
  }

  return t;
}

RoutePath shortest_delay_path(const Topology& t, const std::string& src, const std::string& dst) {
  const auto s = t.node_index(src);
  const auto d = t.node_index(dst);
  if (!s) throw RouteError("unknown source node " + src);
  if (!d) throw RouteError("unknown destination node " + dst);
  if (*s == *d) throw RouteError("source equals destination " + src);

  const size_t n = t.nodes().size();
  // Tie-break rank: ascending node id.
  std::vector<size_t> rank(n);
  {
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return t.node(a).id < t.node(b).id; });
    for (size_t r = 0; r < n; ++r) rank[order[r]] = r;
  }

  constexpr int64_t kInf = INT64_MAX / 4;
  std::vector<int64_t> distv(n, kInf);
  std::vector<size_t> prev(n, SIZE_MAX);
  std::set<std::tuple<int64_t, size_t, size_t>> pq;  // (dist, rank, idx)
  distv[*s] = 0;
  pq.insert({0, rank[*s], *s});
  while (!pq.empty()) {
    const auto [du, ru, u] = *pq.begin();
    pq.erase(pq.begin());
    if (u == *d) break;
    for (size_t li : t.out_links(u)) {
      const auto& l = t.links()[li];
      const size_t v = *t.node_index(l.to);
      const int64_t nd = du + l.delay_us;
      if (nd < distv[v]) {
        pq.erase({distv[v], rank[v], v});
        distv[v] = nd;
        prev[v] = u;
        pq.insert({nd, rank[v], v});
      }
    }
  }
  if (distv[*d] >= kInf) throw RouteError("destination " + dst + " unreachable from " + src);

  RoutePath path;
  path.total_delay_us = distv[*d];
  std::vector<std::string> rev;
  for (size_t cur = *d; cur != SIZE_MAX; cur = prev[cur]) {
    rev.push_back(t.node(cur).id);
    if (cur == *s) break;
  }
  path.nodes.assign(rev.rbegin(), rev.rend());
  return path;
}

std::set<std::string> place_gos_nodes(const Topology& t, size_t k) {
  if (k < 1 || k > t.nodes().size())
    throw std::invalid_argument("place_gos_nodes: k out of range");
  std::vector<size_t> order(t.nodes().size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const size_t da = t.degree(a), db = t.degree(b);
    if (da != db) return da > db;
    return t.node(a).id < t.node(b).id;
  });
  std::set<std::string> out;
  for (size_t i = 0; i < k; ++i) out.insert(t.node(order[i]).id);
  return out;
}

void validate_route(const Topology& t, const RoutePath& path) {
  if (path.nodes.size() < 2) throw RouteError("route needs at least two nodes");
  std::set<std::string> seen;
  int64_t sum = 0;
  for (size_t i = 0; i < path.nodes.size(); ++i) {
    if (!t.node_index(path.nodes[i])) throw RouteError("route node " + path.nodes[i] + " unknown");
    if (!seen.insert(path.nodes[i]).second)
      throw RouteError("route repeats node " + path.nodes[i]);
    if (i + 1 < path.nodes.size()) {
      const LinkSpec* l = t.find_link(path.nodes[i], path.nodes[i + 1]);
      if (!l)
        throw RouteError("no link " + path.nodes[i] + "->" + path.nodes[i + 1]);
      sum += l->delay_us;
    }
  }
  if (sum != path.total_delay_us) throw RouteError("route delay mismatch");
}

std::vector<int64_t> route_link_delays(const Topology& t, const RoutePath& path) {
  std::vector<int64_t> out;
  out.reserve(path.hop_count());
  for (size_t i = 0; i + 1 < path.nodes.size(); ++i) {
    const LinkSpec* l = t.find_link(path.nodes[i], path.nodes[i + 1]);
    if (!l) throw RouteError("no link " + path.nodes[i] + "->" + path.nodes[i + 1]);
    out.push_back(l->delay_us);
  }
  return out;
}

}  // namespace gos

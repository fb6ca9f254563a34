#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gos {

enum class NodeKind : uint8_t { LER, LSR };

const char* to_string(NodeKind k);

struct NodeSpec {
  std::string id;
  uint32_t address = 0;  // 32-bit locator, rendered dotted-quad
  NodeKind kind = NodeKind::LSR;
  bool gos_capable = false;
  uint64_t gos_buffer_bytes = 0;

  bool operator==(const NodeSpec&) const = default;
};

struct LinkSpec {
  std::string from;
  std::string to;
  int64_t delay_us = 0;
  int64_t capacity_bps = 0;

  bool operator==(const LinkSpec&) const = default;
};

struct RoutePath {
  std::vector<std::string> nodes;
  int64_t total_delay_us = 0;

  size_t hop_count() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  bool operator==(const RoutePath&) const = default;
};

struct ParseError : std::runtime_error {
  ParseError(int line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
  int line;
};

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RouteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Directed graph with per-link delay and capacity. Immutable once built; a
// bidirectional link is two LinkSpec records.
class Topology {
 public:
  void add_node(NodeSpec n);  // throws TopologyError on duplicate id/address
  void add_link(LinkSpec l);  // throws on dangling endpoint, self loop, bad values

  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const std::vector<LinkSpec>& links() const { return links_; }

  std::optional<size_t> node_index(const std::string& id) const;
  const NodeSpec& node(size_t idx) const { return nodes_[idx]; }
  const NodeSpec* find_node(const std::string& id) const;
  NodeSpec& node_mut(size_t idx) { return nodes_[idx]; }

  std::optional<size_t> node_index_by_address(uint32_t addr) const;

  // Outgoing link indices from a node index.
  const std::vector<size_t>& out_links(size_t node_idx) const { return out_[node_idx]; }
  const LinkSpec* find_link(const std::string& from, const std::string& to) const;

  // Incident directed link records, in + out.
  size_t degree(size_t node_idx) const { return out_[node_idx].size() + in_count_[node_idx]; }

  bool connected() const;  // weakly connected over all nodes

  bool operator==(const Topology& other) const {
    return nodes_ == other.nodes_ && links_ == other.links_;
  }

 private:
  std::vector<NodeSpec> nodes_;
  std::vector<LinkSpec> links_;
  std::map<std::string, size_t> index_;
  std::map<uint32_t, size_t> addr_index_;
  std::map<std::pair<size_t, size_t>, size_t> link_index_;
  std::vector<std::vector<size_t>> out_;
  std::vector<size_t> in_count_;
};

uint32_t parse_ipv4(const std::string& s);
std::string format_ipv4(uint32_t addr);

// Line oriented text, '#' comments:
//   node <id> <dotted-quad> <LER|LSR> <0|1> <buffer-bytes>
//   link <from> <to> <delay_us> <capacity_bps>
Topology parse_topology(std::istream& in);
Topology parse_topology_text(const std::string& text);
std::string serialize_topology(const Topology& t);

// Seeded stand-in for the AT&T core: 30 LSRs forming a high-degree core plus
// 120 LERs, 180 bidirectional links (360 directed records), capacities
// uniform in [45 Mbps, 2.5 Gbps], delays derived from embedded coordinates.
Topology generate_att_like(uint64_t seed);

// Dijkstra on link delays; deterministic lexicographic tie-break.
RoutePath shortest_delay_path(const Topology& t, const std::string& src, const std::string& dst);

// The k nodes of highest degree; ties broken by ascending node id.
std::set<std::string> place_gos_nodes(const Topology& t, size_t k);

// Per-link delays of a route, in order. Throws RouteError on a non-route.
std::vector<int64_t> route_link_delays(const Topology& t, const RoutePath& path);

// Throws RouteError unless consecutive pairs are links and no node repeats.
void validate_route(const Topology& t, const RoutePath& path);

}  // namespace gos

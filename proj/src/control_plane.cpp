#include "gos/control_plane.hpp"

#include <algorithm>

#include "gos/network.hpp"

namespace gos {

Network::Network(const Topology& topo) : topo_(&topo), nodes_(topo.nodes().size()) {
  for (size_t i = 0; i < nodes_.size(); ++i)
    nodes_[i].buffer = GosBuffer(topo.node(i).gos_buffer_bytes);
}

NodeRuntime& Network::node(const std::string& id) {
  const auto idx = topo_->node_index(id);
  if (!idx) throw TopologyError("unknown node " + id);
  return nodes_[*idx];
}

const NodeRuntime* Network::find_node(const std::string& id) const {
  const auto idx = topo_->node_index(id);
  return idx ? &nodes_[*idx] : nullptr;
}

uint32_t Network::alloc_label(size_t node_idx) {
  NodeRuntime& n = nodes_[node_idx];
  if (n.next_label > kMaxLabel)
    throw SignalError("label space exhausted on " + topo_->node(node_idx).id);
  return n.next_label++;
}

const LspDescriptor* Network::find_lsp(uint32_t fec) const {
  auto it = lsps_.find(fec);
  return it == lsps_.end() ? nullptr : &it->second;
}

void Network::store_lsp(LspDescriptor lsp) { lsps_[lsp.fec] = std::move(lsp); }

void Network::erase_lsp(uint32_t fec) { lsps_.erase(fec); }

namespace {

// Encode/decode round trip standing in for the wire.
ControlMessage wire(const ControlMessage& msg, bool through_codec) {
  if (!through_codec) return msg;
  return decode(encode(msg)).msg;
}

}  // namespace

LspDescriptor signal_lsp(Network& net, const RoutePath& route, uint32_t fec, GosLevel level,
                         const SignalOptions& opts) {
  const Topology& topo = net.topo();
  try {
    validate_route(topo, route);
  } catch (const RouteError& e) {
    throw SignalError(std::string("invalid route: ") + e.what());
  }
  if (net.fec_signaled(fec)) throw SignalError("fec " + std::to_string(fec) + " already signaled");

  const size_t m = route.nodes.size();
  std::vector<size_t> idx(m);
  for (size_t i = 0; i < m; ++i) idx[i] = *topo.node_index(route.nodes[i]);

  // Path pass, downstream. The originating LER writes no row of its own; it
  // seeds the PHOP field with its address when it is itself GoS capable.
  PathMsg path;
  path.session = fec;
  path.hop = topo.node(idx[0]).address;
  if (level.value > 0) {
    path.gos_path = GosPathObject{level, topo.node(idx[0]).gos_capable
                                             ? topo.node(idx[0]).address
                                             : 0};
  }
  if (opts.transcript) opts.transcript->emplace_back(route.nodes[0], ControlMessage(path));

  for (size_t j = 1; j < m; ++j) {
    const ControlMessage received = wire(path, opts.through_codec);
    const PathMsg& rx = std::get<PathMsg>(received);
    if (opts.transcript) opts.transcript->emplace_back(route.nodes[j], received);
    const NodeSpec& spec = topo.node(idx[j]);
    if (rx.gos_path && spec.gos_capable) {
      net.node(idx[j]).gos_table[fec] =
          GosTableEntry{fec, rx.gos_path->level, rx.gos_path->gosp_phop};
      path.gos_path->gosp_phop = spec.address;
    }
    path.hop = spec.address;
  }

  // Resv pass, upstream. Labels are allocated here; each GoS hop grants the
  // largest level its remaining buffer capacity affords.
  GosLevel granted = level;
  uint32_t downstream_label = 0;
  std::string downstream_node;
  ResvMsg resv;
  resv.session = fec;
  for (size_t jj = m; jj-- > 0;) {
    const size_t j = jj;
    const NodeSpec& spec = topo.node(idx[j]);
    if (j + 1 < m) {
      const ControlMessage received = wire(resv, opts.through_codec);
      if (opts.transcript) opts.transcript->emplace_back(route.nodes[j], received);
      if (const auto& gr = std::get<ResvMsg>(received).gos_resv)
        granted = gr->granted_level;
    }
    uint32_t in_label;
    try {
      in_label = net.alloc_label(idx[j]);
    } catch (const SignalError&) {
      // Roll back rows written so far before propagating.
      for (size_t k = 1; k < m; ++k) net.node(idx[k]).gos_table.erase(fec);
      for (size_t k = 0; k < m; ++k) {
        auto& fib = net.node(idx[k]).fib;
        for (auto it = fib.begin(); it != fib.end();)
          it = it->second.fec == fec ? fib.erase(it) : std::next(it);
      }
      throw;
    }
    net.node(idx[j]).fib[in_label] = FibEntry{in_label, downstream_label, downstream_node, fec};
    // Admission runs at forwarding GoS nodes only; the egress stores nothing.
    if (level.value > 0 && spec.gos_capable && j + 1 < m) {
      const uint64_t unit = opts.reservation_unit_bytes;
      const uint64_t cap_units = unit == 0 ? UINT64_MAX : spec.gos_buffer_bytes / unit;
      const uint64_t reserved = net.node(idx[j]).reserved_units;
      const uint64_t afford = cap_units > reserved ? cap_units - reserved : 0;
      const uint16_t local = static_cast<uint16_t>(std::min<uint64_t>(granted.value, afford));
      granted = GosLevel{local};
    }
    resv.hop = spec.address;
    resv.gos_resv = level.value > 0 ? std::optional<GosResvObject>(GosResvObject{granted})
                                    : std::nullopt;
    downstream_label = in_label;
    downstream_node = route.nodes[j];
  }

  // Confirmation: align every GoS row with the final granted level and commit
  // buffer registrations on forwarding GoS nodes.
  LspDescriptor lsp;
  lsp.fec = fec;
  lsp.route = route;
  lsp.level = level.value > 0 ? granted : GosLevel{0};
  if (lsp.level.value > 0) {
    for (size_t j = 0; j < m; ++j) {
      const NodeSpec& spec = topo.node(idx[j]);
      if (!spec.gos_capable) continue;
      lsp.gosp.push_back(route.nodes[j]);
      if (j > 0) net.node(idx[j]).gos_table[fec].level = lsp.level;
      if (j + 1 < m) {
        // Egress never forwards, so it holds no buffered copies.
        net.node(idx[j]).buffer.register_flow(fec, lsp.level.value);
        net.node(idx[j]).reserved_units += lsp.level.value;
      }
    }
  } else if (level.value > 0) {
    // Downgraded to unprivileged: drop the rows written during the Path pass.
    for (size_t j = 1; j < m; ++j) net.node(idx[j]).gos_table.erase(fec);
  }

  net.store_lsp(lsp);
  return lsp;
}

std::optional<GosTableEntry> gos_table_lookup(const Network& net, const std::string& node_id,
                                              uint32_t fec) {
  const NodeRuntime* n = net.find_node(node_id);
  if (!n) throw TopologyError("unknown node " + node_id);
  auto it = n->gos_table.find(fec);
  if (it == n->gos_table.end()) return std::nullopt;
  return it->second;
}

TeardownCounts teardown_lsp(Network& net, uint32_t fec) {
  const LspDescriptor* lsp = net.find_lsp(fec);
  if (!lsp) throw SignalError("unknown fec " + std::to_string(fec));

  TeardownCounts counts;
  for (size_t i = 0; i < net.size(); ++i) {
    NodeRuntime& n = net.node(i);
    for (auto it = n.fib.begin(); it != n.fib.end();) {
      if (it->second.fec == fec) {
        it = n.fib.erase(it);
        ++counts.fib_rows;
      } else {
        ++it;
      }
    }
    counts.gos_rows += n.gos_table.erase(fec);
    if (n.buffer.registered(fec)) {
      counts.buffered_dropped += n.buffer.deregister_flow(fec);
      n.reserved_units -= std::min<uint64_t>(n.reserved_units, lsp->level.value);
    }
    n.gap.erase(fec);
  }
  net.erase_lsp(fec);
  return counts;
}

ForwardAction forward_packet(Network& net, const std::string& node_id, const DataPacket& pkt,
                             bool drop, bool gos_enabled) {
  const auto idx = net.topo().node_index(node_id);
  if (!idx) throw TopologyError("unknown node " + node_id);
  NodeRuntime& n = net.node(*idx);

  ForwardAction act;
  if (drop) {
    act.kind = ForwardKind::Dropped;
    return act;
  }
  auto it = n.fib.find(pkt.label);
  if (it == n.fib.end()) {
    act.kind = ForwardKind::NoFib;
    return act;
  }
  const FibEntry& fe = it->second;
  if (fe.next_hop.empty()) {
    act.kind = ForwardKind::Delivered;
    return act;
  }
  if (gos_enabled && net.topo().node(*idx).gos_capable && n.buffer.registered(pkt.fec))
    n.buffer.insert(pkt);
  const LinkSpec* link = net.topo().find_link(node_id, fe.next_hop);
  if (!link) throw TopologyError("FIB points at missing link " + node_id + "->" + fe.next_hop);
  act.kind = ForwardKind::Forwarded;
  act.next_hop = fe.next_hop;
  act.link_delay_us = link->delay_us;
  act.out_pkt = pkt;
  act.out_pkt.label = fe.out_label;
  return act;
}

}  // namespace gos

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gos/buffer.hpp"
#include "gos/control_plane.hpp"
#include "gos/forwarding.hpp"
#include "gos/packet.hpp"
#include "gos/state_machine.hpp"
#include "gos/topology.hpp"

namespace gos {

// Runtime state of one node: signaled tables plus data-plane machinery.
struct NodeRuntime {
  std::map<uint32_t, FibEntry> fib;           // in_label -> entry
  std::map<uint32_t, GosTableEntry> gos_table;  // fec -> entry
  uint32_t next_label = kMinLabel;
  uint64_t reserved_units = 0;  // admission bookkeeping, in reservation units
  GosBuffer buffer;
  GosStateMachine sm;
  std::map<uint32_t, GapTracker> gap;  // fec -> tracker (privileged flows only)
  uint64_t win_in = 0;   // data arrivals in the current sample window
  uint64_t win_out = 0;  // forwards + deliveries in the current sample window
};

class Network {
 public:
  explicit Network(const Topology& topo);

  const Topology& topo() const { return *topo_; }

  NodeRuntime& node(size_t idx) { return nodes_[idx]; }
  const NodeRuntime& node(size_t idx) const { return nodes_[idx]; }
  NodeRuntime& node(const std::string& id);
  const NodeRuntime* find_node(const std::string& id) const;
  size_t size() const { return nodes_.size(); }

  uint32_t alloc_label(size_t node_idx);  // throws SignalError when exhausted

  bool fec_signaled(uint32_t fec) const { return lsps_.count(fec) != 0; }
  const LspDescriptor* find_lsp(uint32_t fec) const;
  void store_lsp(LspDescriptor lsp);
  void erase_lsp(uint32_t fec);
  const std::map<uint32_t, LspDescriptor>& lsps() const { return lsps_; }

 private:
  const Topology* topo_;
  std::vector<NodeRuntime> nodes_;
  std::map<uint32_t, LspDescriptor> lsps_;
};

enum class ForwardKind : uint8_t { Forwarded, Delivered, Dropped, NoFib };

struct ForwardAction {
  ForwardKind kind = ForwardKind::NoFib;
  std::string next_hop;
  int64_t link_delay_us = 0;
  DataPacket out_pkt;  // label-swapped packet, on Forwarded
};

// One label-switching step at a node. The congestion decision is the
// caller's (`drop`); a GoS-capable node with the flow registered copies the
// packet into its buffer before forwarding. gos_enabled false disables all
// buffering (E-E baseline runs).
ForwardAction forward_packet(Network& net, const std::string& node_id, const DataPacket& pkt,
                             bool drop, bool gos_enabled = true);

}  // namespace gos

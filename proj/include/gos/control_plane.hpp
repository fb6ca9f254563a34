#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gos/codec.hpp"
#include "gos/topology.hpp"

namespace gos {

class Network;

inline constexpr uint32_t kMinLabel = 16;
inline constexpr uint32_t kMaxLabel = (1u << 20) - 1;

struct FibEntry {
  uint32_t in_label = 0;
  uint32_t out_label = 0;   // 0 at the egress
  std::string next_hop;     // empty at the egress
  uint32_t fec = 0;

  bool operator==(const FibEntry&) const = default;
};

struct GosTableEntry {
  uint32_t fec = 0;
  GosLevel level;
  uint32_t gosp_phop = 0;  // previous GoS hop address; 0 marks the GoSP head

  bool operator==(const GosTableEntry&) const = default;
};

struct LspDescriptor {
  uint32_t fec = 0;
  RoutePath route;
  GosLevel level;                  // granted level; 0 means unprivileged
  std::vector<std::string> gosp;   // GoS-capable route nodes, in route order

  bool operator==(const LspDescriptor&) const = default;
};

struct SignalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SignalOptions {
  // Every control message crosses the codec (encode then decode) so that
  // signaling only ever uses values that survive the wire format.
  bool through_codec = true;
  // Buffer admission: a GoS node grants min(requested, remaining capacity in
  // units of this many bytes per level step).
  uint64_t reservation_unit_bytes = 1500;
  // Optional transcript of (node id, message) pairs as processed.
  std::vector<std::pair<std::string, ControlMessage>>* transcript = nullptr;
};

// Propagates an extended Path downstream and an extended Resv upstream.
// Receiving GoS nodes record {fec, level, upstream GoS hop} and the Path's
// PHOP field is rewritten at each GoS hop; labels are assigned on the Resv
// pass. Throws SignalError on invalid route, duplicate fec, label exhaustion.
LspDescriptor signal_lsp(Network& net, const RoutePath& route, uint32_t fec, GosLevel level,
                         const SignalOptions& opts = {});

std::optional<GosTableEntry> gos_table_lookup(const Network& net, const std::string& node_id,
                                              uint32_t fec);

struct TeardownCounts {
  size_t fib_rows = 0;
  size_t gos_rows = 0;
  size_t buffered_dropped = 0;
};

// Removes all FIB and GoS state for the fec; buffered packets are dropped.
TeardownCounts teardown_lsp(Network& net, uint32_t fec);

}  // namespace gos

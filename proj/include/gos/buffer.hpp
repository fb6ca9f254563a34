#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "gos/packet.hpp"

namespace gos {

// Per-node store of privileged-flow packets awaiting possible local
// retransmission requests. Capacity is split between registered flows in
// proportion to their GoS levels; eviction is oldest-inserted-first within
// the flow that is inserting.
class GosBuffer {
 public:
  GosBuffer() = default;
  explicit GosBuffer(uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

  uint64_t capacity_bytes() const { return capacity_; }

  void register_flow(uint32_t fec, uint16_t level);
  // Returns the number of stored packets dropped with the flow.
  size_t deregister_flow(uint32_t fec);

  bool registered(uint32_t fec) const { return flows_.count(fec) != 0; }
  uint64_t quota_bytes(uint32_t fec) const;

  struct InsertResult {
    bool stored = false;
    size_t evicted = 0;
  };
  InsertResult insert(const DataPacket& pkt);

  std::optional<DataPacket> lookup(uint32_t fec, uint32_t packet_id) const;

  // Evicts the oldest packet of the flow; false when nothing is stored.
  bool evict_oldest(uint32_t fec);

  size_t stored_count(uint32_t fec) const;
  uint64_t stored_bytes(uint32_t fec) const;
  uint64_t total_bytes() const { return total_bytes_; }

  // Live packet ids in insertion order, for invariant checks.
  std::vector<uint32_t> stored_ids(uint32_t fec) const;

 private:
  struct FlowBuf {
    uint16_t level = 0;
    uint64_t quota = 0;
    uint64_t bytes = 0;
    std::map<uint64_t, DataPacket> store;       // insertion seq -> packet
    std::map<uint32_t, uint64_t> by_packet_id;  // packet id -> insertion seq
  };

  void recompute_quotas();

  uint64_t capacity_ = 0;
  uint64_t next_seq_ = 0;
  uint64_t total_bytes_ = 0;
  std::map<uint32_t, FlowBuf> flows_;
};

}  // namespace gos

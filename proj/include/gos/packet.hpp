#pragma once

#include <cstdint>

namespace gos {

struct DataPacket {
  uint32_t label = 0;       // 20-bit MPLS label as carried on the current hop
  uint32_t fec = 0;
  uint32_t packet_id = 0;   // strictly increasing per flow in emission order
  uint32_t size_bytes = 0;
  int64_t created_at_us = 0;
  uint32_t attempt = 0;     // 0 on first pass, bumped per retransmission pass

  bool operator==(const DataPacket&) const = default;
};

}  // namespace gos

#include "gos/buffer.hpp"

namespace gos {

void GosBuffer::register_flow(uint32_t fec, uint16_t level) {
  auto& f = flows_[fec];
  f.level = level;
  recompute_quotas();
}

size_t GosBuffer::deregister_flow(uint32_t fec) {
  auto it = flows_.find(fec);
  if (it == flows_.end()) return 0;
  const size_t dropped = it->second.store.size();
  total_bytes_ -= it->second.bytes;
  flows_.erase(it);
  recompute_quotas();
  return dropped;
}

uint64_t GosBuffer::quota_bytes(uint32_t fec) const {
  auto it = flows_.find(fec);
  return it == flows_.end() ? 0 : it->second.quota;
}

void GosBuffer::recompute_quotas() {
  uint64_t level_sum = 0;
  for (const auto& [fec, f] : flows_) level_sum += f.level;
  for (auto& [fec, f] : flows_) {
    f.quota = level_sum == 0 ? 0 : capacity_ * f.level / level_sum;
    // Quotas can shrink when a new flow registers; trim immediately.
    while (f.bytes > f.quota && !f.store.empty()) {
      auto oldest = f.store.begin();
      f.bytes -= oldest->second.size_bytes;
      total_bytes_ -= oldest->second.size_bytes;
      f.by_packet_id.erase(oldest->second.packet_id);
      f.store.erase(oldest);
    }
  }
}

GosBuffer::InsertResult GosBuffer::insert(const DataPacket& pkt) {
  InsertResult res;
  auto it = flows_.find(pkt.fec);
  if (it == flows_.end()) return res;  // unregistered flows are not stored
  auto& f = it->second;
  if (pkt.size_bytes > f.quota) return res;

  // A re-buffered copy (recovered packet on its second pass) replaces the
  // stale entry rather than duplicating the id.
  if (auto old = f.by_packet_id.find(pkt.packet_id); old != f.by_packet_id.end()) {
    auto st = f.store.find(old->second);
    f.bytes -= st->second.size_bytes;
    total_bytes_ -= st->second.size_bytes;
    f.store.erase(st);
    f.by_packet_id.erase(old);
  }

  while (f.bytes + pkt.size_bytes > f.quota && !f.store.empty()) {
    auto oldest = f.store.begin();
    f.bytes -= oldest->second.size_bytes;
    total_bytes_ -= oldest->second.size_bytes;
    f.by_packet_id.erase(oldest->second.packet_id);
    f.store.erase(oldest);
    ++res.evicted;
  }
  const uint64_t seq = next_seq_++;
  f.store.emplace(seq, pkt);
  f.by_packet_id[pkt.packet_id] = seq;
  f.bytes += pkt.size_bytes;
  total_bytes_ += pkt.size_bytes;
  res.stored = true;
  return res;
}

std::optional<DataPacket> GosBuffer::lookup(uint32_t fec, uint32_t packet_id) const {
  auto it = flows_.find(fec);
  if (it == flows_.end()) return std::nullopt;
  auto seq = it->second.by_packet_id.find(packet_id);
  if (seq == it->second.by_packet_id.end()) return std::nullopt;
  return it->second.store.at(seq->second);
}

bool GosBuffer::evict_oldest(uint32_t fec) {
  auto it = flows_.find(fec);
  if (it == flows_.end() || it->second.store.empty()) return false;
  auto& f = it->second;
  auto oldest = f.store.begin();
  f.bytes -= oldest->second.size_bytes;
  total_bytes_ -= oldest->second.size_bytes;
  f.by_packet_id.erase(oldest->second.packet_id);
  f.store.erase(oldest);
  return true;
}

size_t GosBuffer::stored_count(uint32_t fec) const {
  auto it = flows_.find(fec);
  return it == flows_.end() ? 0 : it->second.store.size();
}

uint64_t GosBuffer::stored_bytes(uint32_t fec) const {
  auto it = flows_.find(fec);
  return it == flows_.end() ? 0 : it->second.bytes;
}

std::vector<uint32_t> GosBuffer::stored_ids(uint32_t fec) const {
  std::vector<uint32_t> out;
  auto it = flows_.find(fec);
  if (it == flows_.end()) return out;
  out.reserve(it->second.store.size());
  for (const auto& [seq, pkt] : it->second.store) out.push_back(pkt.packet_id);
  return out;
}

}  // namespace gos

#include "gos/forwarding.hpp"

#include <cmath>

#include "gos/rng.hpp"

namespace gos {

void GapTracker::absorb(uint32_t packet_id) {
  if (packet_id == hc_ + 1) {
    hc_ = packet_id;
    while (!ahead_.empty() && *ahead_.begin() == hc_ + 1) {
      hc_ = *ahead_.begin();
      ahead_.erase(ahead_.begin());
    }
  } else if (packet_id > hc_) {
    ahead_.insert(packet_id);
  }
}

GapTracker::Update GapTracker::on_arrival(uint32_t packet_id) {
  Update upd;
  if (packet_id <= hc_ || ahead_.count(packet_id)) {
    upd.duplicate = true;
    return upd;
  }
  if (auto it = pending_.find(packet_id); it != pending_.end()) {
    // A pending id showed up within its window: reordering, not loss.
    pending_.erase(it);
    absorb(packet_id);
    return upd;
  }

  // A genuinely new id: every open gap ages by one arrival.
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (++it->second >= window_) {
      upd.declared.push_back(it->first);
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }

  // Ids skipped over by this arrival open new gaps.
  for (uint32_t missing = hc_ + 1; missing < packet_id; ++missing)
    if (!ahead_.count(missing) && !pending_.count(missing)) pending_.emplace(missing, 0);

  absorb(packet_id);

  // Declared ids are accounted for elsewhere from now on.
  for (uint32_t d : upd.declared) absorb(d);
  return upd;
}

void GapTracker::note_handled(uint32_t packet_id) {
  pending_.erase(packet_id);
  if (packet_id > hc_ && !ahead_.count(packet_id)) absorb(packet_id);
}

DropModel::DropModel(DropMode mode, double rate, uint64_t seed, std::vector<uint64_t> node_keys,
                     std::vector<bool> node_active, std::set<InjectionKey> injected)
    : seed_(seed), node_keys_(std::move(node_keys)), node_active_(std::move(node_active)),
      injected_(std::move(injected)) {
  if (mode == DropMode::Bernoulli) {
    const double r = rate < 0 ? 0 : rate;
    threshold_ = r >= 1.0 ? UINT64_MAX
                          : static_cast<uint64_t>(r * 18446744073709551616.0);
  }
}

bool DropModel::should_drop(size_t node_idx, uint32_t fec, uint32_t packet_id,
                            uint32_t attempt) const {
  if (!injected_.empty() && injected_.count({node_idx, fec, packet_id, attempt})) return true;
  if (threshold_ == 0) return false;
  if (node_idx >= node_active_.size() || !node_active_[node_idx]) return false;
  const uint64_t coin = hash_mix(seed_, node_keys_[node_idx],
                                 static_cast<uint64_t>(fec) << 32 | packet_id, attempt);
  return coin < threshold_;
}

}  // namespace gos

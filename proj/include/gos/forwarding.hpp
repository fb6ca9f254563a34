#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace gos {

// Packet-id gap detection with a reorder window: a missing id is declared
// lost only after `window` further new ids arrive without it showing up.
class GapTracker {
 public:
  explicit GapTracker(int window) : window_(window) {}

  struct Update {
    std::vector<uint32_t> declared;  // ids confirmed missing by this arrival
    bool duplicate = false;          // arrival was old or already seen
  };

  Update on_arrival(uint32_t packet_id);

  // Marks an id as accounted for locally (the node itself dropped it and is
  // handling the loss); keeps the gap logic from re-declaring it here.
  void note_handled(uint32_t packet_id);

  uint32_t highest_contiguous() const { return hc_; }
  size_t pending_count() const { return pending_.size(); }

 private:
  void absorb(uint32_t packet_id);  // fold an id into hc_/ahead_

  int window_;
  uint32_t hc_ = 0;  // ids start at 1; 0 means nothing seen
  std::map<uint32_t, int> pending_;  // missing id -> new arrivals since gap opened
  std::set<uint32_t> ahead_;         // ids seen beyond hc_
};

// Eq. (2) check: the flow conservation law is violated in a window when more
// packets entered a node than left it.
inline bool congestion_violated(uint64_t in_count, uint64_t out_count) {
  return in_count > out_count;
}

struct InjectedDrop {
  std::string node;
  uint32_t fec = 0;
  uint32_t packet_id = 0;
  uint32_t attempt = 0;
};

enum class DropMode : uint8_t { None, Bernoulli, Queue };

struct DropConfig {
  DropMode mode = DropMode::None;
  double rate = 0.0;          // Bernoulli per-node arrival drop probability
  bool nodes_all = false;     // apply at every node
  bool nodes_gos = false;     // apply at GoS-marked nodes
  std::set<std::string> node_ids;
  int queue_cap = 0;          // Queue mode: max packets awaiting service
  std::vector<InjectedDrop> injections;
};

// Seed-bound Bernoulli drop decisions, keyed per (node, fec, packet id,
// attempt) so paired runs see identical first-pass losses. Injections are
// pre-resolved to node indices by the caller.
class DropModel {
 public:
  using InjectionKey = std::tuple<size_t, uint32_t, uint32_t, uint32_t>;

  DropModel() = default;
  DropModel(DropMode mode, double rate, uint64_t seed, std::vector<uint64_t> node_keys,
            std::vector<bool> node_active, std::set<InjectionKey> injected);

  bool should_drop(size_t node_idx, uint32_t fec, uint32_t packet_id, uint32_t attempt) const;

 private:
  uint64_t seed_ = 0;
  uint64_t threshold_ = 0;  // rate scaled to 2^64
  std::vector<uint64_t> node_keys_;
  std::vector<bool> node_active_;
  std::set<InjectionKey> injected_;
};

}  // namespace gos

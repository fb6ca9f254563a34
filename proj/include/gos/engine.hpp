#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "gos/metrics.hpp"
#include "gos/network.hpp"
#include "gos/rng.hpp"
#include "gos/scenario.hpp"

namespace gos {

struct EngineOptions {
  std::ostream* trace = nullptr;   // event trace sink, one line per event
  bool conservation_strict = false;  // throw on a conservation violation
  bool record_first_pass_drops = false;  // CRN pairing test hook
  std::optional<bool> gos_enabled;       // overrides the scenario setting
};

// Deterministic single-run simulator: identical (scenario, seed) pairs
// produce identical event traces and metrics.
class SimEngine {
 public:
  SimEngine(const ScenarioSpec& spec, uint64_t seed, EngineOptions opts = {});
  ~SimEngine();

  MetricsSeries run();

  const Topology& topo() const { return topo_; }
  const Network& net() const { return *net_; }
  const std::vector<LspDescriptor>& lsps() const { return lsps_; }
  const std::vector<std::string>& first_pass_drop_log() const { return first_pass_drops_; }

 private:
  enum class EvKind : uint8_t { FlowStart, Emit, Arrive, Ctrl, Ack, Rto, ReqTimeout, Tick };

  struct Ev {
    int64_t t = 0;
    uint64_t seq = 0;
    EvKind kind = EvKind::Tick;
    uint32_t fec = 0;
    uint32_t pid = 0;
    size_t node = 0;
    size_t from = 0;
    uint32_t cum = 0;
    uint32_t echo = 0;
    DataPacket pkt;
    std::vector<uint8_t> wire;
  };
  struct EvAfter {
    bool operator()(const Ev& a, const Ev& b) const {
      if (a.t != b.t) return a.t > b.t;
      return a.seq > b.seq;
    }
  };

  enum class Bucket : uint8_t { InFlight, Pending, Lost, Delivered };

  struct PidState {
    int copies = 0;
    int pending = 0;
    bool delivered = false;
    bool rto_hit = false;
    Bucket bucket = Bucket::InFlight;
  };

  struct FlowRt {
    FlowSpec spec;
    RoutePath route;
    std::vector<size_t> node_idx;
    std::vector<int64_t> link_delay;
    LspDescriptor lsp;
    std::map<size_t, size_t> route_pos;  // topo index -> route position
    bool privileged = false;
    uint32_t ingress_label = 0;
    int64_t start_us = 0;
    int64_t stop_us = 0;
    int64_t interval_us = 1;
    int64_t planned = 0;
    uint32_t next_pid = 1;
    int64_t rto_us = 0;
    int64_t ack_one_way_us = 0;
    std::map<uint32_t, int64_t> unacked;       // pid -> last send time
    std::map<uint32_t, int64_t> retx_sent_at;  // pid -> last head retransmission
    uint32_t delivered_upto = 0;
    std::set<uint32_t> delivered_ahead;
    std::unordered_map<uint32_t, PidState> pid_state;
    int64_t n_inflight = 0, n_pending = 0, n_lost = 0, n_delivered = 0;
    int64_t window_bits = 0;
    FlowTotals totals;
    std::unordered_map<uint32_t, uint32_t> next_attempt;  // pid -> next attempt nr
    std::unique_ptr<Rng> emit_rng;                        // poisson gaps
  };

  struct Job {
    bool is_req = false;
    uint32_t fec = 0;
    uint32_t pid = 0;
    size_t requester = 0;  // node index, requests only
  };

  struct Outstanding {
    uint32_t fec = 0;
    uint32_t pid = 0;
    int64_t sent_at = 0;
  };

  struct NodeAux {
    std::deque<Job> jobs;
    std::optional<Outstanding> outstanding;
  };

  struct Episode {
    int reqs = 0;
    size_t detector = 0;
    int64_t start_us = 0;
  };

  struct AwaitLrp {
    size_t detector = 0;
    int64_t start_us = 0;
    size_t record_slot = 0;
  };

  void setup();
  void schedule(Ev ev);
  void dispatch(const Ev& ev);

  void on_flow_start(uint32_t fec);
  void on_emit(uint32_t fec);
  void on_arrive(size_t node, const DataPacket& pkt);
  void on_ctrl(size_t node, size_t from, const std::vector<uint8_t>& wire);
  void on_ack(uint32_t fec, uint32_t cum, uint32_t echo);
  void on_rto(uint32_t fec, uint32_t pid);
  void on_req_timeout(size_t node, uint32_t fec, uint32_t pid);
  void on_tick();

  void process_at(size_t node, const DataPacket& pkt, bool just_emitted);
  void handle_drop_at(size_t node, const DataPacket& pkt);
  void open_recovery(size_t detector, uint32_t fec, uint32_t pid);
  void pump_jobs(size_t node);
  void handle_loss_job(size_t node, const Job& job);
  void handle_req_job(size_t node, const Job& job);
  void send_gos_req(size_t from, uint32_t phop_addr, uint32_t fec, uint32_t pid);
  void deliver(FlowRt& f, const DataPacket& pkt, size_t node);
  void close_exhausted(uint32_t fec, uint32_t pid, size_t at_node);

  FlowRt& flow(uint32_t fec);
  int64_t scaled(int64_t delay, const FlowRt& f) const;
  int64_t span_delay(const FlowRt& f, size_t up_pos, size_t down_pos) const;  // scaled
  uint32_t take_attempt(FlowRt& f, uint32_t pid);

  void inc_copies(FlowRt& f, uint32_t pid);
  void dec_copies(FlowRt& f, uint32_t pid);
  void inc_pending(FlowRt& f, uint32_t pid);
  void dec_pending(FlowRt& f, uint32_t pid);
  void mark_delivered(FlowRt& f, uint32_t pid);
  void reclassify(FlowRt& f, uint32_t pid);

  void trace(const std::string& node, const char* ev, uint32_t fec, uint32_t pid,
             const std::string& detail);

  ScenarioSpec spec_;
  uint64_t seed_;
  EngineOptions opts_;
  bool gos_on_ = true;

  Topology topo_;
  std::unique_ptr<Network> net_;
  std::vector<LspDescriptor> lsps_;
  std::vector<FlowRt> flows_;
  std::map<uint32_t, size_t> flow_index_;
  std::vector<NodeAux> aux_;
  DropModel drop_model_;
  std::vector<std::deque<int64_t>> link_queue_;  // queue mode departures per link

  std::priority_queue<Ev, std::vector<Ev>, EvAfter> queue_;
  uint64_t next_seq_ = 0;
  int64_t now_ = 0;
  int64_t duration_us_ = 0;
  int64_t tick_us_ = 0;

  std::map<std::pair<uint32_t, uint32_t>, Episode> episodes_;
  std::map<std::pair<uint32_t, uint32_t>, AwaitLrp> await_lrp_;
  std::vector<RecoveryRecord> records_;
  std::map<int, int64_t> diameter_hist_;
  int64_t exhausted_ = 0;
  std::vector<int64_t> recovery_latencies_;
  std::vector<int64_t> head_retx_latencies_;
  int64_t congestion_violations_ = 0;
  bool conservation_ok_ = true;
  std::vector<TickRow> tick_rows_;
  std::vector<std::string> first_pass_drops_;
};

MetricsSeries run_scenario(const ScenarioSpec& spec, uint64_t seed, EngineOptions opts = {});

}  // namespace gos

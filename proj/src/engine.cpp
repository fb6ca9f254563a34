#include "gos/engine.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace gos {

SimEngine::SimEngine(const ScenarioSpec& spec, uint64_t seed, EngineOptions opts)
    : spec_(spec), seed_(seed), opts_(opts) {
  gos_on_ = opts_.gos_enabled.value_or(spec_.gos_enabled);
  setup();
}

SimEngine::~SimEngine() = default;

void SimEngine::setup() {
  topo_ = realize_topology(spec_);

  // Routes are delay-only, so they can be computed before GoS marking.
  std::vector<RoutePath> routes;
  routes.reserve(spec_.flows.size());
  std::vector<std::string> problems;
  for (const auto& f : spec_.flows) {
    try {
      routes.push_back(shortest_delay_path(topo_, f.src, f.dst));
    } catch (const RouteError& e) {
      problems.push_back("flow fec=" + std::to_string(f.fec) + " (line " +
                         std::to_string(f.line) + "): " + e.what());
      routes.emplace_back();
    }
  }
  validate_scenario(spec_, topo_);
  if (!problems.empty()) throw ScenarioError(std::move(problems));

  apply_gos_marking(topo_, spec_, routes);
  net_ = std::make_unique<Network>(topo_);
  aux_.resize(topo_.nodes().size());
  link_queue_.resize(topo_.links().size());

  duration_us_ = static_cast<int64_t>(std::llround(spec_.duration_s * 1e6));
  tick_us_ = static_cast<int64_t>(std::llround(spec_.sample_interval_s * 1e6));

  // Signal every LSP before data flows; the E-E baseline signals level 0.
  SignalOptions sopts;
  sopts.reservation_unit_bytes = spec_.reservation_unit_bytes;
  for (size_t i = 0; i < spec_.flows.size(); ++i) {
    const FlowSpec& fs = spec_.flows[i];
    const GosLevel level = gos_on_ ? fs.level : GosLevel{0};
    LspDescriptor lsp = signal_lsp(*net_, routes[i], fs.fec, level, sopts);
    lsps_.push_back(lsp);

    FlowRt f;
    f.spec = fs;
    f.route = routes[i];
    f.lsp = lsp;
    f.privileged = lsp.level.value > 0;
    for (const auto& id : f.route.nodes) f.node_idx.push_back(*topo_.node_index(id));
    f.link_delay = route_link_delays(topo_, f.route);
    for (size_t p = 0; p < f.node_idx.size(); ++p) f.route_pos[f.node_idx[p]] = p;
    f.ingress_label = 0;
    for (const auto& [label, fe] : net_->node(f.node_idx[0]).fib)
      if (fe.fec == fs.fec) f.ingress_label = label;

    f.start_us = static_cast<int64_t>(std::llround(fs.start_s * 1e6));
    f.stop_us = fs.stop_s < 0 ? duration_us_
                              : std::min(duration_us_,
                                         static_cast<int64_t>(std::llround(fs.stop_s * 1e6)));
    const double bits = static_cast<double>(fs.packet_size_bytes) * 8.0;
    f.interval_us = std::max<int64_t>(
        1, static_cast<int64_t>(std::llround(bits * 1e6 / static_cast<double>(fs.rate_bps))));
    if (f.stop_us > f.start_us) {
      if (spec_.poisson)
        f.planned = static_cast<int64_t>(
            std::llround(static_cast<double>(f.stop_us - f.start_us) / f.interval_us));
      else
        f.planned = (f.stop_us - f.start_us - 1) / f.interval_us + 1;
    }
    int64_t data_one_way = 0;
    int64_t ack_one_way = 0;
    for (int64_t d : f.link_delay) {
      data_one_way += scaled_or(d, f.privileged);
      ack_one_way += d;
    }
    f.ack_one_way_us = ack_one_way;
    f.rto_us = 2 * (data_one_way + ack_one_way);
    if (spec_.poisson)
      f.emit_rng = std::make_unique<Rng>(hash_mix(seed_, fs.fec, 0xE317u));

    // Gap trackers sit at GoS route nodes that have an upstream GoS hop.
    if (f.privileged) {
      for (size_t g = 1; g < lsp.gosp.size(); ++g) {
        const size_t nidx = *topo_.node_index(lsp.gosp[g]);
        net_->node(nidx).gap.emplace(fs.fec, GapTracker(spec_.reorder_window));
      }
    }

    flow_index_[fs.fec] = flows_.size();
    flows_.push_back(std::move(f));
  }

  // Drop model binding: node keys, active set, resolved injections.
  std::vector<uint64_t> keys;
  std::vector<bool> active(topo_.nodes().size(), false);
  keys.reserve(topo_.nodes().size());
  for (const auto& n : topo_.nodes()) keys.push_back(fnv1a(n.id));
  if (spec_.drop.mode == DropMode::Bernoulli) {
    for (size_t i = 0; i < topo_.nodes().size(); ++i) {
      const NodeSpec& n = topo_.node(i);
      if (spec_.drop.nodes_all)
        active[i] = true;
      else if (spec_.drop.nodes_gos)
        active[i] = n.gos_capable;
      else
        active[i] = spec_.drop.node_ids.count(n.id) != 0;
    }
  }
  std::set<DropModel::InjectionKey> injected;
  for (const auto& inj : spec_.drop.injections)
    injected.insert({*topo_.node_index(inj.node), inj.fec, inj.packet_id, inj.attempt});
  drop_model_ = DropModel(spec_.drop.mode, spec_.drop.rate, seed_, std::move(keys),
                          std::move(active), std::move(injected));
}

void SimEngine::schedule(Ev ev) {
  ev.seq = next_seq_++;
  queue_.push(std::move(ev));
}

SimEngine::FlowRt& SimEngine::flow(uint32_t fec) { return flows_[flow_index_.at(fec)]; }

int64_t SimEngine::scaled(int64_t delay, const FlowRt& f) const {
  return scaled_or(delay, f.privileged);
}

int64_t SimEngine::span_delay(const FlowRt& f, size_t up_pos, size_t down_pos) const {
  int64_t sum = 0;
  for (size_t l = up_pos; l < down_pos; ++l) sum += f.link_delay[l];
  return scaled(sum, f);
}

uint32_t SimEngine::take_attempt(FlowRt& f, uint32_t pid) {
  uint32_t& next = f.next_attempt[pid];
  if (next == 0) next = 1;
  return next++;
}

void SimEngine::trace(const std::string& node, const char* ev, uint32_t fec, uint32_t pid,
                      const std::string& detail) {
  if (!opts_.trace) return;
  (*opts_.trace) << "t=" << now_ << " node=" << node << " ev=" << ev << " fec=" << fec
                 << " pid=" << pid << " detail=" << detail << '\n';
}

// ---- per-pid accounting -------------------------------------------------

void SimEngine::reclassify(FlowRt& f, uint32_t pid) {
  PidState& st = f.pid_state[pid];
  const Bucket next = st.delivered  ? Bucket::Delivered
                      : st.copies > 0 ? Bucket::InFlight
                      : st.pending > 0 ? Bucket::Pending
                                        : Bucket::Lost;
  if (next == st.bucket) return;
  auto counter = [&](Bucket b) -> int64_t& {
    switch (b) {
      case Bucket::InFlight: return f.n_inflight;
      case Bucket::Pending: return f.n_pending;
      case Bucket::Lost: return f.n_lost;
      default: return f.n_delivered;
    }
  };
  counter(st.bucket)--;
  counter(next)++;
  st.bucket = next;
}

void SimEngine::inc_copies(FlowRt& f, uint32_t pid) {
  f.pid_state[pid].copies++;
  reclassify(f, pid);
}

void SimEngine::dec_copies(FlowRt& f, uint32_t pid) {
  PidState& st = f.pid_state[pid];
  assert(st.copies > 0);
  st.copies--;
  reclassify(f, pid);
}

void SimEngine::inc_pending(FlowRt& f, uint32_t pid) {
  f.pid_state[pid].pending++;
  reclassify(f, pid);
}

void SimEngine::dec_pending(FlowRt& f, uint32_t pid) {
  PidState& st = f.pid_state[pid];
  assert(st.pending > 0);
  st.pending--;
  reclassify(f, pid);
}

void SimEngine::mark_delivered(FlowRt& f, uint32_t pid) {
  f.pid_state[pid].delivered = true;
  reclassify(f, pid);
}

// ---- event loop ----------------------------------------------------------

MetricsSeries SimEngine::run() {
  for (auto& f : flows_) {
    Ev ev;
    ev.kind = EvKind::FlowStart;
    ev.t = f.start_us;
    ev.fec = f.spec.fec;
    schedule(ev);
  }
  {
    Ev tick;
    tick.kind = EvKind::Tick;
    tick.t = std::min(tick_us_, duration_us_);
    schedule(tick);
  }

  while (!queue_.empty()) {
    Ev ev = queue_.top();
    queue_.pop();
    if (ev.t > duration_us_) break;
    if (ev.t < now_) throw std::logic_error("event time went backwards");
    now_ = ev.t;
    dispatch(ev);
  }

  MetricsSeries m;
  for (auto& f : flows_) {
    if (spec_.poisson) f.totals.planned = f.planned;  // expectation-based
    f.totals.planned = f.planned;
    m.flows[f.spec.fec] = f.totals;
  }
  m.ticks = tick_rows_;
  m.recoveries = records_;
  m.diameter_histogram = diameter_hist_;
  m.exhausted = exhausted_;
  m.recovery_latencies_us = recovery_latencies_;
  m.head_retx_latencies_us = head_retx_latencies_;
  m.congestion_violations = congestion_violations_;
  m.conservation_ok = conservation_ok_;
  return m;
}

void SimEngine::dispatch(const Ev& ev) {
  switch (ev.kind) {
    case EvKind::FlowStart: on_flow_start(ev.fec); break;
    case EvKind::Emit: on_emit(ev.fec); break;
    case EvKind::Arrive: on_arrive(ev.node, ev.pkt); break;
    case EvKind::Ctrl: on_ctrl(ev.node, ev.from, ev.wire); break;
    case EvKind::Ack: on_ack(ev.fec, ev.cum, ev.echo); break;
    case EvKind::Rto: on_rto(ev.fec, ev.pid); break;
    case EvKind::ReqTimeout: on_req_timeout(ev.node, ev.fec, ev.pid); break;
    case EvKind::Tick: on_tick(); break;
  }
}

void SimEngine::on_flow_start(uint32_t fec) {
  trace(flow(fec).route.nodes.front(), "flow_start", fec, 0, "");
  Ev ev;
  ev.kind = EvKind::Emit;
  ev.t = now_;
  ev.fec = fec;
  schedule(ev);
}

void SimEngine::on_emit(uint32_t fec) {
  FlowRt& f = flow(fec);
  if (now_ >= f.stop_us) return;
  const uint32_t pid = f.next_pid++;
  DataPacket pkt;
  pkt.label = f.ingress_label;
  pkt.fec = fec;
  pkt.packet_id = pid;
  pkt.size_bytes = f.spec.packet_size_bytes;
  pkt.created_at_us = now_;
  pkt.attempt = 0;
  f.totals.emitted++;
  inc_copies(f, pid);
  f.unacked[pid] = now_;
  {
    Ev rto;
    rto.kind = EvKind::Rto;
    rto.t = now_ + f.rto_us;
    rto.fec = fec;
    rto.pid = pid;
    schedule(rto);
  }
  trace(f.route.nodes.front(), "emit", fec, pid, "");
  process_at(f.node_idx[0], pkt, true);

  int64_t next;
  if (spec_.poisson) {
    const double u = f.emit_rng->uniform_real01();
    const double gap = -std::log(1.0 - u) * static_cast<double>(f.interval_us);
    next = now_ + std::max<int64_t>(1, static_cast<int64_t>(std::llround(gap)));
  } else {
    next = now_ + f.interval_us;
  }
  if (next < f.stop_us) {
    Ev ev;
    ev.kind = EvKind::Emit;
    ev.t = next;
    ev.fec = fec;
    schedule(ev);
  }
}

void SimEngine::on_arrive(size_t node, const DataPacket& pkt) { process_at(node, pkt, false); }

void SimEngine::process_at(size_t node, const DataPacket& pkt, bool just_emitted) {
  FlowRt& f = flow(pkt.fec);
  NodeRuntime& nr = net_->node(node);
  const std::string& node_id = topo_.node(node).id;

  if (!just_emitted) {
    nr.win_in++;
    if (drop_model_.should_drop(node, pkt.fec, pkt.packet_id, pkt.attempt)) {
      trace(node_id, "drop", pkt.fec, pkt.packet_id,
            "attempt=" + std::to_string(pkt.attempt));
      f.totals.drops_total++;
      if (pkt.attempt == 0) {
        f.totals.drops_first_pass++;
        if (opts_.record_first_pass_drops)
          first_pass_drops_.push_back(node_id + "/" + std::to_string(pkt.fec) + "/" +
                                      std::to_string(pkt.packet_id));
      }
      dec_copies(f, pkt.packet_id);
      handle_drop_at(node, pkt);
      return;
    }
    if (gos_on_ && f.privileged) {
      if (auto git = nr.gap.find(pkt.fec); git != nr.gap.end()) {
        const GapTracker::Update upd = git->second.on_arrival(pkt.packet_id);
        for (uint32_t miss : upd.declared) {
          trace(node_id, "gap_decl", pkt.fec, miss, "");
          open_recovery(node, pkt.fec, miss);
        }
      }
    }
    if (auto aw = await_lrp_.find({pkt.fec, pkt.packet_id});
        aw != await_lrp_.end() && aw->second.detector == node) {
      const int64_t latency = now_ - aw->second.start_us;
      records_[aw->second.record_slot].latency_us = latency;
      recovery_latencies_.push_back(latency);
      trace(node_id, "lrp_back", pkt.fec, pkt.packet_id,
            "latency_us=" + std::to_string(latency));
      await_lrp_.erase(aw);
    }
  }

  // Queue-mode congestion: tail drop at the egress queue of the out link.
  int64_t extra_wait = 0;
  if (spec_.drop.mode == DropMode::Queue) {
    const auto it = nr.fib.find(pkt.label);
    if (it != nr.fib.end() && !it->second.next_hop.empty()) {
      const LinkSpec* link = topo_.find_link(node_id, it->second.next_hop);
      if (link) {
        // Locate the link index for queue state.
        size_t li = 0;
        for (size_t i = 0; i < topo_.links().size(); ++i) {
          if (&topo_.links()[i] == link) {
            li = i;
            break;
          }
        }
        auto& q = link_queue_[li];
        while (!q.empty() && q.front() <= now_) q.pop_front();
        if (static_cast<int>(q.size()) >= spec_.drop.queue_cap) {
          trace(node_id, "drop", pkt.fec, pkt.packet_id, "queue_full");
          f.totals.drops_total++;
          if (pkt.attempt == 0) f.totals.drops_first_pass++;
          dec_copies(f, pkt.packet_id);
          handle_drop_at(node, pkt);
          return;
        }
        const int64_t tx_us = std::max<int64_t>(
            1, static_cast<int64_t>(std::llround(static_cast<double>(pkt.size_bytes) * 8e6 /
                                                 static_cast<double>(link->capacity_bps))));
        const int64_t start = q.empty() ? now_ : std::max(now_, q.back());
        const int64_t depart = start + tx_us;
        q.push_back(depart);
        extra_wait = depart - now_;
      }
    }
  }

  const ForwardAction act = forward_packet(*net_, node_id, pkt, false, gos_on_);
  switch (act.kind) {
    case ForwardKind::Delivered:
      nr.win_out++;
      deliver(f, pkt, node);
      break;
    case ForwardKind::NoFib:
      trace(node_id, "misroute", pkt.fec, pkt.packet_id, "label=" + std::to_string(pkt.label));
      f.totals.misroutes++;
      dec_copies(f, pkt.packet_id);
      break;
    case ForwardKind::Forwarded: {
      nr.win_out++;
      Ev ev;
      ev.kind = EvKind::Arrive;
      ev.t = now_ + extra_wait + scaled(act.link_delay_us, f);
      ev.node = *topo_.node_index(act.next_hop);
      ev.fec = pkt.fec;
      ev.pid = pkt.packet_id;
      ev.pkt = act.out_pkt;
      schedule(std::move(ev));
      break;
    }
    case ForwardKind::Dropped:
      break;  // unreachable: drop decisions are made above
  }
}

void SimEngine::deliver(FlowRt& f, const DataPacket& pkt, size_t node) {
  const uint32_t pid = pkt.packet_id;
  bool fresh = false;
  if (pid == f.delivered_upto + 1) {
    fresh = true;
    f.delivered_upto = pid;
    while (!f.delivered_ahead.empty() && *f.delivered_ahead.begin() == f.delivered_upto + 1) {
      f.delivered_upto = *f.delivered_ahead.begin();
      f.delivered_ahead.erase(f.delivered_ahead.begin());
    }
  } else if (pid > f.delivered_upto && !f.delivered_ahead.count(pid)) {
    fresh = true;
    f.delivered_ahead.insert(pid);
  }

  if (fresh) {
    f.totals.delivered++;
    f.totals.delivered_bits += static_cast<int64_t>(pkt.size_bytes) * 8;
    f.window_bits += static_cast<int64_t>(pkt.size_bytes) * 8;
    mark_delivered(f, pid);
    trace(topo_.node(node).id, "deliver", pkt.fec, pid, "");
    Ev ack;
    ack.kind = EvKind::Ack;
    ack.t = now_ + f.ack_one_way_us;
    ack.fec = pkt.fec;
    ack.cum = f.delivered_upto + 1;
    ack.echo = pid;
    schedule(ack);
  } else {
    f.totals.duplicates++;
    trace(topo_.node(node).id, "dup", pkt.fec, pid, "");
  }
  dec_copies(f, pid);
}

void SimEngine::handle_drop_at(size_t node, const DataPacket& pkt) {
  FlowRt& f = flow(pkt.fec);
  NodeRuntime& nr = net_->node(node);
  if (gos_on_ && f.privileged && topo_.node(node).gos_capable) {
    if (auto git = nr.gap.find(pkt.fec); git != nr.gap.end())
      git->second.note_handled(pkt.packet_id);
    auto row = nr.gos_table.find(pkt.fec);
    if (row != nr.gos_table.end() && row->second.gosp_phop != 0) {
      open_recovery(node, pkt.fec, pkt.packet_id);
      return;
    }
    // Loss at the GoSP head: nothing upstream holds a copy.
    if (f.pid_state[pkt.packet_id].bucket != Bucket::Delivered) {
      records_.push_back({pkt.fec, pkt.packet_id, false, 0, -1, topo_.node(node).id});
      exhausted_++;
      trace(topo_.node(node).id, "exhausted", pkt.fec, pkt.packet_id, "head_drop");
    }
  }
}

void SimEngine::open_recovery(size_t detector, uint32_t fec, uint32_t pid) {
  const auto key = std::make_pair(fec, pid);
  if (episodes_.count(key)) return;  // a recovery for this loss is already running
  FlowRt& f = flow(fec);
  if (f.pid_state[pid].delivered) return;  // stale declaration
  episodes_[key] = Episode{0, detector, now_};
  inc_pending(f, pid);
  aux_[detector].jobs.push_back(Job{false, fec, pid, 0});
  pump_jobs(detector);
}

void SimEngine::pump_jobs(size_t node) {
  NodeRuntime& nr = net_->node(node);
  while (nr.sm.state() == GosNodeState::DataForwarding && !aux_[node].jobs.empty()) {
    const Job job = aux_[node].jobs.front();
    aux_[node].jobs.pop_front();
    if (job.is_req)
      handle_req_job(node, job);
    else
      handle_loss_job(node, job);
  }
}

void SimEngine::handle_loss_job(size_t node, const Job& job) {
  const auto key = std::make_pair(job.fec, job.pid);
  auto ep = episodes_.find(key);
  if (ep == episodes_.end()) return;
  FlowRt& f = flow(job.fec);
  if (f.pid_state[job.pid].delivered) {
    episodes_.erase(ep);
    dec_pending(f, job.pid);
    return;
  }
  NodeRuntime& nr = net_->node(node);
  auto row = nr.gos_table.find(job.fec);
  if (row == nr.gos_table.end() || row->second.gosp_phop == 0) {
    close_exhausted(job.fec, job.pid, node);
    return;
  }
  nr.sm.apply(GosNodeEvent::LossDetected);
  trace(topo_.node(node).id, "state", job.fec, job.pid, "DataForwarding->LocalRecoveryRequest");
  send_gos_req(node, row->second.gosp_phop, job.fec, job.pid);
}

void SimEngine::send_gos_req(size_t from, uint32_t phop_addr, uint32_t fec, uint32_t pid) {
  const auto dest = topo_.node_index_by_address(phop_addr);
  if (!dest) throw std::logic_error("GoSP PHOP address does not resolve");
  FlowRt& f = flow(fec);
  const size_t up_pos = f.route_pos.at(*dest);
  const size_t down_pos = f.route_pos.at(from);
  const int64_t delay = span_delay(f, up_pos, down_pos);

  HelloReq msg;
  msg.src_instance = topo_.node(from).address;
  msg.dst_instance = phop_addr;
  msg.gos_req = GosReqObject{fec, pid};

  Ev ev;
  ev.kind = EvKind::Ctrl;
  ev.t = now_ + delay;
  ev.node = *dest;
  ev.from = from;
  ev.wire = encode(msg);
  schedule(std::move(ev));

  aux_[from].outstanding = Outstanding{fec, pid, now_};
  episodes_.at({fec, pid}).reqs++;
  trace(topo_.node(from).id, "gosreq_tx", fec, pid, "to=" + topo_.node(*dest).id);

  // Escalation watchdog: 4x the one-hop RTT to the PHOP. Control traffic is
  // never dropped in this model, so this only guards against misuse.
  Ev to;
  to.kind = EvKind::ReqTimeout;
  to.t = now_ + 8 * delay;
  to.node = from;
  to.fec = fec;
  to.pid = pid;
  schedule(to);
}

void SimEngine::on_ctrl(size_t node, size_t from, const std::vector<uint8_t>& wire) {
  const DecodeResult dec = decode(wire);
  if (const auto* req = std::get_if<HelloReq>(&dec.msg)) {
    if (!req->gos_req) return;
    trace(topo_.node(node).id, "gosreq_rx", req->gos_req->flow_id, req->gos_req->packet_id,
          "from=" + topo_.node(from).id);
    aux_[node].jobs.push_back(Job{true, req->gos_req->flow_id, req->gos_req->packet_id, from});
    pump_jobs(node);
    return;
  }
  if (const auto* ack = std::get_if<HelloAck>(&dec.msg)) {
    if (!ack->gos_ack) return;
    const GosAckObject& a = *ack->gos_ack;
    trace(topo_.node(node).id, "gosack_rx", a.flow_id, a.packet_id,
          std::string("found=") + (a.found ? "1" : "0"));
    auto& out = aux_[node].outstanding;
    if (out && out->fec == a.flow_id && out->pid == a.packet_id) {
      out.reset();
      net_->node(node).sm.apply(GosNodeEvent::GosAckReceived);
      trace(topo_.node(node).id, "state", a.flow_id, a.packet_id,
            "LocalRecoveryRequest->DataForwarding");
      pump_jobs(node);
    }
  }
}

void SimEngine::handle_req_job(size_t node, const Job& job) {
  NodeRuntime& nr = net_->node(node);
  const std::string& node_id = topo_.node(node).id;
  FlowRt& f = flow(job.fec);
  nr.sm.apply(GosNodeEvent::GosReqReceived);
  trace(node_id, "state", job.fec, job.pid, "DataForwarding->BufferAccess");

  const std::optional<DataPacket> stored = nr.buffer.lookup(job.fec, job.pid);

  HelloAck ack;
  ack.src_instance = topo_.node(node).address;
  ack.dst_instance = topo_.node(job.requester).address;
  ack.gos_ack = GosAckObject{job.fec, job.pid, stored.has_value()};
  {
    const size_t up_pos = f.route_pos.at(node);
    const size_t down_pos = f.route_pos.at(job.requester);
    Ev ev;
    ev.kind = EvKind::Ctrl;
    ev.t = now_ + span_delay(f, up_pos, down_pos);
    ev.node = job.requester;
    ev.from = node;
    ev.wire = encode(ack);
    schedule(std::move(ev));
    trace(node_id, "gosack_tx", job.fec, job.pid,
          std::string("found=") + (stored ? "1" : "0"));
  }

  if (stored) {
    nr.sm.apply(GosNodeEvent::PacketFound);
    trace(node_id, "state", job.fec, job.pid, "BufferAccess->LocalRetransmission");

    const auto key = std::make_pair(job.fec, job.pid);
    if (auto ep = episodes_.find(key); ep != episodes_.end()) {
      records_.push_back({job.fec, job.pid, true, ep->second.reqs, -1,
                          topo_.node(ep->second.detector).id});
      diameter_hist_[ep->second.reqs]++;
      await_lrp_[key] = AwaitLrp{ep->second.detector, ep->second.start_us, records_.size() - 1};
      episodes_.erase(ep);
      dec_pending(f, job.pid);
    }

    DataPacket lrp = *stored;
    lrp.attempt = take_attempt(f, job.pid);
    inc_copies(f, job.pid);
    trace(node_id, "lrp_tx", job.fec, job.pid, "attempt=" + std::to_string(lrp.attempt));
    nr.sm.apply(GosNodeEvent::RetransmitDone);
    trace(node_id, "state", job.fec, job.pid, "LocalRetransmission->DataForwarding");
    process_at(node, lrp, true);
  } else {
    nr.sm.apply(GosNodeEvent::PacketNotFound);
    trace(node_id, "state", job.fec, job.pid, "BufferAccess->LocalRecoveryRequest");
    auto row = nr.gos_table.find(job.fec);
    if (row != nr.gos_table.end() && row->second.gosp_phop != 0) {
      send_gos_req(node, row->second.gosp_phop, job.fec, job.pid);
    } else {
      close_exhausted(job.fec, job.pid, node);
      nr.sm.apply(GosNodeEvent::GosAckReceived);
      trace(node_id, "state", job.fec, job.pid, "LocalRecoveryRequest->DataForwarding");
    }
  }
}

void SimEngine::close_exhausted(uint32_t fec, uint32_t pid, size_t at_node) {
  const auto key = std::make_pair(fec, pid);
  auto ep = episodes_.find(key);
  if (ep == episodes_.end()) return;
  records_.push_back(
      {fec, pid, false, ep->second.reqs, -1, topo_.node(ep->second.detector).id});
  exhausted_++;
  trace(topo_.node(at_node).id, "exhausted", fec, pid,
        "reqs=" + std::to_string(ep->second.reqs));
  episodes_.erase(ep);
  dec_pending(flow(fec), pid);
}

void SimEngine::on_req_timeout(size_t node, uint32_t fec, uint32_t pid) {
  auto& out = aux_[node].outstanding;
  if (!out || out->fec != fec || out->pid != pid) return;
  out.reset();
  close_exhausted(fec, pid, node);
  net_->node(node).sm.apply(GosNodeEvent::GosAckReceived);
  trace(topo_.node(node).id, "state", fec, pid,
        "LocalRecoveryRequest->DataForwarding (timeout)");
  pump_jobs(node);
}

void SimEngine::on_ack(uint32_t fec, uint32_t cum, uint32_t echo) {
  FlowRt& f = flow(fec);
  f.unacked.erase(echo);
  if (auto rt = f.retx_sent_at.find(echo); rt != f.retx_sent_at.end()) {
    head_retx_latencies_.push_back(now_ - rt->second);
    f.retx_sent_at.erase(rt);
  }
  f.unacked.erase(f.unacked.begin(), f.unacked.lower_bound(cum));
  trace(f.route.nodes.front(), "ack", fec, echo, "cum=" + std::to_string(cum));
}

void SimEngine::on_rto(uint32_t fec, uint32_t pid) {
  FlowRt& f = flow(fec);
  if (!f.unacked.count(pid)) return;
  DataPacket pkt;
  pkt.label = f.ingress_label;
  pkt.fec = fec;
  pkt.packet_id = pid;
  pkt.size_bytes = f.spec.packet_size_bytes;
  pkt.created_at_us = now_;
  pkt.attempt = take_attempt(f, pid);
  f.totals.head_retx++;
  PidState& st = f.pid_state[pid];
  if (!st.rto_hit) {
    st.rto_hit = true;
    f.totals.head_loss_packets++;
  }
  f.unacked[pid] = now_;
  f.retx_sent_at[pid] = now_;
  inc_copies(f, pid);
  trace(f.route.nodes.front(), "rto_retx", fec, pid, "attempt=" + std::to_string(pkt.attempt));
  process_at(f.node_idx[0], pkt, true);
  Ev rto;
  rto.kind = EvKind::Rto;
  rto.t = now_ + f.rto_us;
  rto.fec = fec;
  rto.pid = pid;
  schedule(rto);
}

void SimEngine::on_tick() {
  const double interval_s = static_cast<double>(tick_us_) / 1e6;
  double agg_bits = 0;
  double agg_delivered = 0, agg_planned = 0;
  double agg_loss = 0, agg_emitted = 0;
  for (auto& f : flows_) {
    TickRow row;
    row.t_us = now_;
    row.fec = f.spec.fec;
    row.bps = static_cast<double>(f.window_bits) / interval_s;
    row.delivered_fraction =
        f.planned == 0 ? 0
                       : static_cast<double>(f.n_delivered) / static_cast<double>(f.planned);
    row.head_loss_fraction =
        f.totals.emitted == 0 ? 0
                              : static_cast<double>(f.totals.head_loss_packets) /
                                    static_cast<double>(f.totals.emitted);
    tick_rows_.push_back(row);
    agg_bits += static_cast<double>(f.window_bits);
    agg_delivered += static_cast<double>(f.n_delivered);
    agg_planned += static_cast<double>(f.planned);
    agg_loss += static_cast<double>(f.totals.head_loss_packets);
    agg_emitted += static_cast<double>(f.totals.emitted);
    f.window_bits = 0;

    const int64_t accounted = f.n_inflight + f.n_pending + f.n_lost + f.n_delivered;
    if (accounted != f.totals.emitted) {
      conservation_ok_ = false;
      if (opts_.conservation_strict)
        throw std::logic_error("conservation violated for fec " + std::to_string(f.spec.fec) +
                               ": emitted " + std::to_string(f.totals.emitted) +
                               " accounted " + std::to_string(accounted));
    }
  }
  TickRow agg;
  agg.t_us = now_;
  agg.aggregate = true;
  agg.bps = agg_bits / interval_s;
  agg.delivered_fraction = agg_planned == 0 ? 0 : agg_delivered / agg_planned;
  agg.head_loss_fraction = agg_emitted == 0 ? 0 : agg_loss / agg_emitted;
  tick_rows_.push_back(agg);

  for (size_t i = 0; i < net_->size(); ++i) {
    NodeRuntime& nr = net_->node(i);
    if (congestion_violated(nr.win_in, nr.win_out)) congestion_violations_++;
    nr.win_in = 0;
    nr.win_out = 0;
  }

  const int64_t next = now_ + tick_us_;
  if (now_ < duration_us_) {
    Ev tick;
    tick.kind = EvKind::Tick;
    tick.t = std::min(next, duration_us_);
    schedule(tick);
  }
}

MetricsSeries run_scenario(const ScenarioSpec& spec, uint64_t seed, EngineOptions opts) {
  SimEngine engine(spec, seed, opts);
  return engine.run();
}

}  // namespace gos

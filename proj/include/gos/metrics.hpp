#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace gos {

struct RecoveryRecord {
  uint32_t fec = 0;
  uint32_t packet_id = 0;
  bool recovered = false;   // false: escalation exhausted, loss left to E-E
  int diameter = 0;         // GoSReq messages emitted for this loss
  int64_t latency_us = -1;  // detection to recovered copy back at the detector
  std::string detector;

  bool operator==(const RecoveryRecord&) const = default;
};

struct FlowTotals {
  int64_t planned = 0;         // scheduled first-pass emissions
  int64_t emitted = 0;
  int64_t delivered = 0;       // unique packet ids at the sink
  int64_t delivered_bits = 0;
  int64_t duplicates = 0;
  int64_t drops_first_pass = 0;
  int64_t drops_total = 0;
  int64_t misroutes = 0;
  int64_t head_retx = 0;          // head-end retransmissions sent
  int64_t head_loss_packets = 0;  // distinct ids that ever hit the RTO

  bool operator==(const FlowTotals&) const = default;
};

struct TickRow {
  int64_t t_us = 0;
  uint32_t fec = 0;
  bool aggregate = false;
  double bps = 0;                  // delivered bits over the sample interval
  double delivered_fraction = 0;   // cumulative unique deliveries / planned
  double head_loss_fraction = 0;   // cumulative RTO-hit ids / emitted

  bool operator==(const TickRow&) const = default;
};

struct MetricsSeries {
  std::map<uint32_t, FlowTotals> flows;
  std::vector<TickRow> ticks;
  std::vector<RecoveryRecord> recoveries;
  std::map<int, int64_t> diameter_histogram;  // successful recoveries only
  int64_t exhausted = 0;
  std::vector<int64_t> recovery_latencies_us;
  std::vector<int64_t> head_retx_latencies_us;  // retransmission emission to ack
  int64_t congestion_violations = 0;  // node-windows with in > out
  bool conservation_ok = true;

  FlowTotals aggregate_totals() const;
  double mean_aggregate_bps() const;
  double final_head_loss_fraction() const;
  // Mean delivered fraction over aggregate ticks with t <= t_max_us.
  double mean_delivered_fraction_until(int64_t t_max_us) const;
};

void write_throughput_csv(std::ostream& out, const MetricsSeries& m);
void write_delivered_csv(std::ostream& out, const MetricsSeries& m);
void write_loss_csv(std::ostream& out, const MetricsSeries& m);
void write_diameters_csv(std::ostream& out, const MetricsSeries& m);
void write_summary(std::ostream& out, const MetricsSeries& m);

struct Trend {
  double slope = 0;
  double intercept = 0;
};

// Least squares line over (x, y) samples.
Trend least_squares(const std::vector<std::pair<double, double>>& points);

}  // namespace gos

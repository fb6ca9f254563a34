#include "gos/metrics.hpp"

#include <cinttypes>
#include <cstdio>

namespace gos {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fec_label(const TickRow& r) {
  return r.aggregate ? std::string("all") : std::to_string(r.fec);
}

}  // namespace

FlowTotals MetricsSeries::aggregate_totals() const {
  FlowTotals agg;
  for (const auto& [fec, t] : flows) {
    agg.planned += t.planned;
    agg.emitted += t.emitted;
    agg.delivered += t.delivered;
    agg.delivered_bits += t.delivered_bits;
    agg.duplicates += t.duplicates;
    agg.drops_first_pass += t.drops_first_pass;
    agg.drops_total += t.drops_total;
    agg.misroutes += t.misroutes;
    agg.head_retx += t.head_retx;
    agg.head_loss_packets += t.head_loss_packets;
  }
  return agg;
}

double MetricsSeries::mean_aggregate_bps() const {
  double sum = 0;
  int64_t n = 0;
  for (const auto& r : ticks)
    if (r.aggregate) {
      sum += r.bps;
      ++n;
    }
  return n == 0 ? 0 : sum / static_cast<double>(n);
}

double MetricsSeries::final_head_loss_fraction() const {
  const FlowTotals agg = aggregate_totals();
  return agg.emitted == 0 ? 0
                          : static_cast<double>(agg.head_loss_packets) /
                                static_cast<double>(agg.emitted);
}

double MetricsSeries::mean_delivered_fraction_until(int64_t t_max_us) const {
  double sum = 0;
  int64_t n = 0;
  for (const auto& r : ticks)
    if (r.aggregate && r.t_us <= t_max_us) {
      sum += r.delivered_fraction;
      ++n;
    }
  return n == 0 ? 0 : sum / static_cast<double>(n);
}

void write_throughput_csv(std::ostream& out, const MetricsSeries& m) {
  out << "t_s,fec,bps\n";
  for (const auto& r : m.ticks)
    out << fmt_double(static_cast<double>(r.t_us) / 1e6) << ',' << fec_label(r) << ','
        << fmt_double(r.bps) << '\n';
}

void write_delivered_csv(std::ostream& out, const MetricsSeries& m) {
  out << "t_s,fec,delivered_fraction\n";
  for (const auto& r : m.ticks)
    out << fmt_double(static_cast<double>(r.t_us) / 1e6) << ',' << fec_label(r) << ','
        << fmt_double(r.delivered_fraction) << '\n';
}

void write_loss_csv(std::ostream& out, const MetricsSeries& m) {
  out << "t_s,fec,headend_loss_fraction\n";
  for (const auto& r : m.ticks)
    out << fmt_double(static_cast<double>(r.t_us) / 1e6) << ',' << fec_label(r) << ','
        << fmt_double(r.head_loss_fraction) << '\n';
}

void write_diameters_csv(std::ostream& out, const MetricsSeries& m) {
  out << "diameter,count\n";
  for (const auto& [d, c] : m.diameter_histogram) out << d << ',' << c << '\n';
}

void write_summary(std::ostream& out, const MetricsSeries& m) {
  const FlowTotals a = m.aggregate_totals();
  out << "flows: " << m.flows.size() << '\n'
      << "planned: " << a.planned << '\n'
      << "emitted: " << a.emitted << '\n'
      << "delivered: " << a.delivered << '\n'
      << "duplicates: " << a.duplicates << '\n'
      << "drops_first_pass: " << a.drops_first_pass << '\n'
      << "drops_total: " << a.drops_total << '\n'
      << "misroutes: " << a.misroutes << '\n'
      << "head_retx: " << a.head_retx << '\n'
      << "head_loss_packets: " << a.head_loss_packets << '\n'
      << "head_loss_fraction: " << fmt_double(m.final_head_loss_fraction()) << '\n'
      << "mean_throughput_bps: " << fmt_double(m.mean_aggregate_bps()) << '\n'
      << "recoveries: " << m.recoveries.size() << '\n'
      << "exhausted: " << m.exhausted << '\n'
      << "congestion_violations: " << m.congestion_violations << '\n'
      << "conservation_ok: " << (m.conservation_ok ? 1 : 0) << '\n';
  out << "recovery_histogram:";
  if (m.diameter_histogram.empty()) out << " (empty)";
  for (const auto& [d, c] : m.diameter_histogram) out << " d=" << d << ":" << c;
  out << '\n';
}

Trend least_squares(const std::vector<std::pair<double, double>>& points) {
  Trend t;
  if (points.size() < 2) {
    t.intercept = points.empty() ? 0 : points[0].second;
    return t;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0) {
    t.intercept = sy / n;
    return t;
  }
  t.slope = (n * sxy - sx * sy) / denom;
  t.intercept = (sy - t.slope * sx) / n;
  return t;
}

}  // namespace gos

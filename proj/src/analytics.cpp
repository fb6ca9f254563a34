#include "gos/analytics.hpp"

#include <stdexcept>

namespace gos {

int64_t ddt_e2e(std::span<const int64_t> link_delays) {
  if (link_delays.empty()) throw std::invalid_argument("path needs at least one link");
  int64_t sum = 0;
  for (int64_t d : link_delays) sum += d;
  return sum;
}

DelayReport total_e2e(std::span<const int64_t> link_delays) {
  const int64_t sum = ddt_e2e(link_delays);
  return {Rational(sum), Rational(2 * sum), Rational(3 * sum)};
}

Rational retx_gos_raw(std::span<const int64_t> link_delays, size_t diameter,
                      const Rational& d_gos) {
  if (diameter > link_delays.size()) throw std::out_of_range("diameter exceeds link count");
  int64_t tail = 0;
  for (size_t l = link_delays.size() - diameter; l < link_delays.size(); ++l)
    tail += link_delays[l];
  return Rational(2) * d_gos * tail;
}

DelayReport total_gos(std::span<const int64_t> link_delays, size_t diameter,
                      const AnalyticsParams& p) {
  if (diameter < 1 || diameter >= link_delays.size())
    throw std::out_of_range("diameter must satisfy 0 < d < n - i");
  const int64_t sum = ddt_e2e(link_delays);
  const Rational ddt = p.d_gos * sum;
  const Rational retx = retx_gos_raw(link_delays, diameter, p.d_gos);
  return {ddt, retx, ddt + retx};
}

BeatsVerdict gos_beats_e2e(std::span<const int64_t> link_delays, size_t diameter,
                           const AnalyticsParams& p) {
  const DelayReport gos = total_gos(link_delays, diameter, p);
  const DelayReport e2e = total_e2e(link_delays);

  BeatsVerdict v;
  v.beats = gos.total < e2e.total;
  if (p.d_gos < Rational(3)) {
    // Σ_{i..n-1} d > 2·d_gos·Σ_{n-d..n-1} d / (3 − d_gos), cross multiplied.
    const int64_t full = ddt_e2e(link_delays);
    const Rational lhs = Rational(full) * (Rational(3) - p.d_gos);
    const Rational rhs = retx_gos_raw(link_delays, diameter, p.d_gos);
    v.halfplane = lhs > rhs;
    if (*v.halfplane != v.beats)
      throw std::logic_error("half-plane form disagrees with direct comparison");
  } else {
    v.degenerate = true;
  }
  return v;
}

DiameterBound max_diameter_bound(int64_t n, int64_t i, const AnalyticsParams& p) {
  if (!(p.d_gos > Rational(0)) || !(p.d_gos < Rational(3)))
    throw std::domain_error("d_gos must lie in (0, 3)");
  if (n - i < 2) throw std::domain_error("path needs n - i >= 2");
  const Rational bound =
      (Rational(n - 1 - i) * (Rational(3) - p.d_gos)) / (Rational(2) * p.d_gos) + Rational(1);
  const int64_t cap = n - i - 1;
  const int64_t below = bound.floor_strict_below();
  return {bound, below < cap ? below : cap};
}

std::vector<CurvePoint> scalability_curve(int64_t n_min, int64_t n_max, int64_t i,
                                          const AnalyticsParams& p) {
  if (n_min > n_max) throw std::invalid_argument("empty n range");
  std::vector<CurvePoint> out;
  out.reserve(static_cast<size_t>(n_max - n_min + 1));
  for (int64_t n = n_min; n <= n_max; ++n) {
    const DiameterBound b = max_diameter_bound(n, i, p);
    out.push_back({n, b.bound, b.max_feasible});
  }
  return out;
}

}  // namespace gos

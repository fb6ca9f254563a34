#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gos/rational.hpp"

namespace gos {

// d_gos: multiplicative per-hop delay factor paid by privileged traffic for
// carrying GoS characterization information. Kept exact so the algebraic
// identities below can be asserted as equalities.
struct AnalyticsParams {
  Rational d_gos{1};
};

struct DelayReport {
  Rational ddt;   // detection delay
  Rational retx;  // retransmission delay
  Rational total; // ddt + retx

  bool operator==(const DelayReport&) const = default;
};

// Sum of link delays along the path (detection delay of an end-to-end loss).
int64_t ddt_e2e(std::span<const int64_t> link_delays);

// {Σd, 2Σd, 3Σd}.
DelayReport total_e2e(std::span<const int64_t> link_delays);

// Retransmission term over the last `diameter` links scaled by d_gos, with no
// range checking; diameter == n reproduces the end-to-end sum scaled by d_gos.
Rational retx_gos_raw(std::span<const int64_t> link_delays, size_t diameter, const Rational& d_gos);

// {d_gos·Σd, 2·d_gos·Σ(last d), sum}; throws std::out_of_range unless
// 0 < diameter < link count.
DelayReport total_gos(std::span<const int64_t> link_delays, size_t diameter,
                      const AnalyticsParams& p);

struct BeatsVerdict {
  bool beats = false;                 // total_gos < total_e2e, computed directly
  std::optional<bool> halfplane;      // the Σ > 2·d_gos·Σ_d/(3−d_gos) form
  bool degenerate = false;            // d_gos ≥ 3, half-plane form unusable
};

// Both the direct comparison and the half-plane inequality; they are checked
// against each other whenever d_gos < 3.
BeatsVerdict gos_beats_e2e(std::span<const int64_t> link_delays, size_t diameter,
                           const AnalyticsParams& p);

struct DiameterBound {
  Rational bound;       // ((n−1−i)(3−d_gos))/(2·d_gos) + 1
  int64_t max_feasible; // min(greatest integer strictly below bound, n−i−1)
};

// Throws std::domain_error unless d_gos ∈ (0,3) and n−i ≥ 2.
DiameterBound max_diameter_bound(int64_t n, int64_t i, const AnalyticsParams& p);

struct CurvePoint {
  int64_t n = 0;
  Rational bound;
  int64_t max_d = 0;
};

std::vector<CurvePoint> scalability_curve(int64_t n_min, int64_t n_max, int64_t i,
                                          const AnalyticsParams& p);

}  // namespace gos

/// Real-space invariants: flux unitary, index of a pair of projections,
/// Connes' area sum and the trace-per-unit-volume marker.
#pragma once

#include "hall_lab/conductance.hpp"

namespace hall {

struct FluxUnitary {
    SitePoint p;
    DiagonalOperator phases;
};

/// U_p(x) = e^{i arg(x - p)}, arg in (-pi, pi]. p must be a plaquette center.
FluxUnitary flux_unitary(const Box& box, const SitePoint& p);

struct IndexResult {
    double windowed;
    double full_trace;
};

/// Windowed and full traces of (U P U^dagger - P)^3.
IndexResult index_pair(const LatticeOperator& p, const FluxUnitary& u, const TraceWindow& w);

struct ConnesSum {
    double value;
    int between_count;  // views where p lies on the segment between the two points
};

/// sum over plaquette centers |p| <= R of sin a1 + sin a2 + sin a3.
ConnesSum connes_area_sum(const SitePoint& u1, const SitePoint& u2, const SitePoint& u3, int radius);

/// (-2i)/(2L+1)^2 sum_{x in [-L,L]^2} sum_{y,z: |y-x|,|z-x| <= cutoff} P(x,y) P(y,z) P(z,x) Area(x,y,z).
double trace_per_unit_volume_marker(const LatticeOperator& p, int l_inner, int bond_cutoff);

}  // namespace hall

/// Conductance functionals: windowed Kubo-Streda, the set function
/// sigma_B(S) and its block decomposition, and the edge conductances.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hall_lab/spectral.hpp"

namespace hall {

/// 1-norm ball of radius W about a center, or the whole box.
struct TraceWindow {
    SitePoint center;
    int radius = 0;
    bool full = false;

    static TraceWindow ball(SitePoint center, int radius) { return {center, radius, false}; }
    static TraceWindow full_box() { return {SitePoint(), 0, true}; }

    bool contained_in(const Box& box) const;
    /// Site indices of the window. Throws ConfigError when the window is
    /// empty or leaves the box.
    std::vector<int> sites(const Box& box) const;
    std::string describe() const;
};

/// Plaquette center where the boundaries of {x1 < offset1} and
/// {x2 < offset2} cross; (-1/2, -1/2) for the default offsets.
SitePoint switch_crossing(double offset1, double offset2);

struct ConductanceReport {
    double value = 0.0;
    double imag_residual = 0.0;
    double full_trace = 0.0;
    double window_delta = 0.0;  // |value(W) - value(W')| with W' = W + 4 when it fits, else max(1, W - 4)
    int delta_radius = 0;
    TraceWindow window;
    Box box;
    std::vector<std::pair<std::string, double>> parameters;
    std::vector<std::pair<std::string, double>> diagnostics;

    double diagnostic(const std::string& key) const;
};

/// Window sum of a diagonal density, with the sensitivity diagnostic filled.
ConductanceReport report_from_density(const Box& box, const Eigen::VectorXcd& density, const TraceWindow& w);

/// -i sum_{x in W} <x| P [[P, L1], [P, L2]] |x>.
ConductanceReport kubo_streda(const LatticeOperator& p, const DiagonalOperator& l1, const DiagonalOperator& l2,
                              const TraceWindow& w);

/// Windowed trace of i (E L1 E' L2 E - E L2 E' L1 E), E = E_S(H), E' = 1 - E.
double sigma_b_set(const Spectrum& spec, const EnergySet& s, const DiagonalOperator& l1, const DiagonalOperator& l2,
                   const TraceWindow& w);

struct SigmaBDecomposition {
    double term_minus = 0.0;
    double term_plus = 0.0;
    double term_delta = 0.0;
    double term_delta_blocks = 0.0;  // per-eigenvalue sum
    struct Block {
        double eigenvalue;
        double commutator_form;  // i tr E [P, L1] L2 E
        double t_form;           // i tr E T E
    };
    std::vector<Block> blocks;
    double kubo = 0.0;  // Kubo-Streda at lambda0 on the same window
    double sum() const { return term_minus + term_plus + term_delta; }
};

/// Three-block decomposition of sigma_B(lambda0) with respect to (lo, hi).
SigmaBDecomposition sigma_b_decomposition(const Spectrum& spec, double lo, double hi, double lambda0,
                                          const DiagonalOperator& l1, const DiagonalOperator& l2,
                                          const TraceWindow& w);

/// Rows of a strip strictly below its horizontal midline; finite-volume
/// stand-in for the trace near the physical edge x2 = -a.
int edge_half_cut(const Box& strip);

/// -i tr rho'(H_a) [H_a, L1] over the lower half of the strip; the
/// full-strip trace (identically zero in finite volume) is the full_trace
/// diagnostic. When a bulk spectrum is given, Delta must avoid it.
ConductanceReport edge_conductance_gap(const Hamiltonian& h_a, const SmoothStep& rho, const DiagonalOperator& l1,
                                       const Spectrum* bulk = nullptr);

struct EdgeTrace {
    double value;
    double imag_residual;
};

/// Re of -(i/2) tr rho'(H_a) {[H_a, L1], L2(t)}.
EdgeTrace windowed_edge_current(const Hamiltonian& h_a, const SmoothStep& rho, const DiagonalOperator& l1,
                                const DiagonalOperator& l2, double t);

/// Eigenvalue clusters of a finite bulk box with more than half their mass
/// within this many sites of the box boundary are boundary modes of the
/// box, absent from the infinite bulk, and are left out of the bound-state
/// sums below.
inline constexpr int kBoundaryCollar = 4;

/// sum_{lambda in Delta} rho'(lambda) Im tr E [H_B, L1] L2(t) E over bulk
/// (non-boundary) clusters.
double bound_state_correction(const Hamiltonian& h_b, const SmoothStep& rho, double lo, double hi,
                              const DiagonalOperator& l1, const DiagonalOperator& l2, double t);

/// sum_{lambda in Delta} rho'(lambda) Im tr E L1 H_B L2 E, the bound-state
/// persistent-current term added in sigma_E^(1). Equals
/// -bound_state_correction(t = 0).
double bound_state_current(const Hamiltonian& h_b, const SmoothStep& rho, double lo, double hi,
                           const DiagonalOperator& l1, const DiagonalOperator& l2);

/// Switch offsets shared by strip and bulk boxes.
struct SwitchLines {
    double offset1 = 0.0;
    double offset2 = 0.0;
};

ConductanceReport sigma_e1(const Hamiltonian& h_a, const Hamiltonian& h_b, const SmoothStep& rho, double lo,
                           double hi, const SwitchLines& lines);

/// Re of -(i/2) tr rho'(H_a) {[H_a, L1], A_T(L2)}.
ConductanceReport sigma_e2(const Hamiltonian& h_a, const SmoothStep& rho, const DiagonalOperator& l1,
                           const DiagonalOperator& l2, double T);

/// Kubo-Streda of the bulk at the gap midpoint nearest the center of Delta.
ConductanceReport bulk_oracle(const Hamiltonian& h_b, double lo, double hi, const SwitchLines& lines, int radius);

struct IdentityCheck {
    double lhs;
    double rhs;
    double gap;
};

IdentityCheck instantaneous_identity_check(const Hamiltonian& h_a, const Hamiltonian& h_b, const SmoothStep& rho,
                                           double lo, double hi, const SwitchLines& lines, double t, double sigma_b);

}  // namespace hall

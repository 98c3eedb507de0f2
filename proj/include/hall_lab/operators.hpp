/// Dense lattice operators: Harper Hamiltonian, Cauchy disorder, Dirichlet
/// half-plane restriction, switch commutators and the short-range constants.
#pragma once

#include <cstdint>

#include "hall_lab/lattice.hpp"

namespace hall {

struct LatticeOperator {
    Box box;
    Eigen::MatrixXcd matrix;
    bool hermitian = false;

    /// max |M - M^dagger|.
    double hermitian_defect() const;
};

struct DisorderConfig {
    double alpha = 0.0;
    std::uint64_t seed = 0;
};

/// Strip x2 >= -a with Dirichlet conditions on the row x2 = -a - 1.
struct EdgeGeometry {
    int a = 0;
    Box strip;
};

EdgeGeometry make_edge_geometry(std::pair<int, int> x1_range, int a, int x2_top);

struct HalfPlaneRestriction {
    LatticeOperator h_a;  // on the strip box
    LatticeOperator e_a;  // on the bulk box; columns supported in x2 >= -a
};

/// Landau-gauge Harper Hamiltonian with open boundaries.
LatticeOperator harper_hamiltonian(const Box& box, double phi);

/// Uniform variate in (0,1) keyed by (seed, x1, x2).
double site_uniform(std::uint64_t seed, int x1, int x2);

/// alpha * tan(pi (u - 1/2)) per site.
DiagonalOperator cauchy_potential(const Box& box, const DisorderConfig& cfg);

/// H + diag(v).
LatticeOperator add_diagonal(const LatticeOperator& h, const DiagonalOperator& v);

/// Conjugation D H D^dagger by a diagonal unitary.
LatticeOperator conjugate_diagonal(const LatticeOperator& h, const DiagonalOperator& u);

HalfPlaneRestriction restrict_half_plane(const LatticeOperator& h_b, const EdgeGeometry& geom);

/// [H, Lambda](x, x') = (Lambda(x') - Lambda(x)) H(x, x').
LatticeOperator commutator_switch(const LatticeOperator& h, const DiagonalOperator& lambda);

/// sup_x sum_{x'} |H(x,x')| (e^{mu |x - x'|} - 1).
double short_range_constant(const LatticeOperator& h, double mu);

/// sup_x sum_{x'} |E_a(x,x')| e^{mu (|x2 + a| + |x1 - x1'|)}.
double boundary_defect_norm(const LatticeOperator& e_a, double mu, int a);

}  // namespace hall

/// Resolvent traces of the Harper model, the contour formula for j_B, the
/// Neumann coefficients and the Cauchy-average identity.
#pragma once

#include "hall_lab/operators.hpp"
#include "hall_lab/quadrature.hpp"
#include "hall_lab/spectral.hpp"

namespace hall {

struct ResolventTraceResult {
    cplx z;
    cplx value;
    Box box;
    double convergence_delta = 0.0;  // |value - value on the doubled box|, 0 when not checked
};

/// Square box [-r, r]^2.
Box centered_box(int r);

/// tr R A R B R with R = (H_phi + V - z)^{-1}, A = [H_phi, L1], B = [H_phi, L2],
/// switches through the origin. V may be null.
cplx resolvent_t_trace(const Box& box, double phi, const Eigen::VectorXd* potential, cplx z);

ResolventTraceResult t_phi_trace(double phi, cplx z, const Box& box, bool check_convergence = false);

/// (1/2pi) Re int_{-alpha}^{alpha} i d eta tr T_phi(lambda + i eta), evaluated
/// with n Gauss-Legendre nodes on [0, |alpha|] after pairing eta and -eta.
double j_b(double phi, double alpha, double lambda, int nodes, const Box& box, int threads = 1);

/// Same integral with nodes on the full interval [-|alpha|, |alpha|].
double j_b_unsymmetrized(double phi, double alpha, double lambda, int nodes, const Box& box, int threads = 1);

/// Coefficient of lambda^{-(N+3)} in tr T(lambda + i eta) - conj tr T(lambda - i eta):
/// -sum_n (2n - N) tr (H - i eta)^n A (H - i eta)^{N-n} B, as a finite sum.
cplx neumann_term(double phi, int n, double eta, const Box& box);

/// -(4|alpha|/pi) sin(phi)(cos(phi) + 1) lambda^{-5}.
double leading_asymptotic(double phi, double alpha, double lambda);

/// (|alpha|/2pi) Re(i c2) lambda^{-5} with c2 = neumann_term(phi, 2, 0).
double neumann_leading(double phi, double alpha, double lambda);

/// Per-sample seed derived from the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct MonteCarloResult {
    cplx mean;
    double standard_error;
    int samples;
};

/// Mean and jackknife standard error of tr T_B(z) over Cauchy potentials.
MonteCarloResult disorder_average_trace(double phi, double alpha, cplx z, int n_samples, std::uint64_t seed,
                                        const Box& box, int threads = 1);

struct ExpectedJb {
    double integral;   // -int rho'(lambda) j_B(lambda) d lambda
    double leading;    // same with the closed-form leading term
    double neumann;    // same with the Neumann-derived leading term
};

/// lambda-integral over supp rho' with lambda_nodes Gauss-Legendre nodes.
ExpectedJb expected_jb_integral(const SmoothStep& rho, double phi, double alpha, int lambda_nodes, int eta_nodes,
                                const Box& box, int threads = 1);

}  // namespace hall

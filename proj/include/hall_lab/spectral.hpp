/// Finite-volume functional calculus through one dense eigendecomposition:
/// projections, functions of H, Heisenberg evolution, time averages and the
/// localization diagnostics.
#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hall_lab/operators.hpp"

namespace hall {

struct Spectrum {
    Box box;
    Eigen::VectorXd eigenvalues;    // ascending
    Eigen::MatrixXcd eigenvectors;  // columns
    double norm = 0.0;              // max |eigenvalue|

    int size() const { return static_cast<int>(eigenvalues.size()); }
    double degeneracy_tol() const { return 1e-8 * norm; }
    double tie_tol() const { return 1e-9 * norm; }
    /// Maximal runs of eigenvalues whose consecutive gaps are below
    /// degeneracy_tol, as half-open index ranges [first, last).
    std::vector<std::pair<int, int>> clusters() const;
};

/// LAPACK zheevr. Throws ContractError for operators not flagged hermitian.
Spectrum eigendecompose(const LatticeOperator& h);

/// An operator together with its cached spectrum.
struct Hamiltonian {
    LatticeOperator op;
    Spectrum spectrum;

    explicit Hamiltonian(LatticeOperator h);
    const Box& box() const { return op.box; }
};

/// Finite union of disjoint open intervals (endpoints may be infinite).
class EnergySet {
public:
    struct Interval {
        double lo;
        double hi;
    };

    EnergySet() = default;
    static EnergySet interval(double lo, double hi);
    static EnergySet below(double lambda) { return interval(-kInf, lambda); }
    static EnergySet above(double lambda) { return interval(lambda, kInf); }
    static EnergySet everything() { return interval(-kInf, kInf); }

    EnergySet unite(const EnergySet& other) const;
    /// Closure of the complement, taken as open intervals; cut points are
    /// never assigned since they must avoid the spectrum.
    EnergySet complement() const;
    bool contains(double lambda) const;
    const std::vector<Interval>& intervals() const { return intervals_; }

    static constexpr double kInf = std::numeric_limits<double>::infinity();

private:
    void normalize();
    std::vector<Interval> intervals_;
};

/// Eigenvalue indices inside S. Throws AmbiguousCutError when a finite
/// boundary point of S is within tie tolerance of an eigenvalue.
std::vector<int> select_eigenvalues(const Spectrum& spec, const EnergySet& s);

/// Columns of the eigenvector matrix for the given indices.
Eigen::MatrixXcd eigenvector_block(const Spectrum& spec, const std::vector<int>& idx);

LatticeOperator spectral_projection(const Spectrum& spec, const EnergySet& s);
LatticeOperator apply_function(const Spectrum& spec, const std::function<cplx(double)>& g);

Eigen::MatrixXcd to_eigenbasis(const Spectrum& spec, const Eigen::MatrixXcd& x);
Eigen::MatrixXcd from_eigenbasis(const Spectrum& spec, const Eigen::MatrixXcd& x);

/// e^{iHt} X e^{-iHt}.
LatticeOperator evolve(const Spectrum& spec, const LatticeOperator& x, double t);

/// Kernel (e^{i w T} - 1)/(i w T), equal to 1 for |w| < tol.
cplx time_average_kernel(double omega, double T, double tol);

/// (1/T) int_0^T e^{iHt} X e^{-iHt} dt in closed form.
LatticeOperator time_average(const Spectrum& spec, const LatticeOperator& x, double T);

/// Midpoint between the eigenvalues bracketing lambda; lambda itself when it
/// lies outside the spectral range.
double gap_midpoint(const Spectrum& spec, double lambda);

/// Smooth switch rho with rho = 1 below Delta and 0 above. Stored as a
/// convex combination of elementary shapes so that mixtures stay exact.
class SmoothStep {
public:
    enum class Shape { bump, skewed_bump, step };

    static SmoothStep bump(double lo, double hi) { return SmoothStep(lo, hi, Shape::bump); }
    static SmoothStep skewed_bump(double lo, double hi) { return SmoothStep(lo, hi, Shape::skewed_bump); }
    /// Indicator of lambda below the midpoint of Delta; rho_prime is not
    /// defined for this shape.
    static SmoothStep step(double lo, double hi) { return SmoothStep(lo, hi, Shape::step); }
    /// c * a + (1 - c) * b.
    static SmoothStep mix(const SmoothStep& a, const SmoothStep& b, double c);

    double rho(double lambda) const;
    double rho_prime(double lambda) const;
    /// Hull of all component intervals.
    double lo() const;
    double hi() const;
    bool smooth() const;
    std::string describe() const;

private:
    struct Component {
        double lo, hi;
        Shape shape;
        double weight;
    };
    SmoothStep(double lo, double hi, Shape shape);
    SmoothStep() = default;
    std::vector<Component> parts_;
};

SmoothStep::Shape parse_shape(const std::string& name);

/// max over g in {e^{-it lambda} 1_Delta : t in t_samples} and Fermi
/// projections at up to max_projections gap midpoints inside Delta of
/// sum_{x,x'} |g(H)(x,x')| (1 + |x|)^{-nu} e^{mu |x - x'|}.
double dynamical_localization_bound(const Spectrum& spec, double lo, double hi, double mu, double nu,
                                    const std::vector<double>& t_samples, int max_projections = 8);

/// Deflation basis of the eigenprojection of the cluster containing lambda.
std::vector<Eigen::VectorXcd> localized_basis(const Spectrum& spec, double lambda, double degeneracy_tol);

struct LocalizationMinimum {
    double eigenvalue;
    int index;  // position within the cluster's localized basis
    double m;
};

/// M_zeta for every localized-basis vector of every eigenvalue in (lo, hi),
/// with switch lines through the origin.
std::vector<LocalizationMinimum> localization_minima(const Spectrum& spec, double lo, double hi);

/// min(|L1 psi|, |(1-L1) psi|, |L2 psi|, |(1-L2) psi|).
double localization_minimum(const Box& box, const Eigen::VectorXcd& psi);

struct BoundCheck {
    double value;
    double bound;
    bool holds() const { return value <= bound * (1.0 + 1e-10); }
};

/// Holmgren norm max(max row sum, max column sum) of |M|.
double holmgren_norm(const Eigen::MatrixXcd& m);

/// || e^{delta ell} e^{iHt} e^{-delta ell} || against e^{C|t|}, C = ||B||/2.
BoundCheck propagation_speed_check(const Hamiltonian& h, const std::function<double(int, int)>& ell, double delta,
                                   double t);

/// Calibrated constants: delta = c / (1 + 1/|Im z|) and bound C/|Im z|.
inline constexpr double kCombesThomasC = 2.0;
inline constexpr double kCombesThomasc = 1.0 / 16.0;

/// || e^{delta ell} (H - z)^{-1} e^{-delta ell} || against C / |Im z|.
BoundCheck combes_thomas_check(const Hamiltonian& h, const std::function<double(int, int)>& ell, cplx z);

double operator_norm(const Eigen::MatrixXcd& m);

}  // namespace hall

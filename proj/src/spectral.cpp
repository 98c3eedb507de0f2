#include "hall_lab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <lapacke.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "hall_lab/errors.hpp"
#include "hall_lab/quadrature.hpp"

namespace hall {

std::vector<std::pair<int, int>> Spectrum::clusters() const {
    std::vector<std::pair<int, int>> out;
    const int n = size();
    int first = 0;
    for (int k = 1; k <= n; ++k) {
        if (k == n || eigenvalues(k) - eigenvalues(k - 1) >= degeneracy_tol()) {
            out.emplace_back(first, k);
            first = k;
        }
    }
    return out;
}

Spectrum eigendecompose(const LatticeOperator& h) {
    if (!h.hermitian) throw ContractError("eigendecompose requires a hermitian operator");
    const int n = h.box.n_sites();
    Spectrum s{h.box, Eigen::VectorXd(n), Eigen::MatrixXcd(n, n), 0.0};
    if (n == 0) return s;
    Eigen::MatrixXcd a = h.matrix;
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'A', 'L', n, reinterpret_cast<lapack_complex_double*>(a.data()),
                                     n, 0.0, 0.0, 0, 0, 0.0, &found, s.eigenvalues.data(),
                                     reinterpret_cast<lapack_complex_double*>(s.eigenvectors.data()), n, support.data());
    if (info != 0 || found != n) throw std::runtime_error("zheevr failed with info " + std::to_string(info));
    s.norm = n > 0 ? std::max(std::abs(s.eigenvalues(0)), std::abs(s.eigenvalues(n - 1))) : 0.0;
    return s;
}

Hamiltonian::Hamiltonian(LatticeOperator h) : op(std::move(h)), spectrum(eigendecompose(op)) {}

EnergySet EnergySet::interval(double lo, double hi) {
    EnergySet s;
    if (lo < hi) s.intervals_.push_back({lo, hi});
    return s;
}

void EnergySet::normalize() {
    std::sort(intervals_.begin(), intervals_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    for (const auto& iv : intervals_) {
        if (!(iv.lo < iv.hi)) continue;
        if (!merged.empty() && iv.lo < merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        else
            merged.push_back(iv);
    }
    intervals_ = std::move(merged);
}

EnergySet EnergySet::unite(const EnergySet& other) const {
    EnergySet s = *this;
    s.intervals_.insert(s.intervals_.end(), other.intervals_.begin(), other.intervals_.end());
    s.normalize();
    return s;
}

EnergySet EnergySet::complement() const {
    EnergySet s;
    double cursor = -kInf;
    for (const auto& iv : intervals_) {
        if (cursor < iv.lo) s.intervals_.push_back({cursor, iv.lo});
        cursor = iv.hi;
    }
    if (cursor < kInf) s.intervals_.push_back({cursor, kInf});
    return s;
}

bool EnergySet::contains(double lambda) const {
    for (const auto& iv : intervals_)
        if (iv.lo < lambda && lambda < iv.hi) return true;
    return false;
}

std::vector<int> select_eigenvalues(const Spectrum& spec, const EnergySet& s) {
    const double tol = spec.tie_tol();
    for (const auto& iv : s.intervals())
        for (double cut : {iv.lo, iv.hi}) {
            if (!std::isfinite(cut)) continue;
            for (int k = 0; k < spec.size(); ++k)
                if (std::abs(spec.eigenvalues(k) - cut) <= tol) throw AmbiguousCutError(spec.eigenvalues(k), cut);
        }
    std::vector<int> idx;
    for (int k = 0; k < spec.size(); ++k)
        if (s.contains(spec.eigenvalues(k))) idx.push_back(k);
    return idx;
}

Eigen::MatrixXcd eigenvector_block(const Spectrum& spec, const std::vector<int>& idx) {
    Eigen::MatrixXcd v(spec.size(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) v.col(j) = spec.eigenvectors.col(idx[j]);
    return v;
}

LatticeOperator spectral_projection(const Spectrum& spec, const EnergySet& s) {
    Eigen::MatrixXcd v = eigenvector_block(spec, select_eigenvalues(spec, s));
    Eigen::MatrixXcd p = v * v.adjoint();
    return {spec.box, p, true};
}

LatticeOperator apply_function(const Spectrum& spec, const std::function<cplx(double)>& g) {
    Eigen::VectorXcd d(spec.size());
    bool real = true;
    for (int k = 0; k < spec.size(); ++k) {
        d(k) = g(spec.eigenvalues(k));
        real = real && d(k).imag() == 0.0;
    }
    Eigen::MatrixXcd m = spec.eigenvectors * d.asDiagonal() * spec.eigenvectors.adjoint();
    return {spec.box, m, real};
}

Eigen::MatrixXcd to_eigenbasis(const Spectrum& spec, const Eigen::MatrixXcd& x) {
    return spec.eigenvectors.adjoint() * x * spec.eigenvectors;
}

Eigen::MatrixXcd from_eigenbasis(const Spectrum& spec, const Eigen::MatrixXcd& x) {
    return spec.eigenvectors * x * spec.eigenvectors.adjoint();
}

LatticeOperator evolve(const Spectrum& spec, const LatticeOperator& x, double t) {
    if (!(x.box == spec.box)) throw ContractError("box mismatch");
    if (t == 0.0) return x;
    Eigen::MatrixXcd xt = to_eigenbasis(spec, x.matrix);
    const int n = spec.size();
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) xt(j, k) *= std::polar(1.0, (spec.eigenvalues(j) - spec.eigenvalues(k)) * t);
    return {spec.box, from_eigenbasis(spec, xt), x.hermitian};
}

cplx time_average_kernel(double omega, double T, double tol) {
    if (std::abs(omega) < tol) return 1.0;
    double wt = omega * T;
    // (e^{i wt} - 1)/(i wt) = e^{i wt/2} sin(wt/2)/(wt/2)
    return std::polar(std::sin(0.5 * wt) / (0.5 * wt), 0.5 * wt);
}

LatticeOperator time_average(const Spectrum& spec, const LatticeOperator& x, double T) {
    if (!(T > 0)) throw DomainError("time average needs T > 0");
    if (!(x.box == spec.box)) throw ContractError("box mismatch");
    Eigen::MatrixXcd xt = to_eigenbasis(spec, x.matrix);
    const int n = spec.size();
    const double tol = spec.degeneracy_tol();
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            xt(j, k) *= time_average_kernel(spec.eigenvalues(j) - spec.eigenvalues(k), T, tol);
    return {spec.box, from_eigenbasis(spec, xt), x.hermitian};
}

double gap_midpoint(const Spectrum& spec, double lambda) {
    const auto& ev = spec.eigenvalues;
    const int n = spec.size();
    int above = static_cast<int>(std::lower_bound(ev.data(), ev.data() + n, lambda) - ev.data());
    if (above == 0 || above == n) return lambda;
    return 0.5 * (ev(above - 1) + ev(above));
}

namespace {

double bump_density(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

// integral of exp(-1/(1-s^2)) over (-1,1) and of (1+s)/2 times it
double bump_normalizer() {
    static const double value = [] {
        auto q = gauss_legendre(400, -1.0, 1.0);
        double acc = 0;
        for (int i = 0; i < q.size(); ++i) acc += q.weights[i] * bump_density(q.nodes[i]);
        return acc;
    }();
    return value;
}

double skewed_normalizer() {
    static const double value = [] {
        auto q = gauss_legendre(400, -1.0, 1.0);
        double acc = 0;
        for (int i = 0; i < q.size(); ++i) acc += q.weights[i] * 0.5 * (1.0 + q.nodes[i]) * bump_density(q.nodes[i]);
        return acc;
    }();
    return value;
}

}  // namespace

SmoothStep::SmoothStep(double lo, double hi, Shape shape) {
    if (!(lo < hi)) throw ContractError("smooth step needs lo < hi");
    parts_.push_back({lo, hi, shape, 1.0});
}

SmoothStep SmoothStep::mix(const SmoothStep& a, const SmoothStep& b, double c) {
    SmoothStep m;
    for (auto p : a.parts_) m.parts_.push_back({p.lo, p.hi, p.shape, c * p.weight});
    for (auto p : b.parts_) m.parts_.push_back({p.lo, p.hi, p.shape, (1.0 - c) * p.weight});
    return m;
}

double SmoothStep::rho_prime(double lambda) const {
    double acc = 0;
    for (const auto& p : parts_) {
        if (p.shape == Shape::step) throw ContractError("step shape has no derivative");
        if (!(p.lo < lambda && lambda < p.hi)) continue;
        double w = p.hi - p.lo;
        double s = 2.0 * (lambda - p.lo) / w - 1.0;
        double d = p.shape == Shape::bump ? bump_density(s) / bump_normalizer()
                                          : 0.5 * (1.0 + s) * bump_density(s) / skewed_normalizer();
        acc -= p.weight * d * 2.0 / w;
    }
    return acc;
}

double SmoothStep::rho(double lambda) const {
    double acc = 0;
    for (const auto& p : parts_) {
        double v;
        if (lambda <= p.lo) {
            v = 1.0;
        } else if (lambda >= p.hi) {
            v = 0.0;
        } else if (p.shape == Shape::step) {
            v = lambda < 0.5 * (p.lo + p.hi) ? 1.0 : 0.0;
        } else {
            SmoothStep single(p.lo, p.hi, p.shape);
            auto q = gauss_legendre(64, p.lo, lambda);
            v = 1.0;
            for (int i = 0; i < q.size(); ++i) v += q.weights[i] * single.rho_prime(q.nodes[i]);
        }
        acc += p.weight * v;
    }
    return acc;
}

double SmoothStep::lo() const {
    double v = EnergySet::kInf;
    for (const auto& p : parts_) v = std::min(v, p.lo);
    return v;
}

double SmoothStep::hi() const {
    double v = -EnergySet::kInf;
    for (const auto& p : parts_) v = std::max(v, p.hi);
    return v;
}

bool SmoothStep::smooth() const {
    return std::none_of(parts_.begin(), parts_.end(), [](const Component& p) { return p.shape == Shape::step; });
}

std::string SmoothStep::describe() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        const auto& p = parts_[i];
        if (i) os << " + ";
        const char* name = p.shape == Shape::bump ? "bump" : p.shape == Shape::skewed_bump ? "skewed_bump" : "step";
        os << p.weight << "*" << name << "(" << p.lo << "," << p.hi << ")";
    }
    return os.str();
}

SmoothStep::Shape parse_shape(const std::string& name) {
    if (name == "bump") return SmoothStep::Shape::bump;
    if (name == "skewed_bump") return SmoothStep::Shape::skewed_bump;
    if (name == "step") return SmoothStep::Shape::step;
    throw ConfigError("unknown rho shape '" + name + "'");
}

namespace {

double weighted_kernel_sum(const Box& box, const Eigen::MatrixXcd& g, double mu, double nu) {
    const int n = box.n_sites();
    std::vector<SitePoint> pts(n);
    for (int k = 0; k < n; ++k) pts[k] = box.point(k);
    double acc = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double m = std::abs(g(i, j));
            if (m == 0) continue;
            acc += m * std::pow(1.0 + norm1(pts[i]), -nu) * std::exp(mu * distance1(pts[i], pts[j]));
        }
    return acc;
}

}  // namespace

double dynamical_localization_bound(const Spectrum& spec, double lo, double hi, double mu, double nu,
                                    const std::vector<double>& t_samples, int max_projections) {
    std::vector<int> idx;
    for (int k = 0; k < spec.size(); ++k)
        if (lo < spec.eigenvalues(k) && spec.eigenvalues(k) < hi) idx.push_back(k);
    double best = 0;
    if (!idx.empty()) {
        Eigen::MatrixXcd v = eigenvector_block(spec, idx);
        for (double t : t_samples) {
            Eigen::VectorXcd ph(idx.size());
            for (std::size_t j = 0; j < idx.size(); ++j) ph(j) = std::polar(1.0, -t * spec.eigenvalues(idx[j]));
            Eigen::MatrixXcd g = v * ph.asDiagonal() * v.adjoint();
            best = std::max(best, weighted_kernel_sum(spec.box, g, mu, nu));
        }
    }
    // Fermi projections at gap midpoints between consecutive eigenvalues in Delta
    std::vector<double> mids;
    for (std::size_t j = 1; j < idx.size(); ++j) {
        double a = spec.eigenvalues(idx[j - 1]), b = spec.eigenvalues(idx[j]);
        if (b - a > 2.0 * spec.tie_tol()) mids.push_back(0.5 * (a + b));
    }
    if (!mids.empty() && max_projections > 0) {
        const int m = static_cast<int>(mids.size());
        const int take = std::min(m, max_projections);
        for (int j = 0; j < take; ++j) {
            double lam = mids[take == 1 ? m / 2 : static_cast<std::size_t>(j) * (m - 1) / (take - 1)];
            LatticeOperator p = spectral_projection(spec, EnergySet::below(lam));
            best = std::max(best, weighted_kernel_sum(spec.box, p.matrix, mu, nu));
        }
    }
    return best;
}

std::vector<Eigen::VectorXcd> localized_basis(const Spectrum& spec, double lambda, double degeneracy_tol) {
    int first = -1, last = -1;
    for (auto [a, b] : spec.clusters()) {
        bool hit = false;
        for (int k = a; k < b; ++k) hit = hit || std::abs(spec.eigenvalues(k) - lambda) <= degeneracy_tol;
        if (hit) {
            first = a;
            last = b;
            break;
        }
    }
    if (first < 0) throw ContractError("localized_basis: no eigenvalue cluster at the requested energy");
    // W has orthonormal columns spanning the remaining part of ran E
    Eigen::MatrixXcd w = spec.eigenvectors.middleCols(first, last - first);
    std::vector<Eigen::VectorXcd> out;
    while (w.cols() > 0) {
        Eigen::Index x0;
        w.rowwise().squaredNorm().maxCoeff(&x0);
        Eigen::VectorXcd c = w.row(x0).adjoint();
        double e00 = c.norm();
        out.push_back(w * c / e00);
        if (w.cols() == 1) break;
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(c);
        Eigen::MatrixXcd q = qr.householderQ();
        w = (w * q.rightCols(q.cols() - 1)).eval();
    }
    return out;
}

double localization_minimum(const Box& box, const Eigen::VectorXcd& psi) {
    double n1 = 0, n1c = 0, n2 = 0, n2c = 0;
    for (int k = 0; k < box.n_sites(); ++k) {
        auto [x1, x2] = box.site(k);
        double a = std::norm(psi(k));
        (x1 < 0 ? n1 : n1c) += a;
        (x2 < 0 ? n2 : n2c) += a;
    }
    return std::sqrt(std::min({n1, n1c, n2, n2c}));
}

std::vector<LocalizationMinimum> localization_minima(const Spectrum& spec, double lo, double hi) {
    std::vector<LocalizationMinimum> out;
    for (auto [a, b] : spec.clusters()) {
        double lam = spec.eigenvalues(a);
        if (!(lo < lam && lam < hi)) continue;
        auto basis = localized_basis(spec, lam, spec.degeneracy_tol());
        for (std::size_t j = 0; j < basis.size(); ++j)
            out.push_back({lam, static_cast<int>(j), localization_minimum(spec.box, basis[j])});
    }
    return out;
}

double holmgren_norm(const Eigen::MatrixXcd& m) {
    Eigen::MatrixXd a = m.cwiseAbs();
    return std::max(a.rowwise().sum().maxCoeff(), a.colwise().sum().maxCoeff());
}

double operator_norm(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

BoundCheck propagation_speed_check(const Hamiltonian& h, const std::function<double(int, int)>& ell, double delta,
                                   double t) {
    const Box& box = h.box();
    const int n = box.n_sites();
    Eigen::VectorXd l(n);
    for (int k = 0; k < n; ++k) {
        auto [x1, x2] = box.site(k);
        l(k) = ell(x1, x2);
    }
    // iB(x,x') = H(x,x') (e^{delta(l(x') - l(x))} - e^{delta(l(x) - l(x'))})
    Eigen::MatrixXcd b(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            b(i, j) = h.op.matrix(i, j) * (std::exp(delta * (l(j) - l(i))) - std::exp(delta * (l(i) - l(j))));
    double c = 0.5 * holmgren_norm(b);
    // exp(i t e^{delta l} H e^{-delta l})
    Eigen::MatrixXcd hd(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) hd(i, j) = h.op.matrix(i, j) * std::exp(delta * (l(i) - l(j)));
    Eigen::MatrixXcd a = (cplx(0.0, t) * hd).exp();
    return {operator_norm(a), std::exp(c * std::abs(t))};
}

BoundCheck combes_thomas_check(const Hamiltonian& h, const std::function<double(int, int)>& ell, cplx z) {
    const double y = std::abs(z.imag());
    if (!(y > 0)) throw DomainError("Combes-Thomas check needs Im z != 0");
    const double delta = kCombesThomasc / (1.0 + 1.0 / y);
    const Box& box = h.box();
    const int n = box.n_sites();
    Eigen::VectorXd l(n);
    for (int k = 0; k < n; ++k) {
        auto [x1, x2] = box.site(k);
        l(k) = ell(x1, x2);
    }
    const Spectrum& s = h.spectrum;
    Eigen::VectorXcd r(n);
    for (int k = 0; k < n; ++k) r(k) = 1.0 / (s.eigenvalues(k) - z);
    Eigen::MatrixXcd res = s.eigenvectors * r.asDiagonal() * s.eigenvectors.adjoint();
    Eigen::VectorXd up = (delta * l).array().exp(), down = (-delta * l).array().exp();
    Eigen::MatrixXcd a = up.asDiagonal() * res * down.asDiagonal();
    return {operator_norm(a), kCombesThomasC / y};
}

}  // namespace hall

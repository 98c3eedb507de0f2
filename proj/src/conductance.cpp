#include "hall_lab/conductance.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Sparse>

#include "hall_lab/errors.hpp"

namespace hall {

namespace {

using SparseC = Eigen::SparseMatrix<cplx>;

const cplx I(0.0, 1.0);

void require_same_box(const Box& a, const Box& b) {
    if (!(a == b)) throw ContractError("box mismatch");
}

SparseC to_sparse(const Eigen::MatrixXcd& m) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(j), m(i, j));
    SparseC s(m.rows(), m.cols());
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

// diag(A B)(x) = sum_y A(x,y) B(y,x)
Eigen::VectorXcd diag_of_product(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return a.cwiseProduct(b.transpose()).rowwise().sum();
}

// diag(V M V^dagger)
Eigen::VectorXcd diag_sandwich(const Eigen::MatrixXcd& v, const Eigen::MatrixXcd& m) {
    if (v.cols() == 0) return Eigen::VectorXcd::Zero(v.rows());
    return (v * m).cwiseProduct(v.conjugate()).rowwise().sum();
}

cplx window_sum(const Eigen::VectorXcd& density, const std::vector<int>& sites) {
    cplx acc = 0;
    for (int k : sites) acc += density(k);
    return acc;
}

// Indices in (lo, hi) whose eigenvalue cluster keeps at most half of its
// mass on the boundary collar.
std::vector<int> bulk_indices_in(const Spectrum& spec, double lo, double hi, int collar) {
    const Box& b = spec.box;
    Eigen::VectorXd on_collar(b.n_sites());
    for (int k = 0; k < b.n_sites(); ++k) {
        auto [x1, x2] = b.site(k);
        int d = std::min({x1 - b.x1_min, b.x1_max - x1, x2 - b.x2_min, b.x2_max - x2});
        on_collar(k) = d < collar ? 1.0 : 0.0;
    }
    std::vector<int> idx;
    for (auto [first, last] : spec.clusters()) {
        if (!(lo < spec.eigenvalues(first) && spec.eigenvalues(last - 1) < hi)) continue;
        const auto block = spec.eigenvectors.middleCols(first, last - first);
        double mass = on_collar.dot(block.cwiseAbs2().rowwise().sum());
        if (mass <= 0.5 * (last - first))
            for (int k = first; k < last; ++k) idx.push_back(k);
    }
    return idx;
}

// Eigenvectors with nonzero rho' and the values rho'(lambda).
struct RhoSupport {
    std::vector<int> idx;
    Eigen::MatrixXcd v;
    Eigen::VectorXd f;
};

RhoSupport rho_support(const Spectrum& spec, const SmoothStep& rho) {
    RhoSupport s;
    for (int k = 0; k < spec.size(); ++k) {
        double d = rho.rho_prime(spec.eigenvalues(k));
        if (d != 0.0) s.idx.push_back(k);
    }
    s.v = eigenvector_block(spec, s.idx);
    s.f.resize(static_cast<Eigen::Index>(s.idx.size()));
    for (std::size_t j = 0; j < s.idx.size(); ++j) s.f(j) = rho.rho_prime(spec.eigenvalues(s.idx[j]));
    return s;
}

// Returns (t1, t2) with
//   t1 = sum_{j in K} f_j sum_m C^_{jm} X_{mj},   t2 = sum_{j in K} f_j sum_m X_{jm} C^_{mj}
// where hats denote the eigenbasis, X_{mj} = kernel(lambda_m - lambda_j) L^_{mj}
// and L is diagonal in position.
std::pair<cplx, cplx> eigen_traces(const Spectrum& spec, const std::vector<int>& idx, const Eigen::VectorXd& f,
                                   const SparseC& c, const DiagonalOperator& l,
                                   const std::function<cplx(double)>& kernel) {
    if (idx.empty()) return {0.0, 0.0};
    const Eigen::MatrixXcd v = eigenvector_block(spec, idx);
    const Eigen::MatrixXcd& u = spec.eigenvectors;
    // rows K of C^ and of L^; columns K of C^
    Eigen::MatrixXcd c_rows = (v.adjoint() * c) * u;
    Eigen::MatrixXcd l_rows = (l.values.asDiagonal() * v).adjoint() * u;
    Eigen::MatrixXcd c_cols = u.adjoint() * (c * v);
    const int n = spec.size();
    cplx t1 = 0, t2 = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        const int j = idx[a];
        const double lj = spec.eigenvalues(j);
        cplx s1 = 0, s2 = 0;
        for (int m = 0; m < n; ++m) {
            const double lm = spec.eigenvalues(m);
            // L^_{mj} = conj(L^_{jm}) since L is hermitian
            s1 += c_rows(a, m) * kernel(lm - lj) * std::conj(l_rows(a, m));
            s2 += kernel(lj - lm) * l_rows(a, m) * c_cols(m, a);
        }
        t1 += f(a) * s1;
        t2 += f(a) * s2;
    }
    return {t1, t2};
}

int default_delta_radius(const TraceWindow& w, const Box& box) {
    TraceWindow wider = TraceWindow::ball(w.center, w.radius + 4);
    if (wider.contained_in(box)) return w.radius + 4;
    return std::max(1, w.radius - 4);
}

}  // namespace

bool TraceWindow::contained_in(const Box& box) const {
    if (full) return true;
    return center.x1() - radius >= box.x1_min && center.x1() + radius <= box.x1_max &&
           center.x2() - radius >= box.x2_min && center.x2() + radius <= box.x2_max;
}

std::vector<int> TraceWindow::sites(const Box& box) const {
    std::vector<int> out;
    if (full) {
        out.resize(box.n_sites());
        for (int k = 0; k < box.n_sites(); ++k) out[k] = k;
        return out;
    }
    if (!contained_in(box)) throw ConfigError("trace window " + describe() + " leaves the box");
    for (int k = 0; k < box.n_sites(); ++k)
        if (distance1(box.point(k), center) <= radius) out.push_back(k);
    if (out.empty()) throw ConfigError("trace window " + describe() + " contains no sites");
    return out;
}

std::string TraceWindow::describe() const {
    if (full) return "full";
    std::ostringstream os;
    os << "ball(" << center.x1() << "," << center.x2() << ";" << radius << ")";
    return os.str();
}

SitePoint switch_crossing(double offset1, double offset2) {
    auto t = [](double p) { return static_cast<std::int64_t>(2 * std::ceil(p) - 1); };
    return SitePoint::from_twice(t(offset1), t(offset2));
}

double ConductanceReport::diagnostic(const std::string& key) const {
    for (const auto& [k, v] : diagnostics)
        if (k == key) return v;
    throw ContractError("missing diagnostic " + key);
}

ConductanceReport report_from_density(const Box& box, const Eigen::VectorXcd& density, const TraceWindow& w) {
    ConductanceReport r;
    r.box = box;
    r.window = w;
    cplx val = window_sum(density, w.sites(box));
    r.value = val.real();
    r.imag_residual = std::abs(val.imag());
    r.full_trace = std::abs(density.sum());
    if (w.full) {
        r.delta_radius = 0;
        r.window_delta = 0.0;
    } else {
        r.delta_radius = default_delta_radius(w, box);
        cplx other = window_sum(density, TraceWindow::ball(w.center, r.delta_radius).sites(box));
        r.window_delta = std::abs(other.real() - r.value);
    }
    return r;
}

ConductanceReport kubo_streda(const LatticeOperator& p, const DiagonalOperator& l1, const DiagonalOperator& l2,
                              const TraceWindow& w) {
    require_same_box(p.box, l1.box);
    require_same_box(p.box, l2.box);
    const int n = p.box.n_sites();
    const double idem = (p.matrix * p.matrix - p.matrix).cwiseAbs().maxCoeff();
    if (idem > 1e-8) throw ContractError("kubo_streda: operator is not a projection");
    Eigen::MatrixXcd a(n, n), b(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            a(i, j) = p.matrix(i, j) * (l1.values(j) - l1.values(i));
            b(i, j) = p.matrix(i, j) * (l2.values(j) - l2.values(i));
        }
    Eigen::MatrixXcd ab = a * b;
    // a, b antihermitian: b a = (a b)^dagger
    Eigen::MatrixXcd comm = ab - ab.adjoint();
    Eigen::VectorXcd density = -I * diag_of_product(p.matrix, comm);
    ConductanceReport r = report_from_density(p.box, density, w);
    r.diagnostics.emplace_back("idempotency_defect", idem);
    return r;
}

double sigma_b_set(const Spectrum& spec, const EnergySet& s, const DiagonalOperator& l1, const DiagonalOperator& l2,
                   const TraceWindow& w) {
    require_same_box(spec.box, l1.box);
    require_same_box(spec.box, l2.box);
    Eigen::MatrixXcd e = spectral_projection(spec, s).matrix;
    // E L1 E' L2 E - E L2 E' L1 E = E L2 E L1 E - E L1 E L2 E (diagonal L's commute)
    Eigen::MatrixXcd m1 = e * l1.values.asDiagonal() * e;
    Eigen::MatrixXcd m2 = e * l2.values.asDiagonal() * e;
    Eigen::MatrixXcd x = m2 * l1.values.asDiagonal();
    x -= m1 * l2.values.asDiagonal();
    Eigen::VectorXcd density = I * diag_of_product(x, e);
    return window_sum(density, w.sites(spec.box)).real();
}

SigmaBDecomposition sigma_b_decomposition(const Spectrum& spec, double lo, double hi, double lambda0,
                                          const DiagonalOperator& l1, const DiagonalOperator& l2,
                                          const TraceWindow& w) {
    require_same_box(spec.box, l1.box);
    require_same_box(spec.box, l2.box);
    if (!(lo < lambda0 && lambda0 < hi)) throw ContractError("lambda0 must lie inside Delta");
    const std::vector<int> sites = w.sites(spec.box);
    const int n = spec.size();
    const std::vector<int> below = select_eigenvalues(spec, EnergySet::below(lambda0));
    const std::vector<int> minus = select_eigenvalues(spec, EnergySet::below(lo));
    const std::vector<int> plus = select_eigenvalues(spec, EnergySet::above(hi));
    const std::vector<int> delta = select_eigenvalues(spec, EnergySet::interval(lo, hi));

    Eigen::MatrixXcd vp = eigenvector_block(spec, below);
    Eigen::MatrixXcd p = vp * vp.adjoint();
    // X = [P, L1] L2
    Eigen::MatrixXcd x(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = p(i, j) * (l1.values(j) - l1.values(i)) * l2.values(j);

    auto block_term = [&](const std::vector<int>& idx) {
        if (idx.empty()) return 0.0;
        Eigen::MatrixXcd v = eigenvector_block(spec, idx);
        Eigen::MatrixXcd m = v.adjoint() * (x * v);
        return (I * window_sum(diag_sandwich(v, m), sites)).real();
    };

    SigmaBDecomposition d;
    d.term_minus = block_term(minus);
    d.term_plus = block_term(plus);

    // T = P L1 P' L2 P - P' L1 P L2 P' is block diagonal on ran E_Delta split at lambda0
    if (!delta.empty()) {
        std::vector<int> lower, upper;
        for (int k : delta) (spec.eigenvalues(k) < lambda0 ? lower : upper).push_back(k);
        Eigen::MatrixXcd vl = eigenvector_block(spec, lower), vu = eigenvector_block(spec, upper);
        const auto& d1 = l1.values;
        const auto& d2 = l2.values;
        // lower block: V^dagger L1 P' L2 V, P' = 1 - P
        Eigen::MatrixXcd l2v = d2.asDiagonal() * vl;
        Eigen::MatrixXcd ml = (d1.asDiagonal() * vl).adjoint() * (l2v - p * l2v);
        // upper block: -V^dagger L1 P L2 V
        Eigen::MatrixXcd mu = -((d1.asDiagonal() * vu).adjoint() * (p * (d2.asDiagonal() * vu)));
        Eigen::VectorXcd dens = diag_sandwich(vl, ml) + diag_sandwich(vu, mu);
        d.term_delta = (I * window_sum(dens, sites)).real();

        for (auto [a, b] : spec.clusters()) {
            double lam = spec.eigenvalues(a);
            if (!(lo < lam && lam < hi)) continue;
            std::vector<int> idx;
            for (int k = a; k < b; ++k) idx.push_back(k);
            Eigen::MatrixXcd v = eigenvector_block(spec, idx);
            Eigen::MatrixXcd mx = v.adjoint() * (x * v);
            Eigen::MatrixXcd mt;
            if (lam < lambda0) {
                Eigen::MatrixXcd q = d2.asDiagonal() * v;
                mt = (d1.asDiagonal() * v).adjoint() * (q - p * q);
            } else {
                mt = -((d1.asDiagonal() * v).adjoint() * (p * (d2.asDiagonal() * v)));
            }
            SigmaBDecomposition::Block blk{lam, (I * window_sum(diag_sandwich(v, mx), sites)).real(),
                                           (I * window_sum(diag_sandwich(v, mt), sites)).real()};
            d.term_delta_blocks += blk.commutator_form;
            d.blocks.push_back(blk);
        }
    }
    d.kubo = kubo_streda(LatticeOperator{spec.box, p, true}, l1, l2, w).value;
    return d;
}

int edge_half_cut(const Box& strip) {
    return static_cast<int>(std::floor(0.5 * (strip.x2_min + strip.x2_max + 1)));
}

ConductanceReport edge_conductance_gap(const Hamiltonian& h_a, const SmoothStep& rho, const DiagonalOperator& l1,
                                       const Spectrum* bulk) {
    require_same_box(h_a.box(), l1.box);
    if (bulk) {
        for (int k = 0; k < bulk->size(); ++k)
            if (rho.lo() < bulk->eigenvalues(k) && bulk->eigenvalues(k) < rho.hi())
                throw ContractError("edge_conductance_gap: Delta intersects the bulk spectrum");
    }
    const Box& box = h_a.box();
    const Spectrum& spec = h_a.spectrum;
    RhoSupport s = rho_support(spec, rho);
    Eigen::MatrixXcd c = commutator_switch(h_a.op, l1).matrix;
    // density(x) = -i sum_y rho'(x,y) C(y,x) with rho'(x,y) = sum_k V(x,k) f_k conj V(y,k)
    Eigen::VectorXcd density = Eigen::VectorXcd::Zero(box.n_sites());
    if (!s.idx.empty()) {
        Eigen::MatrixXcd vf = s.v * s.f.asDiagonal();
        for (int x = 0; x < box.n_sites(); ++x)
            for (int y = 0; y < box.n_sites(); ++y) {
                cplx cyx = c(y, x);
                if (cyx == 0.0) continue;
                cplx rho_xy = (vf.row(x) * s.v.row(y).adjoint())(0, 0);
                density(x) += -I * rho_xy * cyx;
            }
    }
    const int cut = edge_half_cut(box);
    cplx val = 0;
    for (int k = 0; k < box.n_sites(); ++k)
        if (box.site(k).second < cut) val += density(k);
    ConductanceReport r;
    r.box = box;
    r.window = TraceWindow::full_box();
    r.value = val.real();
    r.imag_residual = std::abs(val.imag());
    r.full_trace = std::abs(density.sum());
    r.parameters = {{"delta_lo", rho.lo()}, {"delta_hi", rho.hi()}, {"a", static_cast<double>(-box.x2_min)}};
    r.diagnostics = {{"edge_cut_x2", static_cast<double>(cut)}, {"rho_rank", static_cast<double>(s.idx.size())}};
    return r;
}

EdgeTrace windowed_edge_current(const Hamiltonian& h_a, const SmoothStep& rho, const DiagonalOperator& l1,
                                const DiagonalOperator& l2, double t) {
    require_same_box(h_a.box(), l1.box);
    require_same_box(h_a.box(), l2.box);
    const Spectrum& spec = h_a.spectrum;
    RhoSupport s = rho_support(spec, rho);
    SparseC c = to_sparse(commutator_switch(h_a.op, l1).matrix);
    auto [t1, t2] = eigen_traces(spec, s.idx, s.f, c, l2, [t](double w) { return std::polar(1.0, w * t); });
    cplx v = -0.5 * I * (t1 + t2);
    return {v.real(), std::abs(v.imag())};
}

double bound_state_correction(const Hamiltonian& h_b, const SmoothStep& rho, double lo, double hi,
                              const DiagonalOperator& l1, const DiagonalOperator& l2, double t) {
    require_same_box(h_b.box(), l1.box);
    require_same_box(h_b.box(), l2.box);
    const Spectrum& spec = h_b.spectrum;
    std::vector<int> idx = bulk_indices_in(spec, lo, hi, kBoundaryCollar);
    Eigen::VectorXd f(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) f(j) = rho.rho_prime(spec.eigenvalues(idx[j]));
    SparseC c = to_sparse(commutator_switch(h_b.op, l1).matrix);
    auto [t1, t2] = eigen_traces(spec, idx, f, c, l2, [t](double w) { return std::polar(1.0, w * t); });
    return t1.imag();
}

double bound_state_current(const Hamiltonian& h_b, const SmoothStep& rho, double lo, double hi,
                           const DiagonalOperator& l1, const DiagonalOperator& l2) {
    require_same_box(h_b.box(), l1.box);
    require_same_box(h_b.box(), l2.box);
    const Spectrum& spec = h_b.spectrum;
    std::vector<int> idx = bulk_indices_in(spec, lo, hi, kBoundaryCollar);
    if (idx.empty()) return 0.0;
    Eigen::MatrixXcd v = eigenvector_block(spec, idx);
    Eigen::MatrixXcd lhs = l1.values.asDiagonal() * v;
    Eigen::MatrixXcd rhs = h_b.op.matrix * (l2.values.asDiagonal() * v);
    double acc = 0;
    for (std::size_t j = 0; j < idx.size(); ++j)
        acc += rho.rho_prime(spec.eigenvalues(idx[j])) * lhs.col(j).dot(rhs.col(j)).imag();
    return acc;
}

ConductanceReport sigma_e1(const Hamiltonian& h_a, const Hamiltonian& h_b, const SmoothStep& rho, double lo,
                           double hi, const SwitchLines& lines) {
    auto l1a = switch_function(h_a.box(), 1, lines.offset1), l2a = switch_function(h_a.box(), 2, lines.offset2);
    auto l1b = switch_function(h_b.box(), 1, lines.offset1), l2b = switch_function(h_b.box(), 2, lines.offset2);
    EdgeTrace cur = windowed_edge_current(h_a, rho, l1a, l2a, 0.0);
    double corr = bound_state_current(h_b, rho, lo, hi, l1b, l2b);
    ConductanceReport r;
    r.box = h_a.box();
    r.window = TraceWindow::full_box();
    r.value = cur.value + corr;
    r.imag_residual = cur.imag_residual;
    r.parameters = {{"delta_lo", lo}, {"delta_hi", hi}, {"t", 0.0}};
    r.diagnostics = {{"windowed_current", cur.value}, {"bound_state_current", corr}};
    return r;
}

ConductanceReport sigma_e2(const Hamiltonian& h_a, const SmoothStep& rho, const DiagonalOperator& l1,
                           const DiagonalOperator& l2, double T) {
    if (!(T > 0)) throw DomainError("sigma_e2 needs T > 0");
    require_same_box(h_a.box(), l1.box);
    require_same_box(h_a.box(), l2.box);
    const Spectrum& spec = h_a.spectrum;
    RhoSupport s = rho_support(spec, rho);
    SparseC c = to_sparse(commutator_switch(h_a.op, l1).matrix);
    const double tol = spec.degeneracy_tol();
    auto [t1, t2] = eigen_traces(spec, s.idx, s.f, c, l2, [T, tol](double w) { return time_average_kernel(w, T, tol); });
    cplx v = -0.5 * I * (t1 + t2);
    ConductanceReport r;
    r.box = h_a.box();
    r.window = TraceWindow::full_box();
    r.value = v.real();
    r.imag_residual = std::abs(v.imag());
    r.parameters = {{"T", T}};
    return r;
}

ConductanceReport bulk_oracle(const Hamiltonian& h_b, double lo, double hi, const SwitchLines& lines, int radius) {
    double lambda0 = gap_midpoint(h_b.spectrum, 0.5 * (lo + hi));
    LatticeOperator p = spectral_projection(h_b.spectrum, EnergySet::below(lambda0));
    auto l1 = switch_function(h_b.box(), 1, lines.offset1), l2 = switch_function(h_b.box(), 2, lines.offset2);
    ConductanceReport r =
        kubo_streda(p, l1, l2, TraceWindow::ball(switch_crossing(lines.offset1, lines.offset2), radius));
    r.parameters.emplace_back("lambda0", lambda0);
    return r;
}

IdentityCheck instantaneous_identity_check(const Hamiltonian& h_a, const Hamiltonian& h_b, const SmoothStep& rho,
                                           double lo, double hi, const SwitchLines& lines, double t, double sigma_b) {
    auto l1a = switch_function(h_a.box(), 1, lines.offset1), l2a = switch_function(h_a.box(), 2, lines.offset2);
    auto l1b = switch_function(h_b.box(), 1, lines.offset1), l2b = switch_function(h_b.box(), 2, lines.offset2);
    double lhs = windowed_edge_current(h_a, rho, l1a, l2a, t).value;
    double rhs = sigma_b + bound_state_correction(h_b, rho, lo, hi, l1b, l2b, t);
    return {lhs, rhs, std::abs(lhs - rhs)};
}

}  // namespace hall

#include "hall_lab/harper.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "hall_lab/errors.hpp"
#include "hall_lab/parallel.hpp"

namespace hall {

namespace {

using SparseC = Eigen::SparseMatrix<cplx>;
using Trip = Eigen::Triplet<cplx>;

const cplx I(0.0, 1.0);

// Harper hopping as triplets, same conventions as harper_hamiltonian.
std::vector<Trip> harper_triplets(const Box& box, double phi) {
    std::vector<Trip> t;
    for (int k = 0; k < box.n_sites(); ++k) {
        auto [x1, x2] = box.site(k);
        if (box.contains(x1 + 1, x2)) {
            int j = box.index(x1 + 1, x2);
            t.emplace_back(k, j, 1.0);
            t.emplace_back(j, k, 1.0);
        }
        if (box.contains(x1, x2 + 1)) {
            int j = box.index(x1, x2 + 1);
            cplx up = std::polar(1.0, phi * x1);
            t.emplace_back(j, k, up);
            t.emplace_back(k, j, std::conj(up));
        }
    }
    return t;
}

// Commutator [H, L_axis] for the switch {x_axis < 0}, as triplets.
std::vector<Trip> switch_commutator(const Box& box, const std::vector<Trip>& h, int axis) {
    std::vector<Trip> out;
    auto lam = [&](int k) {
        auto [x1, x2] = box.site(k);
        return (axis == 1 ? x1 : x2) < 0 ? 1.0 : 0.0;
    };
    for (const auto& e : h) {
        double d = lam(e.col()) - lam(e.row());
        if (d != 0.0) out.emplace_back(e.row(), e.col(), d * e.value());
    }
    return out;
}

}  // namespace

Box centered_box(int r) { return make_box({-r, r}, {-r, r}); }

cplx resolvent_t_trace(const Box& box, double phi, const Eigen::VectorXd* potential, cplx z) {
    if (z.imag() == 0.0) throw DomainError("resolvent trace needs Im z != 0");
    const int n = box.n_sites();
    std::vector<Trip> h = harper_triplets(box, phi);
    std::vector<Trip> a = switch_commutator(box, h, 1);
    std::vector<Trip> b = switch_commutator(box, h, 2);
    std::vector<Trip> m = h;
    for (int k = 0; k < n; ++k) m.emplace_back(k, k, (potential ? (*potential)(k) : 0.0) - z);
    SparseC hz(n, n), bs(n, n);
    hz.setFromTriplets(m.begin(), m.end());
    bs.setFromTriplets(b.begin(), b.end());
    Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(hz);
    if (lu.info() != Eigen::Success) throw std::runtime_error("sparse LU failed");
    // group A entries by row: tr(A M) = sum_{i,j} A(i,j) M(j,i), M = R B R R
    std::vector<std::vector<std::pair<int, cplx>>> rows(n);
    for (const auto& e : a) rows[e.row()].emplace_back(e.col(), e.value());
    cplx acc = 0;
    Eigen::VectorXcd e_i = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (rows[i].empty()) continue;
        e_i.setZero();
        e_i(i) = 1.0;
        Eigen::VectorXcd v = lu.solve(e_i);
        Eigen::VectorXcd w = lu.solve(v);
        Eigen::VectorXcd y = lu.solve(bs * w);
        for (auto [j, val] : rows[i]) acc += val * y(j);
    }
    return acc;
}

ResolventTraceResult t_phi_trace(double phi, cplx z, const Box& box, bool check_convergence) {
    ResolventTraceResult r{z, resolvent_t_trace(box, phi, nullptr, z), box, 0.0};
    if (check_convergence) {
        Box big = make_box({2 * box.x1_min, 2 * box.x1_max}, {2 * box.x2_min, 2 * box.x2_max});
        r.convergence_delta = std::abs(resolvent_t_trace(big, phi, nullptr, z) - r.value);
    }
    return r;
}

namespace {

void check_jb_domain(double lambda) {
    if (!(std::abs(lambda) > 4.0)) throw DomainError("j_B needs |lambda| > 4 (outside the Harper spectrum)");
}

}  // namespace

double j_b(double phi, double alpha, double lambda, int nodes, const Box& box, int threads) {
    check_jb_domain(lambda);
    const double a = std::abs(alpha);
    if (a == 0.0) return 0.0;
    QuadratureRule q = gauss_legendre(nodes, 0.0, a);
    std::function<cplx(int)> term = [&](int k) {
        const double eta = q.nodes[k];
        return resolvent_t_trace(box, phi, nullptr, {lambda, eta}) +
               resolvent_t_trace(box, phi, nullptr, {lambda, -eta});
    };
    std::vector<cplx> vals = parallel_map(q.size(), threads, term);
    cplx acc = 0;
    for (int k = 0; k < q.size(); ++k) acc += q.weights[k] * I * vals[k];
    return acc.real() / (2.0 * std::numbers::pi);
}

double j_b_unsymmetrized(double phi, double alpha, double lambda, int nodes, const Box& box, int threads) {
    check_jb_domain(lambda);
    const double a = std::abs(alpha);
    if (a == 0.0) return 0.0;
    QuadratureRule q = gauss_legendre(nodes, -a, a);
    std::function<cplx(int)> term = [&](int k) {
        return resolvent_t_trace(box, phi, nullptr, {lambda, q.nodes[k]});
    };
    std::vector<cplx> vals = parallel_map(q.size(), threads, term);
    cplx acc = 0;
    for (int k = 0; k < q.size(); ++k) acc += q.weights[k] * I * vals[k];
    return acc.real() / (2.0 * std::numbers::pi);
}

cplx neumann_term(double phi, int n, double eta, const Box& box) {
    if (n < 0) throw ContractError("Neumann order must be nonnegative");
    const int pad = n + 2;
    if (box.x1_min > -1 - pad || box.x1_max < pad || box.x2_min > -1 - pad || box.x2_max < pad)
        throw ConfigError("box too small for the Neumann term padding");
    LatticeOperator h = harper_hamiltonian(box, phi);
    Eigen::MatrixXcd a = commutator_switch(h, switch_function(box, 1)).matrix;
    Eigen::MatrixXcd b = commutator_switch(h, switch_function(box, 2)).matrix;
    const int dim = box.n_sites();
    Eigen::MatrixXcd hs = h.matrix - I * eta * Eigen::MatrixXcd::Identity(dim, dim);
    std::vector<Eigen::MatrixXcd> pw{Eigen::MatrixXcd::Identity(dim, dim)};
    for (int k = 1; k <= n; ++k) pw.push_back(pw.back() * hs);
    cplx acc = 0;
    for (int k = 0; k <= n; ++k) {
        const int weight = 2 * k - n;
        if (weight == 0) continue;
        Eigen::MatrixXcd left = pw[k] * a;
        Eigen::MatrixXcd right = pw[n - k] * b;
        acc -= static_cast<double>(weight) * left.cwiseProduct(right.transpose()).sum();
    }
    return acc;
}

double leading_asymptotic(double phi, double alpha, double lambda) {
    if (lambda == 0.0) throw DomainError("leading asymptotic needs lambda != 0");
    return -(4.0 * std::abs(alpha) / std::numbers::pi) * std::sin(phi) * (std::cos(phi) + 1.0) * std::pow(lambda, -5);
}

double neumann_leading(double phi, double alpha, double lambda) {
    if (lambda == 0.0) throw DomainError("leading asymptotic needs lambda != 0");
    cplx c2 = neumann_term(phi, 2, 0.0, centered_box(6));
    return std::abs(alpha) / (2.0 * std::numbers::pi) * (I * c2).real() * std::pow(lambda, -5);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t x = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

MonteCarloResult disorder_average_trace(double phi, double alpha, cplx z, int n_samples, std::uint64_t seed,
                                        const Box& box, int threads) {
    if (z.imag() == 0.0) throw DomainError("disorder average needs Im z != 0");
    if (n_samples < 2) throw ContractError("disorder average needs at least two samples");
    std::function<cplx(int)> sample = [&](int s) {
        DiagonalOperator v = cauchy_potential(box, {alpha, derive_seed(seed, static_cast<std::uint64_t>(s))});
        Eigen::VectorXd pot = v.values.real();
        return resolvent_t_trace(box, phi, &pot, z);
    };
    std::vector<cplx> vals = parallel_map(n_samples, threads, sample);
    cplx sum = 0;
    for (const auto& v : vals) sum += v;
    const double n = n_samples;
    cplx mean = sum / n;
    // jackknife over leave-one-out means
    double var = 0;
    for (const auto& v : vals) var += std::norm((sum - v) / (n - 1.0) - mean);
    return {mean, std::sqrt((n - 1.0) / n * var), n_samples};
}

ExpectedJb expected_jb_integral(const SmoothStep& rho, double phi, double alpha, int lambda_nodes, int eta_nodes,
                                const Box& box, int threads) {
    const double lo = rho.lo(), hi = rho.hi();
    if (!(lo >= 4.0 || hi <= -4.0)) throw DomainError("supp rho' must avoid [-4, 4]");
    QuadratureRule q = gauss_legendre(lambda_nodes, lo, hi);
    ExpectedJb r{0.0, 0.0, 0.0};
    for (int k = 0; k < q.size(); ++k) {
        const double lam = q.nodes[k];
        const double d = rho.rho_prime(lam);
        if (d == 0.0) continue;
        r.integral -= q.weights[k] * d * j_b(phi, alpha, lam, eta_nodes, box, threads);
        r.leading -= q.weights[k] * d * leading_asymptotic(phi, alpha, lam);
        r.neumann -= q.weights[k] * d * neumann_leading(phi, alpha, lam);
    }
    return r;
}

}  // namespace hall

#include "hall_lab/operators.hpp"

#include <cmath>
#include <numbers>

#include "hall_lab/errors.hpp"

namespace hall {

namespace {

void require_same_box(const Box& a, const Box& b) {
    if (!(a == b)) throw ContractError("box mismatch");
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

double LatticeOperator::hermitian_defect() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }

EdgeGeometry make_edge_geometry(std::pair<int, int> x1_range, int a, int x2_top) {
    if (a < 0) throw ConfigError("edge height a must be nonnegative");
    return EdgeGeometry{a, make_box(x1_range, {-a, x2_top})};
}

LatticeOperator harper_hamiltonian(const Box& box, double phi) {
    const int n = box.n_sites();
    LatticeOperator h{box, Eigen::MatrixXcd::Zero(n, n), true};
    for (int k = 0; k < n; ++k) {
        auto [x1, x2] = box.site(k);
        if (box.contains(x1 + 1, x2)) {
            int j = box.index(x1 + 1, x2);
            h.matrix(k, j) = 1.0;
            h.matrix(j, k) = 1.0;
        }
        if (box.contains(x1, x2 + 1)) {
            // x = x' + e2 with x = (x1, x2 + 1), x' = (x1, x2)
            int j = box.index(x1, x2 + 1);
            cplx up = std::polar(1.0, phi * x1);
            h.matrix(j, k) = up;
            h.matrix(k, j) = std::conj(up);
        }
    }
    return h;
}

double site_uniform(std::uint64_t seed, int x1, int x2) {
    std::uint64_t key = splitmix64(seed);
    key = splitmix64(key ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(x1)));
    key = splitmix64(key ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x2)) << 32));
    // 53 random bits shifted to the open interval (0,1)
    return (static_cast<double>(key >> 11) + 0.5) * 0x1.0p-53;
}

DiagonalOperator cauchy_potential(const Box& box, const DisorderConfig& cfg) {
    DiagonalOperator d{box, Eigen::VectorXcd::Zero(box.n_sites()), true};
    if (cfg.alpha == 0.0) return d;
    for (int k = 0; k < box.n_sites(); ++k) {
        auto [x1, x2] = box.site(k);
        double u = site_uniform(cfg.seed, x1, x2);
        d.values(k) = cfg.alpha * std::tan(std::numbers::pi * (u - 0.5));
    }
    return d;
}

LatticeOperator add_diagonal(const LatticeOperator& h, const DiagonalOperator& v) {
    require_same_box(h.box, v.box);
    LatticeOperator out = h;
    out.matrix.diagonal() += v.values;
    out.hermitian = h.hermitian && v.real;
    return out;
}

LatticeOperator conjugate_diagonal(const LatticeOperator& h, const DiagonalOperator& u) {
    require_same_box(h.box, u.box);
    LatticeOperator out = h;
    out.matrix = u.values.asDiagonal() * h.matrix * u.values.conjugate().asDiagonal();
    if (h.hermitian) out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
    return out;
}

HalfPlaneRestriction restrict_half_plane(const LatticeOperator& h_b, const EdgeGeometry& geom) {
    const Box& bb = h_b.box;
    const Box& sb = geom.strip;
    if (sb.x1_min != bb.x1_min || sb.x1_max != bb.x1_max || sb.x2_max != bb.x2_max || sb.x2_min != -geom.a)
        throw ConfigError("edge geometry does not match the bulk box");
    const int n = bb.n_sites();
    if (-geom.a <= bb.x2_min) {
        return {h_b, LatticeOperator{bb, Eigen::MatrixXcd::Zero(n, n), false}};
    }
    // rows x2 >= -a are a contiguous tail block in row-major order
    const int first = bb.index(bb.x1_min, -geom.a);
    const int m = n - first;
    LatticeOperator h_a{sb, h_b.matrix.bottomRightCorner(m, m), h_b.hermitian};
    LatticeOperator e_a{bb, Eigen::MatrixXcd::Zero(n, n), false};
    e_a.matrix.topRightCorner(first, m) = -h_b.matrix.topRightCorner(first, m);
    return {h_a, e_a};
}

LatticeOperator commutator_switch(const LatticeOperator& h, const DiagonalOperator& lambda) {
    require_same_box(h.box, lambda.box);
    const int n = h.box.n_sites();
    LatticeOperator c{h.box, Eigen::MatrixXcd::Zero(n, n), false};
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            cplx d = lambda.values(j) - lambda.values(i);
            if (d != 0.0) c.matrix(i, j) = d * h.matrix(i, j);
        }
    return c;
}

double short_range_constant(const LatticeOperator& h, double mu) {
    if (!(mu > 0)) throw ContractError("mu must be positive");
    const Box& b = h.box;
    double best = 0;
    for (int i = 0; i < b.n_sites(); ++i) {
        SitePoint x = b.point(i);
        double s = 0;
        for (int j = 0; j < b.n_sites(); ++j) {
            double m = std::abs(h.matrix(i, j));
            if (m == 0 || i == j) continue;
            s += m * std::expm1(mu * distance1(x, b.point(j)));
        }
        best = std::max(best, s);
    }
    return best;
}

double boundary_defect_norm(const LatticeOperator& e_a, double mu, int a) {
    const Box& b = e_a.box;
    double best = 0;
    for (int i = 0; i < b.n_sites(); ++i) {
        auto [x1, x2] = b.site(i);
        double s = 0;
        for (int j = 0; j < b.n_sites(); ++j) {
            double m = std::abs(e_a.matrix(i, j));
            if (m == 0) continue;
            int y1 = b.site(j).first;
            s += m * std::exp(mu * (std::abs(x2 + a) + std::abs(x1 - y1)));
        }
        best = std::max(best, s);
    }
    return best;
}

}  // namespace hall

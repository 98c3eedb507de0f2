#include "hall_lab/topology.hpp"

#include <cmath>
#include <numbers>

#include "hall_lab/errors.hpp"

namespace hall {

FluxUnitary flux_unitary(const Box& box, const SitePoint& p) {
    if (!p.is_plaquette_center()) throw ContractError("flux unitary needs a plaquette center");
    FluxUnitary u{p, DiagonalOperator{box, Eigen::VectorXcd(box.n_sites()), false}};
    for (int k = 0; k < box.n_sites(); ++k) {
        auto [x1, x2] = box.site(k);
        u.phases.values(k) = std::polar(1.0, std::atan2(x2 - p.x2(), x1 - p.x1()));
    }
    return u;
}

IndexResult index_pair(const LatticeOperator& p, const FluxUnitary& u, const TraceWindow& w) {
    if (!(p.box == u.phases.box)) throw ContractError("box mismatch");
    const auto& d = u.phases.values;
    Eigen::MatrixXcd q = d.asDiagonal() * p.matrix * d.conjugate().asDiagonal();
    Eigen::MatrixXcd diff = q - p.matrix;
    Eigen::MatrixXcd sq = diff * diff;
    Eigen::VectorXcd density = sq.cwiseProduct(diff.transpose()).rowwise().sum();
    cplx win = 0;
    for (int k : w.sites(p.box)) win += density(k);
    return {win.real(), std::abs(density.sum())};
}

ConnesSum connes_area_sum(const SitePoint& u1, const SitePoint& u2, const SitePoint& u3, int radius) {
    if (radius < 1) throw ContractError("Connes sum needs R >= 1");
    const SitePoint u[3] = {u1, u2, u3};
    ConnesSum s{0.0, 0};
    // plaquette centers (i + 1/2, j + 1/2) with |p| <= R
    for (int i = -radius - 1; i <= radius; ++i)
        for (int j = -radius - 1; j <= radius; ++j) {
            SitePoint p = SitePoint::plaquette(i, j);
            if (norm1(p) > radius) continue;
            double acc = 0;
            for (int k = 0; k < 3; ++k) {
                const SitePoint& a = u[(k + 1) % 3];
                const SitePoint& b = u[(k + 2) % 3];
                double a1 = a.x1() - p.x1(), a2 = a.x2() - p.x2(), b1 = b.x1() - p.x1(), b2 = b.x2() - p.x2();
                if (a1 * b2 - a2 * b1 == 0.0 && a1 * b1 + a2 * b2 < 0.0) {
                    ++s.between_count;
                    continue;
                }
                acc += std::sin(sight_angle(p, a, b));
            }
            s.value += acc;
        }
    return s;
}

double trace_per_unit_volume_marker(const LatticeOperator& p, int l_inner, int bond_cutoff) {
    const Box& box = p.box;
    const int reach = l_inner + bond_cutoff;
    if (-reach < box.x1_min || reach > box.x1_max || -reach < box.x2_min || reach > box.x2_max)
        throw ConfigError("marker window plus halo exceeds the box");
    // offsets within the cutoff ball
    std::vector<std::pair<int, int>> offs;
    for (int d1 = -bond_cutoff; d1 <= bond_cutoff; ++d1)
        for (int d2 = -bond_cutoff; d2 <= bond_cutoff; ++d2)
            if (std::abs(d1) + std::abs(d2) <= bond_cutoff) offs.emplace_back(d1, d2);
    const int m = static_cast<int>(offs.size());
    Eigen::MatrixXcd sub(m, m);
    Eigen::VectorXcd px(m), pxr(m);
    cplx acc = 0;
    for (int x2 = -l_inner; x2 <= l_inner; ++x2)
        for (int x1 = -l_inner; x1 <= l_inner; ++x1) {
            const int x = box.index(x1, x2);
            std::vector<int> idx(m);
            for (int a = 0; a < m; ++a) idx[a] = box.index(x1 + offs[a].first, x2 + offs[a].second);
            for (int a = 0; a < m; ++a) {
                px(a) = p.matrix(x, idx[a]);
                pxr(a) = p.matrix(idx[a], x);
            }
            for (int b = 0; b < m; ++b)
                for (int a = 0; a < m; ++a) sub(a, b) = p.matrix(idx[a], idx[b]);
            // Area(x,y,z) = (1/2)(a1 b2 - a2 b1) with a = y - x, b = z - x
            cplx s = 0;
            for (int a = 0; a < m; ++a) {
                if (px(a) == 0.0) continue;
                cplx inner = 0;
                for (int b = 0; b < m; ++b) {
                    double area = 0.5 * (offs[a].first * offs[b].second - offs[a].second * offs[b].first);
                    if (area != 0.0) inner += sub(a, b) * pxr(b) * area;
                }
                s += px(a) * inner;
            }
            acc += s;
        }
    const double vol = (2.0 * l_inner + 1) * (2.0 * l_inner + 1);
    return (cplx(0.0, -2.0) * acc / vol).real();
}

}  // namespace hall

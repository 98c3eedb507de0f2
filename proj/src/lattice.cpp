#include "hall_lab/lattice.hpp"

#include <cmath>
#include <string>

#include "hall_lab/errors.hpp"

namespace hall {

AmbiguousCutError::AmbiguousCutError(double eigenvalue, double cut)
    : std::runtime_error("ambiguous spectral cut at " + std::to_string(cut) + ": eigenvalue " +
                         std::to_string(eigenvalue) + " lies within tie tolerance"),
      eigenvalue_(eigenvalue), cut_(cut) {}

double norm1(const SitePoint& p) { return std::abs(p.x1()) + std::abs(p.x2()); }

double distance1(const SitePoint& p, const SitePoint& q) {
    return std::abs(p.x1() - q.x1()) + std::abs(p.x2() - q.x2());
}

SitePoint Box::point(int k) const {
    auto [x1, x2] = site(k);
    return SitePoint::site(x1, x2);
}

Box make_box(std::pair<int, int> x1_range, std::pair<int, int> x2_range) {
    if (x1_range.first > x1_range.second || x2_range.first > x2_range.second)
        throw ConfigError("empty box range");
    return Box{x1_range.first, x1_range.second, x2_range.first, x2_range.second};
}

DiagonalOperator switch_function(const Box& box, int axis, double offset) {
    if (axis != 1 && axis != 2) throw ContractError("switch axis must be 1 or 2");
    if (2.0 * offset != std::round(2.0 * offset)) throw ContractError("switch offset must be a half-integer");
    DiagonalOperator d{box, Eigen::VectorXcd::Zero(box.n_sites()), true};
    for (int k = 0; k < box.n_sites(); ++k) {
        auto [x1, x2] = box.site(k);
        double c = axis == 1 ? x1 : x2;
        if (c < offset) d.values(k) = 1.0;
    }
    return d;
}

DiagonalOperator lipschitz_weight(const Box& box, const std::function<double(int, int)>& ell, double delta) {
    DiagonalOperator d{box, Eigen::VectorXcd::Zero(box.n_sites()), true};
    for (int k = 0; k < box.n_sites(); ++k) {
        auto [x1, x2] = box.site(k);
        double l = ell(x1, x2);
        const int nb[2][2] = {{x1 + 1, x2}, {x1, x2 + 1}};
        for (const auto& n : nb) {
            if (!box.contains(n[0], n[1])) continue;
            if (std::abs(ell(n[0], n[1]) - l) > 1.0 + 1e-12)
                throw ContractError("weight function is not 1-Lipschitz at site (" + std::to_string(x1) + "," +
                                    std::to_string(x2) + ")");
        }
        d.values(k) = std::exp(delta * l);
    }
    return d;
}

double oriented_area(const SitePoint& x, const SitePoint& y, const SitePoint& z) {
    return 0.5 * ((x.x1() - y.x1()) * (y.x2() - z.x2()) - (x.x2() - y.x2()) * (y.x1() - z.x1()));
}

double sight_angle(const SitePoint& p, const SitePoint& u, const SitePoint& v) {
    double a1 = u.x1() - p.x1(), a2 = u.x2() - p.x2();
    double b1 = v.x1() - p.x1(), b2 = v.x2() - p.x2();
    return std::atan2(a1 * b2 - a2 * b1, a1 * b1 + a2 * b2);
}

}  // namespace hall

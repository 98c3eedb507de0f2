#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hall_lab/errors.hpp"
#include "hall_lab/spectral.hpp"

using namespace hall;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_SUITE("operators") {

TEST_CASE("harper hopping pattern") {
    const double phi = 0.37;
    Box b = make_box({-3, 3}, {-2, 4});
    LatticeOperator h = harper_hamiltonian(b, phi);
    CHECK(h.hermitian);
    CHECK(h.hermitian_defect() == 0.0);
    for (int x2 = b.x2_min; x2 <= b.x2_max; ++x2)
        for (int x1 = b.x1_min; x1 <= b.x1_max; ++x1) {
            const int i = b.index(x1, x2);
            if (x1 < b.x1_max) CHECK(h.matrix(i, b.index(x1 + 1, x2)) == cplx(1.0));
            if (x2 > b.x2_min) CHECK(std::abs(h.matrix(i, b.index(x1, x2 - 1)) - std::polar(1.0, phi * x1)) < 1e-15);
            if (x2 < b.x2_max) CHECK(std::abs(h.matrix(i, b.index(x1, x2 + 1)) - std::polar(1.0, -phi * x1)) < 1e-15);
        }
    int nonzero = 0;
    for (int i = 0; i < b.n_sites(); ++i)
        for (int j = 0; j < b.n_sites(); ++j)
            if (h.matrix(i, j) != cplx(0.0)) {
                ++nonzero;
                CHECK(std::abs(std::abs(h.matrix(i, j)) - 1.0) < 1e-15);
            }
    CHECK(nonzero == 2 * (b.height() * (b.width() - 1) + b.width() * (b.height() - 1)));
}

TEST_CASE("zero flux is the grid adjacency") {
    Box b = make_box({0, 4}, {0, 3});
    Eigen::MatrixXcd h = harper_hamiltonian(b, 0.0).matrix;
    CHECK(h.imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(h.real().sum() == doctest::Approx(2.0 * (4 * 4 + 5 * 3)));
}

TEST_CASE("plaquette wilson loops") {
    for (double phi : {0.0, 1.0, 2 * kPi / 3, kPi, -2.2}) {
        Box b = make_box({-5, 5}, {-5, 5});
        Eigen::MatrixXcd h = harper_hamiltonian(b, phi).matrix;
        for (int x2 = b.x2_min; x2 < b.x2_max; ++x2)
            for (int x1 = b.x1_min; x1 < b.x1_max; ++x1) {
                int v1 = b.index(x1, x2), v2 = b.index(x1 + 1, x2), v3 = b.index(x1 + 1, x2 + 1),
                    v4 = b.index(x1, x2 + 1);
                cplx w = h(v1, v4) * h(v4, v3) * h(v3, v2) * h(v2, v1);
                CHECK(std::abs(w - std::polar(1.0, phi)) < 1e-14);
            }
    }
}

TEST_CASE("cauchy potential") {
    Box b = make_box({-6, 6}, {-6, 6});
    CHECK(cauchy_potential(b, {0.0, 7}).values.cwiseAbs().maxCoeff() == 0.0);
    auto v1 = cauchy_potential(b, {1.5, 42}), v2 = cauchy_potential(b, {1.5, 42});
    CHECK(v1.values == v2.values);
    CHECK(v1.real);
    CHECK(v1.values.imag().cwiseAbs().maxCoeff() == 0.0);
    auto v3 = cauchy_potential(b, {1.5, 43});
    CHECK(v3.values != v1.values);
    Box bigger = make_box({-9, 9}, {-9, 9});
    auto vb = cauchy_potential(bigger, {1.5, 42});
    CHECK(vb.at(2, -3) == v1.at(2, -3));

    std::vector<double> samples;
    for (int x2 = 0; x2 < 250; ++x2)
        for (int x1 = 0; x1 < 400; ++x1) {
            double u = site_uniform(2024, x1, x2);
            REQUIRE(u > 0.0);
            REQUIRE(u < 1.0);
            samples.push_back(std::tan(kPi * (u - 0.5)));
        }
    std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
    double median = samples[samples.size() / 2];
    CHECK(std::abs(median) <= 0.02);
    double within_one = 0;
    for (double s : samples) within_one += std::abs(s) < 1.0;
    CHECK(within_one / samples.size() == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("half-plane restriction") {
    const double phi = 2 * kPi / 3;
    Box bulk = make_box({-6, 6}, {-8, 5});
    LatticeOperator hb = harper_hamiltonian(bulk, phi);
    const int a = 4;
    EdgeGeometry g = make_edge_geometry({-6, 6}, a, 5);
    CHECK(g.strip.x2_min == -a);
    HalfPlaneRestriction r = restrict_half_plane(hb, g);
    CHECK(r.h_a.box == g.strip);
    for (int k = 0; k < g.strip.n_sites(); ++k)
        for (int j = 0; j < g.strip.n_sites(); ++j) {
            auto [x1, x2] = g.strip.site(k);
            auto [y1, y2] = g.strip.site(j);
            CHECK(r.h_a.matrix(k, j) == hb.matrix(bulk.index(x1, x2), bulk.index(y1, y2)));
        }
    for (int i = 0; i < bulk.n_sites(); ++i)
        for (int j = 0; j < bulk.n_sites(); ++j) {
            cplx e = r.e_a.matrix(i, j);
            if (e == cplx(0.0)) continue;
            auto [x1, x2] = bulk.site(i);
            auto [y1, y2] = bulk.site(j);
            CHECK(x2 == -a - 1);
            CHECK(y2 == -a);
            CHECK(x1 == y1);
            CHECK(e == -hb.matrix(i, j));
        }
    CHECK(short_range_constant(r.h_a, 1.0) <= short_range_constant(hb, 1.0));

    CHECK_THROWS_AS(restrict_half_plane(hb, make_edge_geometry({-5, 6}, a, 5)), ConfigError);
    HalfPlaneRestriction whole = restrict_half_plane(hb, make_edge_geometry({-6, 6}, 8, 5));
    CHECK(whole.h_a.matrix == hb.matrix);
    CHECK(whole.e_a.matrix.cwiseAbs().maxCoeff() == 0.0);
    CHECK(boundary_defect_norm(whole.e_a, 1.0, 8) == 0.0);
}

TEST_CASE("boundary defect norm against enumeration") {
    Box bulk = make_box({-5, 5}, {-7, 4});
    LatticeOperator hb = add_diagonal(harper_hamiltonian(bulk, 1.1), cauchy_potential(bulk, {2.0, 3}));
    const int a = 3;
    HalfPlaneRestriction r = restrict_half_plane(hb, make_edge_geometry({-5, 5}, a, 4));
    for (double mu : {0.0, 0.5, 1.0, 2.0}) {
        double oracle = 0;
        for (int i = 0; i < bulk.n_sites(); ++i) {
            double row = 0;
            for (int j = 0; j < bulk.n_sites(); ++j) {
                auto [x1, x2] = bulk.site(i);
                auto [y1, y2] = bulk.site(j);
                row += std::abs(r.e_a.matrix(i, j)) * std::exp(mu * (std::abs(x2 + a) + std::abs(x1 - y1)));
            }
            oracle = std::max(oracle, row);
        }
        double v = boundary_defect_norm(r.e_a, mu, a);
        CHECK(v == doctest::Approx(oracle).epsilon(1e-14));
        CHECK(v <= 2 * std::exp(mu) + 1e-12);
    }
    CHECK(boundary_defect_norm(r.e_a, 0.0, a) == doctest::Approx(r.e_a.matrix.cwiseAbs().rowwise().sum().maxCoeff()));
}

TEST_CASE("switch commutators") {
    const double phi = 0.9;
    Box b = make_box({-4, 4}, {-4, 4});
    LatticeOperator h = harper_hamiltonian(b, phi);
    LatticeOperator c1 = commutator_switch(h, switch_function(b, 1));
    LatticeOperator c2 = commutator_switch(h, switch_function(b, 2));
    Eigen::MatrixXcd e1 = Eigen::MatrixXcd::Zero(b.n_sites(), b.n_sites());
    Eigen::MatrixXcd e2 = e1;
    for (int t = b.x2_min; t <= b.x2_max; ++t) {
        e1(b.index(0, t), b.index(-1, t)) = 1.0;
        e1(b.index(-1, t), b.index(0, t)) = -1.0;
    }
    for (int t = b.x1_min; t <= b.x1_max; ++t) {
        e2(b.index(t, 0), b.index(t, -1)) = std::polar(1.0, phi * t);
        e2(b.index(t, -1), b.index(t, 0)) = -std::polar(1.0, -phi * t);
    }
    CHECK((c1.matrix - e1).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((c2.matrix - e2).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((c1.matrix + c1.matrix.adjoint()).cwiseAbs().maxCoeff() == 0.0);

    DiagonalOperator one = switch_function(b, 1, 100.0);
    CHECK(commutator_switch(h, one).matrix.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS(commutator_switch(h, switch_function(make_box({-3, 3}, {-4, 4}), 1)));
}

TEST_CASE("short-range constant") {
    Box b = make_box({-4, 4}, {-4, 4});
    for (double phi : {0.0, 0.5, 2 * kPi / 3})
        CHECK(short_range_constant(harper_hamiltonian(b, phi), 1.0) == doctest::Approx(4 * (std::numbers::e - 1)).epsilon(1e-14));
    LatticeOperator d = add_diagonal(LatticeOperator{b, Eigen::MatrixXcd::Zero(b.n_sites(), b.n_sites()), true},
                                     cauchy_potential(b, {3.0, 1}));
    CHECK(short_range_constant(d, 1.0) == 0.0);
    CHECK(short_range_constant(harper_hamiltonian(b, 1.0), 1e-12) < 1e-11);
    CHECK_THROWS(short_range_constant(d, 0.0));
}

TEST_CASE("gauge conjugation preserves the spectrum") {
    Box b = make_box({-4, 4}, {-4, 4});
    LatticeOperator h = harper_hamiltonian(b, 2 * kPi / 3);
    DiagonalOperator u{b, Eigen::VectorXcd(b.n_sites()), false};
    for (int k = 0; k < b.n_sites(); ++k) u.values(k) = std::polar(1.0, 0.7 * k * k + 0.3);
    LatticeOperator g = conjugate_diagonal(h, u);
    CHECK(g.hermitian_defect() < 1e-14);
    Spectrum s1 = eigendecompose(h), s2 = eigendecompose(g);
    CHECK((s1.eigenvalues - s2.eigenvalues).cwiseAbs().maxCoeff() < 1e-12);
}

}

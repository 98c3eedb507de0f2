#pragma once

#include <vector>

namespace hall {

/// Gauss-Legendre nodes and weights on [a, b].
struct QuadratureRule {
    double a = -1.0;
    double b = 1.0;
    std::vector<double> nodes;
    std::vector<double> weights;

    int size() const { return static_cast<int>(nodes.size()); }
};

QuadratureRule gauss_legendre(int n, double a, double b);

}  // namespace hall

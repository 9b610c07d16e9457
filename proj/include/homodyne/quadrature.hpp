#pragma once

// Gaussian quadrature rules built from the three-term recurrence of the
// orthonormal polynomials (Golub-Welsch for a first guess, Newton polish on
// the recurrence, Christoffel-function weights). Weights stay accurate in the
// relative sense even in the far tail, which matters because callers divide
// the weight function back out of the integrand.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace homodyne::quadrature {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

namespace detail {

// Jacobi coefficients: p_{k+1} b_{k+1} = (x - a_k) p_k - b_k p_{k-1}.
struct Recurrence {
    std::function<double(std::size_t)> a;
    std::function<double(std::size_t)> b;  // b(0) unused
    double mass;                          // integral of the weight function
};

inline Rule gauss_rule(std::size_t n, const Recurrence& rec) {
    if (n == 0) {
        throw std::invalid_argument("quadrature rule needs at least one node");
    }
    Eigen::VectorXd diag(static_cast<Eigen::Index>(n));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 1 ? n - 1 : 1));
    for (std::size_t k = 0; k < n; ++k) {
        diag(static_cast<Eigen::Index>(k)) = rec.a(k);
        if (k + 1 < n) {
            sub(static_cast<Eigen::Index>(k)) = rec.b(k + 1);
        }
    }
    Eigen::VectorXd guess;
    if (n == 1) {
        guess = diag;
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, sub.head(static_cast<Eigen::Index>(n - 1)),
                                      Eigen::EigenvaluesOnly);
        guess = solver.eigenvalues();
    }

    const double p0 = 1.0 / std::sqrt(rec.mass);
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = guess(static_cast<Eigen::Index>(i));
        double christoffel = 0.0;
        for (int iter = 0; iter < 8; ++iter) {
            double pm = 0.0, pk = p0, dpm = 0.0, dpk = 0.0;
            christoffel = pk * pk;
            for (std::size_t k = 0; k < n; ++k) {
                const double bk = k == 0 ? 0.0 : rec.b(k);
                const double bk1 = rec.b(k + 1);
                const double pn = ((x - rec.a(k)) * pk - bk * pm) / bk1;
                const double dpn = ((x - rec.a(k)) * dpk + pk - bk * dpm) / bk1;
                pm = pk;
                pk = pn;
                dpm = dpk;
                dpk = dpn;
                if (k + 1 < n) {
                    christoffel += pk * pk;
                }
            }
            const double step = pk / dpk;
            x -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) {
                break;
            }
        }
        // recompute the Christoffel sum at the polished node
        double pm = 0.0, pk = p0;
        christoffel = pk * pk;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const double bk = k == 0 ? 0.0 : rec.b(k);
            const double pn = ((x - rec.a(k)) * pk - bk * pm) / rec.b(k + 1);
            pm = pk;
            pk = pn;
            christoffel += pk * pk;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 1.0 / christoffel;
    }
    return rule;
}

}  // namespace detail

/// Probabilists' Gauss-Hermite rule: integrates against the standard normal
/// density, so the weights sum to 1. Exact for polynomials of degree < 2n.
inline Rule gauss_hermite_normal(std::size_t n) {
    detail::Recurrence rec{
        [](std::size_t) { return 0.0; },
        [](std::size_t k) { return std::sqrt(static_cast<double>(k)); },
        1.0,
    };
    return detail::gauss_rule(n, rec);
}

/// Generalized Gauss-Laguerre rule for the weight t^alpha e^{-t} on [0, inf).
inline Rule gauss_laguerre(std::size_t n, double alpha) {
    if (!(alpha > -1.0)) {
        throw std::domain_error("Gauss-Laguerre exponent must exceed -1");
    }
    detail::Recurrence rec{
        [alpha](std::size_t k) { return 2.0 * static_cast<double>(k) + alpha + 1.0; },
        [alpha](std::size_t k) {
            const double kk = static_cast<double>(k);
            return std::sqrt(kk * (kk + alpha));
        },
        std::tgamma(alpha + 1.0),
    };
    return detail::gauss_rule(n, rec);
}

}  // namespace homodyne::quadrature

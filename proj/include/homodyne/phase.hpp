#pragma once

// Covariant phase observables generated by number-diagonal states.
//
// The angle margin of the phase-space observable generated by a diagonal
// sigma is the phase observable with matrix
//
//   c_mn = 2 int_0^inf r <m| W(r sqrt2, 0) sigma W(r sqrt2, 0)^* |n> dr
//        = sum_k lambda_k int_0^inf D_mk(sqrt t) D_nk(sqrt t) dt,
//
// where D(beta) is the displacement with real beta = r. Each integrand is
// e^{-t} t^{(|m-k| + |n-k|)/2} times a polynomial, so a generalized
// Gauss-Laguerre rule (exponent 0 or 1/2 by parity of m+n) integrates it
// exactly once it has enough nodes.

#include "homodyne/fock.hpp"
#include "homodyne/quadrature.hpp"
#include "homodyne/smearing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace homodyne {

inline constexpr std::size_t kDefaultPhaseMatrixSize = 32;
inline constexpr std::size_t kPhaseMatrixTrustRadius = 64;
inline constexpr std::size_t kMaxGeneratorLength = 160;
inline constexpr std::size_t kDefaultPhaseGrid = 1024;

class PhaseMatrix {
public:
    PhaseMatrix() = default;
    explicit PhaseMatrix(CMatrix c) : c_(std::move(c)) {
        if (c_.rows() != c_.cols() || c_.rows() == 0) {
            throw std::invalid_argument("phase matrix must be a non-empty square matrix");
        }
    }

    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(c_.rows()); }
    [[nodiscard]] cplx operator()(std::size_t m, std::size_t n) const {
        return c_(FockOperator::idx(m), FockOperator::idx(n));
    }
    [[nodiscard]] const CMatrix& matrix() const { return c_; }

    [[nodiscard]] double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (c_ + c_.adjoint()), Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff();
    }

private:
    CMatrix c_;
};

namespace detail {

// D_mk(sqrt t) e^{t/2}: the displacement element with its Gaussian factor
// stripped, for real nonnegative displacement sqrt(t).
inline double stripped_displacement(std::size_t m, std::size_t k, double t) {
    const std::size_t low = std::min(m, k);
    const std::size_t offset = m > k ? m - k : k - m;
    const double lag = laguerre(low, static_cast<double>(offset), t);
    if (lag == 0.0) {
        return 0.0;
    }
    double log_mag = 0.5 * (log_factorial(low) - log_factorial(low + offset));
    if (offset > 0) {
        if (t == 0.0) {
            return 0.0;
        }
        log_mag += 0.5 * static_cast<double>(offset) * std::log(t);
    }
    double value = std::exp(log_mag) * lag;
    if (m < k && offset % 2 == 1) {
        value = -value;  // (-conj beta)^offset with beta real
    }
    return value;
}

}  // namespace detail

/// Phase matrix of the angle margin generated by a diagonal state. The
/// eigenvalues are renormalized to unit trace, so c_nn = 1 exactly.
/// Refuses sizes beyond kPhaseMatrixTrustRadius.
inline PhaseMatrix phase_matrix(const DiagonalState& sigma, std::size_t size = kDefaultPhaseMatrixSize) {
    if (size == 0 || size > kPhaseMatrixTrustRadius) {
        throw std::domain_error("phase matrix size " + std::to_string(size) + " outside trust radius 1.." +
                                std::to_string(kPhaseMatrixTrustRadius));
    }
    std::vector<double> lambda = sigma.lambdas();
    double total = 0.0;
    for (double l : lambda) {
        total += l;
    }
    for (double& l : lambda) {
        l /= total;
    }
    std::size_t length = lambda.size();
    while (length > 1 && lambda[length - 1] < 1e-300) {
        --length;
    }
    if (length > kMaxGeneratorLength) {
        throw std::domain_error("generator has weight beyond Fock index " + std::to_string(kMaxGeneratorLength));
    }

    const std::size_t nodes = (size + length) / 2 + 2;
    const quadrature::Rule rules[2] = {quadrature::gauss_laguerre(nodes, 0.0), quadrature::gauss_laguerre(nodes, 0.5)};

    const auto d = FockOperator::idx(size);
    RVector diag_sum = RVector::Zero(d);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
    std::vector<double> stripped(size);
    for (int parity = 0; parity < 2; ++parity) {
        const auto& rule = rules[parity];
        for (std::size_t j = 0; j < rule.size(); ++j) {
            const double t = rule.nodes[j];
            const double w = rule.weights[j] * (parity == 1 ? 1.0 / std::sqrt(t) : 1.0);
            for (std::size_t k = 0; k < length; ++k) {
                if (lambda[k] == 0.0) {
                    continue;
                }
                for (std::size_t m = 0; m < size; ++m) {
                    stripped[m] = detail::stripped_displacement(m, k, t);
                }
                const double lw = lambda[k] * w;
                for (std::size_t m = 0; m < size; ++m) {
                    for (std::size_t n = m + static_cast<std::size_t>(parity); n < size; n += 2) {
                        c(FockOperator::idx(m), FockOperator::idx(n)) += lw * stripped[m] * stripped[n];
                    }
                }
            }
        }
    }
    CMatrix out(d, d);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = m; n < d; ++n) {
            out(m, n) = c(m, n);
            out(n, m) = c(m, n);
        }
        diag_sum(m) = c(m, m);
    }
    if ((diag_sum.array() - 1.0).abs().maxCoeff() > 1e-8) {
        throw std::runtime_error("phase matrix diagonal lost normalization; generator too long for the quadrature");
    }
    out.diagonal().setOnes();
    return PhaseMatrix(std::move(out));
}

/// Density p(alpha) w.r.t. d alpha, sampled on alpha_j = 2 pi j / G.
struct PhaseDistribution {
    std::vector<double> grid;
    std::vector<double> density;

    [[nodiscard]] std::size_t size() const { return grid.size(); }
    [[nodiscard]] double step() const { return 2.0 * std::numbers::pi / static_cast<double>(grid.size()); }
    /// Periodic trapezoid integral.
    [[nodiscard]] double integral() const {
        double s = 0.0;
        for (double v : density) {
            s += v;
        }
        return s * step();
    }
};

inline std::vector<double> uniform_angle_grid(std::size_t points) {
    if (points == 0) {
        throw std::invalid_argument("angle grid needs at least one point");
    }
    std::vector<double> g(points);
    for (std::size_t j = 0; j < points; ++j) {
        g[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(points);
    }
    return g;
}

/// Fourier weights b_k = sum_m c_{m,m+k} rho_{m+k,m}, k = 0..M-1, so that
/// p(alpha) = (1/2pi) [b_0 + 2 Re sum_{k>0} b_k e^{-ik alpha}].
inline std::vector<cplx> phase_fourier_weights(const FockOperator& rho, const PhaseMatrix& c) {
    const std::size_t size = std::min(rho.dim(), c.size());
    std::vector<cplx> b(size, cplx(0.0));
    for (std::size_t k = 0; k < size; ++k) {
        for (std::size_t m = 0; m + k < size; ++m) {
            b[k] += c(m, m + k) * rho(m + k, m);
        }
    }
    return b;
}

/// p(alpha) = (1/2pi) sum_{m,n} c_mn e^{i(m-n)alpha} <n|rho|m>.
inline PhaseDistribution phase_distribution(const FockOperator& rho, const PhaseMatrix& c,
                                            std::size_t grid_points = kDefaultPhaseGrid) {
    require_state(rho, "phase_distribution: signal");
    const auto b = phase_fourier_weights(rho, c);
    PhaseDistribution dist;
    dist.grid = uniform_angle_grid(grid_points);
    dist.density.resize(grid_points);
    for (std::size_t j = 0; j < grid_points; ++j) {
        const double alpha = dist.grid[j];
        double v = b[0].real();
        for (std::size_t k = 1; k < b.size(); ++k) {
            v += 2.0 * (b[k] * std::polar(1.0, -static_cast<double>(k) * alpha)).real();
        }
        dist.density[j] = v / (2.0 * std::numbers::pi);
    }
    return dist;
}

struct MinVariance {
    double value = 0.0;
    double reference_angle = 0.0;
};

namespace detail {

// a_k = int_0^{2pi} p(x) e^{-ikx} dx for k = 0..K. The windowed second moment
// about phi is then pi^2/3 a_0 + sum_{k>0} 4 (-1)^k / k^2 Re(a_k e^{ik phi}).
inline double windowed_second_moment(const std::vector<cplx>& a, double phi) {
    double v = a[0].real() * std::numbers::pi * std::numbers::pi / 3.0;
    for (std::size_t k = 1; k < a.size(); ++k) {
        const double kk = static_cast<double>(k);
        const double sign = k % 2 == 0 ? 1.0 : -1.0;
        v += 4.0 * sign / (kk * kk) * (a[k] * std::polar(1.0, kk * phi)).real();
    }
    return v;
}

inline MinVariance minimize_second_moment(const std::vector<cplx>& a, std::size_t scan_points) {
    const double two_pi = 2.0 * std::numbers::pi;
    const double h = two_pi / static_cast<double>(scan_points);
    double best_phi = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < scan_points; ++j) {
        const double phi = h * static_cast<double>(j);
        const double v = windowed_second_moment(a, phi);
        if (v < best) {
            best = v;
            best_phi = phi;
        }
    }
    // golden-section refinement on the bracketing cell
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = best_phi - h;
    double hi = best_phi + h;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = windowed_second_moment(a, x1);
    double f2 = windowed_second_moment(a, x2);
    for (int iter = 0; iter < 80 && hi - lo > 1e-12; ++iter) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = windowed_second_moment(a, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = windowed_second_moment(a, x2);
        }
    }
    const double phi = 0.5 * (lo + hi);
    const double v = windowed_second_moment(a, phi);
    MinVariance out;
    if (v < best) {
        out = {v, phi};
    } else {
        out = {best, best_phi};
    }
    out.reference_angle = std::fmod(std::fmod(out.reference_angle, two_pi) + two_pi, two_pi);
    return out;
}

}  // namespace detail

/// Fourier coefficients a_k, k = 0..G/2-1, of a grid-sampled distribution.
/// Exact for trigonometric polynomials of degree below G/2.
inline std::vector<cplx> fourier_coefficients(const PhaseDistribution& dist) {
    const std::size_t g = dist.size();
    const std::size_t count = std::max<std::size_t>(1, g / 2);
    std::vector<cplx> a(count, cplx(0.0));
    for (std::size_t k = 0; k < count; ++k) {
        cplx s(0.0);
        for (std::size_t j = 0; j < g; ++j) {
            s += dist.density[j] * std::polar(1.0, -static_cast<double>(k) * dist.grid[j]);
        }
        a[k] = s * dist.step();
    }
    return a;
}

/// inf over phi of int_{phi-pi}^{phi+pi} (alpha - phi)^2 p(alpha) d alpha.
/// The uniform density 1/2pi gives pi^2/3.
inline MinVariance min_variance(const PhaseDistribution& dist) {
    return detail::minimize_second_moment(fourier_coefficients(dist), dist.size());
}

/// Probability mass of each of `bins` equal sectors [2pi j/B, 2pi (j+1)/B).
inline std::vector<double> bin_probabilities(const PhaseDistribution& dist, std::size_t bins) {
    const auto a = fourier_coefficients(dist);
    const double width = 2.0 * std::numbers::pi / static_cast<double>(bins);
    std::vector<double> probs(bins);
    for (std::size_t j = 0; j < bins; ++j) {
        const double lo = width * static_cast<double>(j);
        double mass = a[0].real() * width;
        for (std::size_t k = 1; k < a.size(); ++k) {
            const double kk = static_cast<double>(k);
            // int_lo^{lo+w} e^{ikx} dx
            const cplx seg = (std::polar(1.0, kk * (lo + width)) - std::polar(1.0, kk * lo)) / cplx(0.0, kk);
            mass += 2.0 * (a[k] * seg).real();
        }
        probs[j] = mass / (2.0 * std::numbers::pi);
    }
    return probs;
}

struct SmearingRatios {
    std::vector<double> ratios;  // NaN where flagged
    std::vector<bool> flagged;   // vanishing denominator
};

/// r_m = c^{mu_eps * sigma}_{m,m+k} / c^{sigma}_{m,m+k}, m = 0..m_max.
inline SmearingRatios smearing_ratio(const DiagonalState& sigma, Efficiency eps, std::size_t k, std::size_t m_max,
                                     std::size_t cutoff = kDefaultCutoff) {
    const std::size_t size = m_max + k + 1;
    const PhaseMatrix ideal = phase_matrix(sigma, size);
    const FockOperator smeared_state = convolve_state(GaussianSmear::isotropic(eps), sigma.to_operator(cutoff));
    const PhaseMatrix smeared = phase_matrix(DiagonalState::from_operator(smeared_state), size);
    SmearingRatios out;
    for (std::size_t m = 0; m <= m_max; ++m) {
        const double den = ideal(m, m + k).real();
        if (std::abs(den) < 1e-14) {
            out.ratios.push_back(std::numeric_limits<double>::quiet_NaN());
            out.flagged.push_back(true);
        } else {
            out.ratios.push_back(smeared(m, m + k).real() / den);
            out.flagged.push_back(false);
        }
    }
    return out;
}

/// c_{m,m+k} for m = 0..m_max.
inline std::vector<double> tail_limit_check(const DiagonalState& sigma, std::size_t k, std::size_t m_max) {
    const PhaseMatrix c = phase_matrix(sigma, m_max + k + 1);
    std::vector<double> out;
    for (std::size_t m = 0; m <= m_max; ++m) {
        out.push_back(c(m, m + k).real());
    }
    return out;
}

}  // namespace homodyne

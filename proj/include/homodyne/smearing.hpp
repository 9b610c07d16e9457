#pragma once

// Gaussian smearing caused by detector inefficiency. A homodyne pair with
// overall efficiency eps contributes variance (1 - eps)/eps along its
// quadrature; the resulting measure convolves both the phase-space
// observable and, equivalently, its generating state.

#include "homodyne/fock.hpp"
#include "homodyne/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace homodyne {

/// Quantum efficiency in (0, 1].
class Efficiency {
public:
    explicit Efficiency(double value) : value_(value) {
        if (!(value > 0.0 && value <= 1.0)) {
            throw std::domain_error("efficiency must lie in (0, 1], got " + std::to_string(value));
        }
    }
    [[nodiscard]] double value() const { return value_; }
    operator double() const { return value_; }  // NOLINT(google-explicit-constructor)

private:
    double value_;
};

/// eps_ij = 2 eps_i eps_j / (eps_i + eps_j)
inline Efficiency overall_efficiency(Efficiency ei, Efficiency ej) {
    const double v = 2.0 * ei.value() * ej.value() / (ei.value() + ej.value());
    // the harmonic mean can round a hair outside [min, max]
    return Efficiency(std::clamp(v, std::min(ei.value(), ej.value()), std::max(ei.value(), ej.value())));
}

/// Centered Gaussian probability measure on the (q,p) plane, diagonal in the
/// quadrature axes. A zero variance is a point mass along that axis.
class GaussianSmear {
public:
    GaussianSmear() = default;
    GaussianSmear(double var_q, double var_p) : var_q_(var_q), var_p_(var_p) {
        if (!(var_q >= 0.0) || !(var_p >= 0.0) || !std::isfinite(var_q) || !std::isfinite(var_p)) {
            throw std::domain_error("smearing variances must be finite and nonnegative");
        }
    }

    /// mu_{eps13, eps24}: var_q = (1 - eps13)/eps13, var_p = (1 - eps24)/eps24.
    static GaussianSmear from_efficiencies(Efficiency e13, Efficiency e24) {
        return {(1.0 - e13.value()) / e13.value(), (1.0 - e24.value()) / e24.value()};
    }
    static GaussianSmear isotropic(Efficiency e) { return from_efficiencies(e, e); }
    static GaussianSmear ideal() { return {0.0, 0.0}; }

    [[nodiscard]] double var_q() const { return var_q_; }
    [[nodiscard]] double var_p() const { return var_p_; }
    [[nodiscard]] bool is_ideal() const { return var_q_ == 0.0 && var_p_ == 0.0; }
    [[nodiscard]] bool is_isotropic(double tol = 0.0) const { return std::abs(var_q_ - var_p_) <= tol; }

    /// Lebesgue density; undefined (throws) when an axis is degenerate.
    [[nodiscard]] double density(double q, double p) const {
        if (var_q_ == 0.0 || var_p_ == 0.0) {
            throw std::domain_error("smearing measure with a degenerate axis has no density");
        }
        return std::exp(-0.5 * q * q / var_q_ - 0.5 * p * p / var_p_) /
               (2.0 * std::numbers::pi * std::sqrt(var_q_ * var_p_));
    }

private:
    double var_q_ = 0.0;
    double var_p_ = 0.0;
};

/// mu-hat(p, -q) = int e^{i(px - qy)} dmu(x, y) = exp(-var_p q^2/2 - var_q p^2/2).
/// Note the crossing: the q argument pairs with the p-axis variance.
inline double characteristic(const GaussianSmear& smear, double q, double p) {
    return std::exp(-0.5 * smear.var_p() * q * q - 0.5 * smear.var_q() * p * p);
}

/// Convolution of measures: axis variances add.
inline GaussianSmear compose_measures(const GaussianSmear& s1, const GaussianSmear& s2) {
    return {s1.var_q() + s2.var_q(), s1.var_p() + s2.var_p()};
}

/// Eigenvalue sequence of a number-diagonal state, kept unnormalized so a
/// truncation deficit stays visible. Weights may sum to less than 1.
class DiagonalState {
public:
    DiagonalState() = default;
    explicit DiagonalState(std::vector<double> lambdas) : lambdas_(std::move(lambdas)) {
        if (lambdas_.empty()) {
            throw std::invalid_argument("diagonal state needs at least one eigenvalue");
        }
        double total = 0.0;
        for (double& l : lambdas_) {
            if (l < -kNegativityTol) {
                throw std::domain_error("diagonal state has a negative weight " + std::to_string(l));
            }
            l = std::max(l, 0.0);
            total += l;
        }
        // a sum below 1 is a truncation deficit and stays visible via deficit()
        if (total > 1.0 + kStateTraceTol || !(total > 0.0)) {
            throw std::domain_error("diagonal state weights sum to " + std::to_string(total));
        }
    }

    static DiagonalState number(std::size_t n, std::size_t dim) {
        std::vector<double> l(std::max(dim, n + 1), 0.0);
        l[n] = 1.0;
        return DiagonalState(std::move(l));
    }
    static DiagonalState vacuum(std::size_t dim = 1) { return number(0, dim); }

    /// Diagonal of a state that is already known to be diagonal.
    static DiagonalState from_operator(const FockOperator& op) {
        std::vector<double> l(op.dim());
        for (std::size_t k = 0; k < op.dim(); ++k) {
            l[k] = op(k, k).real();
        }
        return DiagonalState(std::move(l));
    }

    [[nodiscard]] const std::vector<double>& lambdas() const { return lambdas_; }
    [[nodiscard]] std::size_t size() const { return lambdas_.size(); }
    [[nodiscard]] double operator[](std::size_t k) const { return k < lambdas_.size() ? lambdas_[k] : 0.0; }
    [[nodiscard]] double deficit() const {
        double total = 0.0;
        for (double l : lambdas_) {
            total += l;
        }
        return 1.0 - total;
    }
    [[nodiscard]] FockOperator to_operator(std::size_t dim) const {
        std::vector<double> l(dim, 0.0);
        std::copy_n(lambdas_.begin(), std::min(dim, lambdas_.size()), l.begin());
        return FockOperator::diagonal(l);
    }

private:
    std::vector<double> lambdas_;
};

/// lambda_n = eps (1 - eps)^n for n < dim, not renormalized.
inline DiagonalState geometric_state(Efficiency eps, std::size_t dim = kDefaultCutoff) {
    std::vector<double> l(dim);
    double w = eps.value();
    for (std::size_t n = 0; n < dim; ++n) {
        l[n] = w;
        w *= 1.0 - eps.value();
    }
    return DiagonalState(std::move(l));
}

namespace detail {

struct AxisRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Rule for int N(0, v)(x) f(x) dx when f(x) = e^{-x^2/2} * polynomial, which
// is the shape of every entry of W(q,p) sigma W(q,p)^* for finite-rank sigma.
// Gauss-Hermite is taken against the combined Gaussian of variance
// s^2 = v/(1+v), so the rule is exact for polynomial parts of degree < 2n.
inline AxisRule smear_axis_rule(double variance, std::size_t n) {
    if (variance == 0.0) {
        return {{0.0}, {1.0}};
    }
    const double s = std::sqrt(variance / (1.0 + variance));
    const auto gh = quadrature::gauss_hermite_normal(n);
    AxisRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = s * gh.nodes[i];
        rule.nodes[i] = x;
        rule.weights[i] = (s / std::sqrt(variance)) * gh.weights[i] * std::exp(0.5 * x * x);
    }
    return rule;
}

// sigma = F F^dag with F = V sqrt(Lambda), dropping negligible eigenvalues.
inline CMatrix state_factor(const FockOperator& sigma) {
    bool diagonal = true;
    for (std::size_t m = 0; m < sigma.dim() && diagonal; ++m) {
        for (std::size_t n = 0; n < sigma.dim(); ++n) {
            if (m != n && sigma(m, n) != cplx(0.0)) {
                diagonal = false;
                break;
            }
        }
    }
    std::vector<Eigen::Index> cols;
    CMatrix vecs;
    RVector vals;
    if (diagonal) {
        vals = sigma.matrix().diagonal().real();
        vecs = CMatrix::Identity(sigma.matrix().rows(), sigma.matrix().cols());
    } else {
        const auto eig = eig_hermitian(sigma);
        vals = eig.eigenvalues;
        vecs = eig.eigenvectors;
    }
    for (Eigen::Index k = 0; k < vals.size(); ++k) {
        if (vals(k) > 1e-300) {
            cols.push_back(k);
        }
    }
    CMatrix factor(vecs.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        factor.col(static_cast<Eigen::Index>(j)) = vecs.col(cols[j]) * std::sqrt(vals(cols[j]));
    }
    return factor;
}

}  // namespace detail

inline constexpr std::size_t kDefaultSmearNodes = 41;

/// mu * sigma = int W(q,p) sigma W(q,p)^* dmu(q,p), on the same cutoff.
///
/// Entries of the output block are exact functions of the truncated sigma;
/// the weight that displacement pushes past the cutoff is simply lost, so the
/// trace deficit (1 - trace) reports it. Quadrature is a tensor Gauss-Hermite
/// rule per axis (see smear_axis_rule), with Kahan-compensated accumulation.
inline FockOperator convolve_state(const GaussianSmear& smear, const FockOperator& sigma,
                                   std::size_t nodes_per_axis = kDefaultSmearNodes) {
    require_state(sigma, "convolve_state: generator");
    if (smear.is_ideal()) {
        return sigma;
    }
    const std::size_t dim = sigma.dim();
    const CMatrix factor = detail::state_factor(sigma);
    const auto rq = detail::smear_axis_rule(smear.var_q(), nodes_per_axis);
    const auto rp = detail::smear_axis_rule(smear.var_p(), nodes_per_axis);

    const auto d = FockOperator::idx(dim);
    CMatrix sum = CMatrix::Zero(d, d);
    CMatrix comp = CMatrix::Zero(d, d);
    for (std::size_t i = 0; i < rq.nodes.size(); ++i) {
        for (std::size_t j = 0; j < rp.nodes.size(); ++j) {
            const double w = rq.weights[i] * rp.weights[j];
            const CMatrix b = weyl_operator(rq.nodes[i], rp.nodes[j], dim).matrix() * factor;
            const CMatrix term = w * (b * b.adjoint());
            const CMatrix y = term - comp;
            const CMatrix t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    // restore exact Hermiticity lost to rounding
    return FockOperator(CMatrix(0.5 * (sum + sum.adjoint())));
}

inline double trace_deficit(const FockOperator& state) { return 1.0 - state.trace().real(); }

inline double max_off_diagonal(const FockOperator& op) {
    double worst = 0.0;
    for (std::size_t m = 0; m < op.dim(); ++m) {
        for (std::size_t n = 0; n < op.dim(); ++n) {
            if (m != n) {
                worst = std::max(worst, std::abs(op(m, n)));
            }
        }
    }
    return worst;
}

/// True iff every off-diagonal entry has magnitude <= tol.
inline bool is_diagonal(const FockOperator& sigma, double tol = 1e-8) {
    if (!sigma.is_hermitian()) {
        throw std::domain_error("is_diagonal: operator is not Hermitian");
    }
    return max_off_diagonal(sigma) <= tol;
}

}  // namespace homodyne

#pragma once

// Truncated single-mode Fock space.
//
// Conventions: W(q,p) = e^{iqp/2} e^{-iqP} e^{ipQ} = D(beta) with
// beta = (q + ip)/sqrt(2), Q = (a + a^dag)/sqrt(2), P = (a - a^dag)/(i sqrt(2)).
// A coherent state |z> is W(q_z, p_z)|0> with z = (q_z + i p_z)/sqrt(2).
// Number-basis vectors are Hermite functions, which are real, so complex
// conjugation of the wavefunction is entrywise conjugation of coefficients.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace homodyne {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr std::size_t kDefaultCutoff = 64;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kNegativityTol = 1e-9;
// States handed to the library may already carry a truncation deficit.
inline constexpr double kStateTraceTol = 1e-6;

/// Square complex matrix on the number basis |0>, ..., |dim-1>.
class FockOperator {
public:
    FockOperator() = default;
    explicit FockOperator(std::size_t dim) : m_(CMatrix::Zero(idx(dim), idx(dim))) {
        if (dim == 0) {
            throw std::invalid_argument("Fock cutoff must be positive");
        }
    }
    explicit FockOperator(CMatrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0) {
            throw std::invalid_argument("Fock operator must be a non-empty square matrix");
        }
    }

    static FockOperator identity(std::size_t dim) {
        return FockOperator(CMatrix::Identity(idx(dim), idx(dim)));
    }
    static FockOperator projector(const CVector& psi) { return FockOperator(CMatrix(psi * psi.adjoint())); }
    static FockOperator diagonal(const std::vector<double>& values) {
        CMatrix m = CMatrix::Zero(idx(values.size()), idx(values.size()));
        for (std::size_t k = 0; k < values.size(); ++k) {
            m(idx(k), idx(k)) = values[k];
        }
        return FockOperator(std::move(m));
    }
    /// |m><n|
    static FockOperator ket_bra(std::size_t m, std::size_t n, std::size_t dim) {
        FockOperator op(dim);
        op.m_(idx(m), idx(n)) = 1.0;
        return op;
    }

    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    [[nodiscard]] cplx operator()(std::size_t m, std::size_t n) const { return m_(idx(m), idx(n)); }
    cplx& operator()(std::size_t m, std::size_t n) { return m_(idx(m), idx(n)); }
    [[nodiscard]] const CMatrix& matrix() const { return m_; }

    [[nodiscard]] cplx trace() const { return m_.trace(); }
    [[nodiscard]] FockOperator adjoint() const { return FockOperator(CMatrix(m_.adjoint())); }

    /// Largest entrywise deviation from Hermiticity.
    [[nodiscard]] double hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }
    [[nodiscard]] bool is_hermitian(double tol = kHermitianTol) const { return hermiticity_error() <= tol; }

    /// Leading dim x dim block (or zero padding when growing).
    [[nodiscard]] FockOperator resized(std::size_t dim) const {
        CMatrix out = CMatrix::Zero(idx(dim), idx(dim));
        const auto k = std::min<Eigen::Index>(idx(dim), m_.rows());
        out.topLeftCorner(k, k) = m_.topLeftCorner(k, k);
        return FockOperator(std::move(out));
    }

    friend FockOperator operator*(const FockOperator& a, const FockOperator& b) {
        return FockOperator(CMatrix(a.m_ * b.m_));
    }
    friend FockOperator operator+(const FockOperator& a, const FockOperator& b) {
        return FockOperator(CMatrix(a.m_ + b.m_));
    }
    friend FockOperator operator-(const FockOperator& a, const FockOperator& b) {
        return FockOperator(CMatrix(a.m_ - b.m_));
    }

    static Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

private:
    CMatrix m_;
};

inline double max_abs_difference(const FockOperator& a, const FockOperator& b) {
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

namespace detail {

inline double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// L_0^{(alpha)}(x), ..., L_{count-1}^{(alpha)}(x)
inline std::vector<double> laguerre_sequence(std::size_t count, double alpha, double x) {
    std::vector<double> l(count);
    if (count == 0) {
        return l;
    }
    l[0] = 1.0;
    if (count > 1) {
        l[1] = 1.0 + alpha - x;
    }
    for (std::size_t k = 1; k + 1 < count; ++k) {
        const double kk = static_cast<double>(k);
        l[k + 1] = ((2.0 * kk + 1.0 + alpha - x) * l[k] - (kk + alpha) * l[k - 1]) / (kk + 1.0);
    }
    return l;
}

inline double laguerre(std::size_t n, double alpha, double x) { return laguerre_sequence(n + 1, alpha, x)[n]; }

// <low + offset| D(beta) |low> / phase, for a fixed offset, from the closed
// form sqrt(low!/(low+offset)!) |beta|^offset e^{-|beta|^2/2} L_low^{(offset)}(|beta|^2).
inline double displacement_magnitude(std::size_t low, std::size_t offset, double beta_abs, double laguerre_value) {
    const double x = beta_abs * beta_abs;
    if (beta_abs == 0.0) {
        return offset == 0 ? laguerre_value : 0.0;
    }
    const double log_pref = 0.5 * (log_factorial(low) - log_factorial(low + offset)) +
                            static_cast<double>(offset) * std::log(beta_abs) - 0.5 * x;
    const double pref = std::exp(log_pref);
    // far out the Gaussian wins; avoid 0 * inf from an overflowed polynomial
    if (pref == 0.0) {
        return 0.0;
    }
    return pref * laguerre_value;
}

}  // namespace detail

/// <m| W(q,p) |n> via the associated-Laguerre closed form.
inline cplx weyl_matrix_element(std::size_t m, std::size_t n, double q, double p) {
    const cplx beta = cplx(q, p) / std::numbers::sqrt2;
    const double r = std::abs(beta);
    const std::size_t low = std::min(m, n);
    const std::size_t offset = m > n ? m - n : n - m;
    const double lag = detail::laguerre(low, static_cast<double>(offset), r * r);
    const double mag = detail::displacement_magnitude(low, offset, r, lag);
    if (offset == 0 || r == 0.0) {
        return mag;
    }
    // m > n carries beta^offset, m < n carries (-conj beta)^offset
    const cplx unit = m > n ? beta / r : -std::conj(beta) / r;
    return mag * std::pow(unit, static_cast<int>(offset));
}

/// Truncated W(q,p). Every entry with m, n < dim is exact; the matrix is only
/// unitary on the rows that do not leak weight past the cutoff (see
/// weyl_trust_radius).
inline FockOperator weyl_operator(double q, double p, std::size_t dim) {
    FockOperator w(dim);
    const cplx beta = cplx(q, p) / std::numbers::sqrt2;
    const double r = std::abs(beta);
    const cplx up = r > 0.0 ? beta / r : cplx(1.0);
    const cplx down = r > 0.0 ? -std::conj(beta) / r : cplx(1.0);
    for (std::size_t offset = 0; offset < dim; ++offset) {
        const auto lag = detail::laguerre_sequence(dim - offset, static_cast<double>(offset), r * r);
        const cplx up_phase = std::pow(up, static_cast<int>(offset));
        const cplx down_phase = std::pow(down, static_cast<int>(offset));
        for (std::size_t low = 0; low + offset < dim; ++low) {
            const double mag = detail::displacement_magnitude(low, offset, r, lag[low]);
            w(low + offset, low) = mag * up_phase;
            if (offset != 0) {
                w(low, low + offset) = mag * down_phase;
            }
        }
    }
    return w;
}

/// Number of leading rows of the truncated W(q,p) whose weight outside the
/// cutoff is below tol. Unitarity and displacement identities hold there.
inline std::size_t weyl_trust_radius(double q, double p, std::size_t dim, double tol = 1e-8) {
    const FockOperator w = weyl_operator(q, p, dim);
    std::size_t radius = 0;
    for (std::size_t m = 0; m < dim; ++m) {
        const double leaked = 1.0 - w.matrix().row(FockOperator::idx(m)).squaredNorm();
        if (leaked > tol) {
            break;
        }
        radius = m + 1;
    }
    return radius;
}

/// e^{i phi N} op e^{-i phi N}: entry (m,n) picks up e^{i phi (m-n)}.
inline FockOperator rotate(const FockOperator& op, double phi) {
    FockOperator out = op;
    for (std::size_t m = 0; m < op.dim(); ++m) {
        for (std::size_t n = 0; n < op.dim(); ++n) {
            const double angle = phi * (static_cast<double>(m) - static_cast<double>(n));
            out(m, n) = op(m, n) * std::polar(1.0, angle);
        }
    }
    return out;
}

/// C op C^{-1} for the wavefunction conjugation (C psi)(x) = conj(psi(x)).
inline FockOperator conjugation_map(const FockOperator& op) { return FockOperator(CMatrix(op.matrix().conjugate())); }

/// Fock amplitudes of psi_a(x) = (a/pi)^{1/4} exp(-a x^2 / 2).
struct SqueezedVacuum {
    double a = 1.0;
    RVector coeffs;

    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(coeffs.size()); }
    [[nodiscard]] CVector ket() const { return coeffs.cast<cplx>(); }
    [[nodiscard]] FockOperator state() const { return FockOperator::projector(ket()); }
    /// 1 - sum of squared amplitudes kept below the cutoff.
    [[nodiscard]] double truncation_deficit() const { return 1.0 - coeffs.squaredNorm(); }
};

/// Amplitudes from the two-term recursion
///   c_0 = sqrt(2 sqrt(a) / (1 + a)),  c_{2k+2} = c_{2k} t sqrt((2k+1)/(2k+2)),
/// with t = (1 - a)/(1 + a); odd amplitudes vanish. Validated in the tests
/// against Gauss-Hermite overlap integrals of psi_a with the Hermite functions.
inline SqueezedVacuum squeezed_vacuum(double a, std::size_t dim = kDefaultCutoff) {
    if (!(a > 0.0) || !std::isfinite(a)) {
        throw std::domain_error("squeezing parameter must be positive and finite, got " + std::to_string(a));
    }
    if (dim == 0) {
        throw std::invalid_argument("Fock cutoff must be positive");
    }
    SqueezedVacuum sv;
    sv.a = a;
    sv.coeffs = RVector::Zero(FockOperator::idx(dim));
    const double t = (1.0 - a) / (1.0 + a);
    double c = std::sqrt(2.0 * std::sqrt(a) / (1.0 + a));
    for (std::size_t k = 0; 2 * k < dim; ++k) {
        sv.coeffs(FockOperator::idx(2 * k)) = c;
        const double kk = static_cast<double>(k);
        c *= t * std::sqrt((2.0 * kk + 1.0) / (2.0 * kk + 2.0));
    }
    return sv;
}

/// W(q_z, p_z)|0> truncated to dim, with z = (q_z + i p_z)/sqrt(2).
inline CVector coherent_ket(cplx z, std::size_t dim) {
    CVector v(FockOperator::idx(dim));
    const double r = std::abs(z);
    for (std::size_t n = 0; n < dim; ++n) {
        if (r == 0.0) {
            v(FockOperator::idx(n)) = n == 0 ? 1.0 : 0.0;
            continue;
        }
        const double mag = std::exp(-0.5 * r * r + static_cast<double>(n) * std::log(r) -
                                    0.5 * detail::log_factorial(n));
        v(FockOperator::idx(n)) = mag * std::pow(z / r, static_cast<int>(n));
    }
    return v;
}

inline CVector number_ket(std::size_t n, std::size_t dim) {
    if (n >= dim) {
        throw std::domain_error("number state |" + std::to_string(n) + "> lies outside cutoff " + std::to_string(dim));
    }
    CVector v = CVector::Zero(FockOperator::idx(dim));
    v(FockOperator::idx(n)) = 1.0;
    return v;
}

struct HermitianEigen {
    RVector eigenvalues;   // descending
    CMatrix eigenvectors;  // columns match eigenvalues
};

inline HermitianEigen eig_hermitian(const FockOperator& op) {
    if (!op.is_hermitian()) {
        throw std::domain_error("eig_hermitian: operator is not Hermitian (max deviation " +
                                std::to_string(op.hermiticity_error()) + ")");
    }
    // Symmetrize so the solver sees an exactly Hermitian matrix.
    const CMatrix h = 0.5 * (op.matrix() + op.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eig_hermitian: eigensolver did not converge");
    }
    HermitianEigen out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

/// Throws std::domain_error unless op is Hermitian, positive semidefinite and
/// of unit trace (up to kStateTraceTol for truncation).
inline void require_state(const FockOperator& op, const std::string& what) {
    if (!op.is_hermitian()) {
        throw std::domain_error(what + " is not Hermitian");
    }
    const double tr = op.trace().real();
    if (std::abs(tr - 1.0) > kStateTraceTol) {
        throw std::domain_error(what + " does not have unit trace (trace " + std::to_string(tr) + ")");
    }
    const double smallest = eig_hermitian(op).eigenvalues.minCoeff();
    if (smallest < -kNegativityTol) {
        throw std::domain_error(what + " has a negative eigenvalue " + std::to_string(smallest));
    }
}

}  // namespace homodyne

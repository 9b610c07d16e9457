#include "homodyne/compensation.hpp"
#include "homodyne/smearing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace homodyne;

namespace {

FockOperator vacuum(std::size_t dim) { return FockOperator::projector(number_ket(0, dim)); }

FockOperator random_diagonal_state(std::mt19937_64& rng, std::size_t support, std::size_t dim) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> l(dim, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < support; ++k) {
        l[k] = u(rng);
        total += l[k];
    }
    for (double& v : l) {
        v /= total;
    }
    return FockOperator::diagonal(l);
}

cplx trace_with_weyl(const FockOperator& s, double q, double p) {
    return (s.matrix() * weyl_operator(q, p, s.dim()).matrix()).trace();
}

}  // namespace

TEST(OverallEfficiency, Examples) {
    EXPECT_DOUBLE_EQ(overall_efficiency(Efficiency(0.8), Efficiency(0.8)).value(), 0.8);
    EXPECT_NEAR(overall_efficiency(Efficiency(0.9), Efficiency(0.95)).value(), 2 * 0.9 * 0.95 / 1.85, 1e-15);
    EXPECT_NEAR(overall_efficiency(Efficiency(0.9), Efficiency(0.95)).value(), 0.924324, 1e-6);
    for (double e : {0.1, 0.37, 0.9}) {
        EXPECT_NEAR(overall_efficiency(Efficiency(e), Efficiency(1.0)).value(), 2 * e / (1 + e), 1e-15);
    }
}

TEST(OverallEfficiency, BetweenMinAndMax) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = 1.0 - u(rng), y = 1.0 - u(rng);
        const double v = overall_efficiency(Efficiency(x), Efficiency(y)).value();
        EXPECT_GE(v, std::min(x, y));
        EXPECT_LE(v, std::max(x, y));
    }
}

TEST(Efficiency, RejectsOutOfRange) {
    EXPECT_THROW(Efficiency(0.0), std::domain_error);
    EXPECT_THROW(Efficiency(1.0000001), std::domain_error);
    EXPECT_THROW(Efficiency(std::nan("")), std::domain_error);
    EXPECT_NO_THROW(Efficiency(1.0));
}

TEST(Smear, VariancesAndDegenerateAxis) {
    const auto s = GaussianSmear::from_efficiencies(Efficiency(0.5), Efficiency(1.0));
    EXPECT_DOUBLE_EQ(s.var_q(), 1.0);
    EXPECT_EQ(s.var_p(), 0.0);
    EXPECT_THROW((void)s.density(0.0, 0.0), std::domain_error);
    EXPECT_TRUE(GaussianSmear::from_efficiencies(Efficiency(1.0), Efficiency(1.0)).is_ideal());
}

TEST(Smear, DensityNormalized) {
    const auto s = GaussianSmear::from_efficiencies(Efficiency(0.4), Efficiency(0.7));
    // trapezoid on a wide box; the integrand is smooth and decays fast
    const double h = 0.02, L = 14.0;
    double total = 0.0;
    for (double q = -L; q <= L; q += h) {
        for (double p = -L; p <= L; p += h) {
            total += s.density(q, p);
        }
    }
    EXPECT_NEAR(total * h * h, 1.0, 1e-8);
    // prefactor as written in the efficiency parametrization
    const double e13 = 0.4, e24 = 0.7;
    const double norm = std::sqrt(e13 * e24 / ((1 - e13) * (1 - e24))) / (2 * std::numbers::pi);
    EXPECT_NEAR(s.density(0.0, 0.0), norm, 1e-14);
}

TEST(Characteristic, Examples) {
    const auto s = GaussianSmear::from_efficiencies(Efficiency(0.5), Efficiency(0.5));
    EXPECT_DOUBLE_EQ(characteristic(s, 0.0, 0.0), 1.0);
    EXPECT_NEAR(characteristic(s, 1.0, 1.0), std::exp(-1.0), 1e-15);
    EXPECT_DOUBLE_EQ(characteristic(GaussianSmear::ideal(), 2.0, -3.0), 1.0);
    // the q argument pairs with the p-axis variance
    const auto t = GaussianSmear::from_efficiencies(Efficiency(0.25), Efficiency(1.0));
    EXPECT_DOUBLE_EQ(characteristic(t, 5.0, 0.0), 1.0);
    EXPECT_NEAR(characteristic(t, 0.0, 1.0), std::exp(-1.5), 1e-15);
}

TEST(Characteristic, MatchesFourierIntegral) {
    // int e^{i(px - qy)} dmu(x,y) by direct 2D trapezoid
    const auto s = GaussianSmear::from_efficiencies(Efficiency(0.6), Efficiency(0.3));
    const double q = 0.7, p = -1.1;
    const double h = 0.02, L = 16.0;
    cplx total = 0.0;
    for (double x = -L; x <= L; x += h) {
        for (double y = -L; y <= L; y += h) {
            total += std::polar(s.density(x, y), p * x - q * y);
        }
    }
    total *= h * h;
    EXPECT_NEAR(total.real(), characteristic(s, q, p), 1e-8);
    EXPECT_NEAR(total.imag(), 0.0, 1e-8);
}

TEST(Compose, Examples) {
    const double x = 0.5, y = 0.9;
    const auto c = compose_measures(GaussianSmear::from_efficiencies(Efficiency(x), Efficiency(y)),
                                    GaussianSmear::from_efficiencies(Efficiency(y), Efficiency(x)));
    EXPECT_TRUE(c.is_isotropic(1e-15));
    EXPECT_NEAR(c.var_q(), (x - 2 * x * y + y) / (x * y), 1e-14);
    const GaussianSmear s(0.3, 0.8);
    EXPECT_EQ(compose_measures(GaussianSmear::ideal(), s).var_q(), 0.3);
    EXPECT_EQ(compose_measures(GaussianSmear::ideal(), s).var_p(), 0.8);
    EXPECT_DOUBLE_EQ(compose_measures(s, s).var_p(), 1.6);
}

TEST(GeometricState, Values) {
    const auto g = geometric_state(Efficiency(0.75), 5);
    EXPECT_DOUBLE_EQ(g[0], 0.75);
    EXPECT_DOUBLE_EQ(g[1], 0.1875);
    EXPECT_DOUBLE_EQ(g[2], 0.046875);
    EXPECT_NEAR(g.deficit(), std::pow(0.25, 5), 1e-15);
    EXPECT_THROW(DiagonalState({0.7, 0.4}), std::domain_error);
    EXPECT_THROW(DiagonalState({0.7, -0.1}), std::domain_error);
    const auto one = geometric_state(Efficiency(1.0), 4);
    EXPECT_EQ(one[0], 1.0);
    EXPECT_EQ(one[1], 0.0);
}

TEST(Convolve, IdealLeavesStateUnchanged) {
    const FockOperator s = squeezed_vacuum(2.0, 20).state();
    EXPECT_LE(max_abs_difference(convolve_state(GaussianSmear::ideal(), s), s), 0.0);
}

TEST(Convolve, RejectsNonState) {
    EXPECT_THROW(convolve_state(GaussianSmear(1.0, 1.0), FockOperator::diagonal({0.5, 0.2})), std::domain_error);
}

TEST(Convolve, VacuumGivesGeometricLaw) {
    for (double e : {0.3, 0.6, 0.9}) {
        const FockOperator out = convolve_state(GaussianSmear::isotropic(Efficiency(e)), vacuum(64));
        const auto g = geometric_state(Efficiency(e), 64);
        for (std::size_t m = 0; m < 30; ++m) {
            for (std::size_t n = 0; n < 30; ++n) {
                EXPECT_NEAR(std::abs(out(m, n) - (m == n ? g[m] : 0.0)), 0.0, 1e-8);
            }
        }
    }
}

TEST(Convolve, SqueezedGeneratorGivesGeometricLaw) {
    const Efficiency e13(0.5), e24(1.0);
    const double a = 1.0 + std::numbers::sqrt2;
    const FockOperator out = convolve_state(GaussianSmear::from_efficiencies(e13, e24), squeezed_vacuum(a, 64).state());
    EXPECT_TRUE(is_diagonal(out, 1e-8));
    const double eff = 2.0 / (eta(e13, e24) + 1.0);
    for (std::size_t n = 0; n <= 20; ++n) {
        EXPECT_NEAR(out(n, n).real() / (eff * std::pow(1 - eff, n)), 1.0, 1e-6) << n;
    }
}

TEST(Convolve, CharacteristicIdentity) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t dim = 64;
    const GaussianSmear smear = GaussianSmear::from_efficiencies(Efficiency(0.6), Efficiency(0.8));
    const FockOperator sigma = random_diagonal_state(rng, 6, dim);
    const FockOperator out = convolve_state(smear, sigma);
    int checked = 0;
    while (checked < 20) {
        const double q = 3.0 * u(rng), p = 3.0 * u(rng);
        if (q * q + p * p > 9.0) {
            continue;
        }
        const cplx lhs = trace_with_weyl(out, q, p);
        const cplx rhs = characteristic(smear, q, p) * trace_with_weyl(sigma, q, p);
        EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-8) << q << "," << p;
        ++checked;
    }
}

TEST(Convolve, TraceAndPositivity) {
    std::mt19937_64 rng(23);
    for (auto [x, y] : {std::pair{0.5, 0.9}, {0.7, 0.7}, {0.95, 0.6}}) {
        const FockOperator out =
            convolve_state(GaussianSmear::from_efficiencies(Efficiency(x), Efficiency(y)), random_diagonal_state(rng, 4, 64));
        EXPECT_NEAR(trace_deficit(out), 0.0, 1e-8);
        EXPECT_GE(eig_hermitian(out).eigenvalues.minCoeff(), -1e-9);
    }
}

TEST(Convolve, OrderIndependentToRoundoff) {
    // permuting the generator's basis labels is a relabelling of the quadrature
    // sum; diagonal input is handled without an eigensolve
    const FockOperator sigma = FockOperator::diagonal({0.5, 0.3, 0.2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                                                       0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    const GaussianSmear smear(0.7, 0.2);
    const FockOperator a = convolve_state(smear, sigma);
    const FockOperator b = convolve_state(smear, sigma, 45);
    EXPECT_LE(max_abs_difference(a, b), 1e-12);
}

TEST(IsDiagonal, EqualSmearAndCounterexample) {
    const std::size_t dim = 48;
    const FockOperator eq = convolve_state(GaussianSmear::isotropic(Efficiency(0.6)), vacuum(dim));
    EXPECT_TRUE(is_diagonal(eq, 1e-8));
    const FockOperator uneq = convolve_state(GaussianSmear::from_efficiencies(Efficiency(0.5), Efficiency(0.9)), vacuum(dim));
    EXPECT_FALSE(is_diagonal(uneq, 1e-8));
    const FockOperator mid = convolve_state(GaussianSmear::from_efficiencies(Efficiency(0.9), Efficiency(0.5)), vacuum(dim));
    const FockOperator back = convolve_state(GaussianSmear::from_efficiencies(Efficiency(0.5), Efficiency(0.9)), mid);
    EXPECT_TRUE(is_diagonal(back, 1e-8));
    EXPECT_THROW(is_diagonal(FockOperator::ket_bra(0, 1, 2)), std::domain_error);
}

TEST(IsDiagonal, RotationInvarianceOfWeylTrace) {
    // sigma diagonal iff tr[sigma W(q,p)] depends only on q^2 + p^2
    auto invariant = [](const FockOperator& s) {
        double worst = 0.0;
        for (int r = 1; r <= 10; ++r) {
            const double radius = 0.3 * r;
            const cplx ref = trace_with_weyl(s, radius, 0.0);
            for (int k = 1; k < 16; ++k) {
                const double phi = 2 * std::numbers::pi * k / 16;
                worst = std::max(worst, std::abs(trace_with_weyl(s, radius * std::cos(phi), radius * std::sin(phi)) - ref));
            }
        }
        return worst;
    };
    const std::size_t dim = 40;
    const FockOperator diag = convolve_state(GaussianSmear::isotropic(Efficiency(0.7)), vacuum(dim));
    const FockOperator off = convolve_state(GaussianSmear::from_efficiencies(Efficiency(0.6), Efficiency(0.9)), vacuum(dim));
    EXPECT_TRUE(is_diagonal(diag));
    EXPECT_LE(invariant(diag), 1e-8);
    EXPECT_FALSE(is_diagonal(off));
    EXPECT_GT(invariant(off), 1e-3);
}

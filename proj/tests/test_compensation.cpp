#include "homodyne/compensation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

using namespace homodyne;

namespace {

Efficiency E(double v) { return Efficiency(v); }

}  // namespace

TEST(BeamSplitter, Examples) {
    const auto b = beam_splitter_transparency(E(0.9), E(0.95), E(0.7));
    ASSERT_TRUE(b.ok());
    EXPECT_NEAR(*b.transparency, 0.9 * 0.7 / (2 * 0.9 * 0.95 - 0.95 * 0.7), 1e-15);
    EXPECT_NEAR(*b.transparency, 0.60287, 1e-5);
    EXPECT_NEAR(b.balanced_efficiency, 0.7, 1e-12);

    const auto same = beam_splitter_transparency(E(0.9), E(0.9), E(0.9));
    ASSERT_TRUE(same.ok());
    EXPECT_EQ(*same.transparency, 1.0);

    const auto third = beam_splitter_transparency(E(1.0), E(1.0), E(0.5));
    ASSERT_TRUE(third.ok());
    EXPECT_NEAR(*third.transparency, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(third.balanced_efficiency, 0.5, 1e-15);
}

TEST(BeamSplitter, RefusesWrongArm) {
    const auto b = beam_splitter_transparency(E(0.5), E(0.6), E(0.9));
    EXPECT_FALSE(b.ok());
    EXPECT_NE(b.reason.find("detector 2 or 4"), std::string::npos);
}

TEST(BeamSplitter, BalancingIdentity) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const Efficiency e1(0.01 + 0.99 * u(rng)), e3(0.01 + 0.99 * u(rng));
        const Efficiency e24(overall_efficiency(e1, e3).value() * (0.01 + 0.99 * u(rng)));
        const auto b = beam_splitter_transparency(e1, e3, e24);
        ASSERT_TRUE(b.ok()) << b.reason;
        EXPECT_GT(*b.transparency, 0.0);
        EXPECT_LE(*b.transparency, 1.0);
        EXPECT_NEAR(attenuated_overall_efficiency(*b.transparency, e1, e3), e24.value(), 1e-12);
    }
}

TEST(BeamSplitter, QuadPicksStrongerPair) {
    const DetectorQuad weak13{E(0.6), E(0.9), E(0.7), E(0.95)};
    const auto q = balance_quad(weak13);
    EXPECT_EQ(q.detector, 4);
    ASSERT_TRUE(q.balance.ok());
    EXPECT_NEAR(q.balance.balanced_efficiency, weak13.e13().value(), 1e-12);
    const auto r = compensate(weak13);
    EXPECT_EQ(r.bs_detector, 4);
    EXPECT_TRUE(r.eps_bs.has_value());
}

TEST(Squeezing, Examples) {
    EXPECT_NEAR(solve_squeezing(E(0.5), E(1.0)), 1 + std::numbers::sqrt2, 1e-14);
    EXPECT_NEAR(solve_squeezing(E(1.0), E(0.5)), std::numbers::sqrt2 - 1, 1e-14);
    for (double e : {0.1, 0.5, 1.0}) {
        EXPECT_DOUBLE_EQ(solve_squeezing(E(e), E(e)), 1.0);
    }
}

TEST(Squeezing, ResidualAndSwapInverse) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const Efficiency x(1.0 - u(rng)), y(1.0 - u(rng));
        const double a = solve_squeezing(x, y);
        EXPECT_GT(a, 0.0);
        // residual relative to the size of the terms being balanced
        const double scale = 1.0 + a + 1.0 / a + 1.0 / x.value() + 1.0 / y.value();
        EXPECT_LE(std::abs(squeezing_residual(x, y, a)), 1e-12 * scale);
        EXPECT_NEAR(a * solve_squeezing(y, x), 1.0, 1e-12);
    }
}

TEST(Eta, Examples) {
    for (double e : {0.2, 0.7}) {
        EXPECT_NEAR(eta(E(e), E(e)), 2 * (1 - e) / e + 1, 1e-14);
    }
    EXPECT_NEAR(eta(E(0.5), E(1.0)), 1 + std::numbers::sqrt2, 1e-14);
    EXPECT_DOUBLE_EQ(eta(E(1.0), E(1.0)), 1.0);
    EXPECT_DOUBLE_EQ(eta(E(0.3), E(0.8)), eta(E(0.8), E(0.3)));
}

TEST(EffectiveEfficiency, Examples) {
    EXPECT_NEAR(effective_efficiency(E(0.4), E(0.4)).value(), 0.4, 1e-15);
    EXPECT_NEAR(effective_efficiency(E(0.5), E(1.0)).value(), 2 / (2 + std::numbers::sqrt2), 1e-15);
    EXPECT_NEAR(effective_efficiency(E(0.5), E(1.0)).value(), 0.58579, 1e-5);
    EXPECT_DOUBLE_EQ(effective_efficiency(E(1.0), E(1.0)).value(), 1.0);
}

TEST(EffectiveEfficiency, SpectrumOfConvolvedSqueezedState) {
    const Efficiency e13(0.5), e24(1.0);
    const FockOperator out =
        convolve_state(GaussianSmear::from_efficiencies(e13, e24), squeezed_vacuum(solve_squeezing(e13, e24), 64).state());
    const RVector ev = eig_hermitian(out).eigenvalues;
    const double eff = effective_efficiency(e13, e24).value();
    for (int n = 0; n <= 20; ++n) {
        EXPECT_NEAR(ev(n) / (eff * std::pow(1 - eff, n)), 1.0, 1e-6) << n;
    }
}

TEST(EffectiveEfficiency, InequalityWithEqualityOnlyOnDiagonal) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double x = 1.0 - u(rng), y = 1.0 - u(rng);
        const double eff = effective_efficiency(E(x), E(y)).value();
        EXPECT_GT(eff, std::min(x, y));
        EXPECT_GT(gamma(E(x), E(y)), 1.0);
        const double e = 1.0 - u(rng);
        EXPECT_NEAR(effective_efficiency(E(e), E(e)).value(), e, 1e-14);
        EXPECT_NEAR(gamma(E(e), E(e)), 1.0, 1e-14);
    }
}

TEST(Gamma, ExamplesAndSymmetry) {
    EXPECT_NEAR(gamma(E(0.5), E(1.0)), 4 / (2 + std::numbers::sqrt2), 1e-14);
    EXPECT_NEAR(gamma(E(0.5), E(1.0)), 1.1716, 1e-4);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double x = 1.0 - u(rng), y = 1.0 - u(rng);
        EXPECT_NEAR(gamma(E(x), E(y)), gamma(E(y), E(x)), 1e-13);
    }
}

TEST(Series, ZeroDeltaAndSecondOrderError) {
    const auto s = series_approx(E(0.7), E(0.7));
    EXPECT_DOUBLE_EQ(s.a, 1.0);
    EXPECT_DOUBLE_EQ(s.eps_eff, 0.7);
    EXPECT_DOUBLE_EQ(s.gamma, 1.0);

    const Efficiency x(0.80), y(0.81);
    const double delta = 0.01;
    const auto t = series_approx(x, y);
    EXPECT_LE(std::abs(t.a - solve_squeezing(x, y)), 10 * delta * delta);
    EXPECT_LE(std::abs(t.eps_eff - effective_efficiency(x, y).value()), 10 * delta * delta);
    EXPECT_LE(std::abs(t.gamma - gamma(x, y)), 10 * delta * delta);

    double prev = 0.0;
    for (double d : {0.04, 0.02, 0.01, 0.005}) {
        const double err = std::abs(series_approx(E(0.8), E(0.8 + d)).a - solve_squeezing(E(0.8), E(0.8 + d)));
        if (prev > 0.0) {
            EXPECT_NEAR(prev / err, 4.0, 0.4);
        }
        prev = err;
    }
}

TEST(Sweep, DefaultGridMaximumAndTies) {
    const auto r = sweep(SweepGrid{});
    EXPECT_EQ(r.rows.size(), 10000u);
    EXPECT_NEAR(r.max_gamma, 1.17, 0.01);
    ASSERT_EQ(r.argmax.size(), 2u);
    for (const auto& row : r.argmax) {
        EXPECT_NEAR(std::min(row.e13, row.e24), 0.5, 1e-12);
        EXPECT_NEAR(std::max(row.e13, row.e24), 1.0, 1e-12);
    }
    for (const auto& row : r.rows) {
        EXPECT_GE(row.gamma, 1.0 - 1e-15);
    }
}

TEST(Sweep, ParametricIsMultivalued) {
    // gamma is symmetric while a inverts under the swap, so each gamma value
    // off the diagonal appears with at least two different a
    const auto r = sweep(SweepGrid{0.1, 1.0, 10});
    std::map<long long, std::vector<double>> by_gamma;
    for (const auto& row : r.rows) {
        by_gamma[std::llround(row.gamma * 1e9)].push_back(row.a);
    }
    int multivalued = 0;
    for (const auto& [g, as] : by_gamma) {
        const auto [lo, hi] = std::minmax_element(as.begin(), as.end());
        multivalued += *hi - *lo > 1e-6 ? 1 : 0;
    }
    EXPECT_GT(multivalued, 10);
}

TEST(Sweep, RejectsBadGrid) {
    EXPECT_THROW(sweep(SweepGrid{0.0, 1.0, 10}), std::domain_error);
    EXPECT_THROW(sweep(SweepGrid{0.1, 1.2, 10}), std::domain_error);
}

TEST(EndToEnd, SqueezingRestoresDiagonality) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double x = u(rng), y = u(rng);
        const GaussianSmear smear = GaussianSmear::from_efficiencies(E(x), E(y));
        const FockOperator sq = convolve_state(smear, squeezed_vacuum(solve_squeezing(E(x), E(y)), 48).state(), 31);
        EXPECT_TRUE(is_diagonal(sq, 1e-8)) << x << "," << y << " off " << max_off_diagonal(sq);
        if (std::abs(x - y) > 0.01) {
            const FockOperator vac = convolve_state(smear, FockOperator::projector(number_ket(0, 24)), 31);
            EXPECT_FALSE(is_diagonal(vac, 1e-8)) << x << "," << y;
        }
    }
}

TEST(Report, FieldsConsistent) {
    const auto r = compensate(E(0.5), E(1.0));
    EXPECT_NEAR(r.eps_eff, 2.0 / (r.eta + 1.0), 1e-15);
    EXPECT_NEAR(r.gamma, r.eps_eff / 0.5, 1e-14);
    EXPECT_FALSE(r.eps_bs.has_value());
    EXPECT_LE(std::abs(r.residual), 1e-15);
}

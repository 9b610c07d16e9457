#pragma once

// End-to-end acceptance checks. Each check pins its tolerance here and returns
// a single pass/fail line with the measured numbers; `homodyne verify` and the
// acceptance test binary both run this list.

#include "homodyne/compensation.hpp"
#include "homodyne/detector_sim.hpp"
#include "homodyne/fock.hpp"
#include "homodyne/phase.hpp"
#include "homodyne/smearing.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace homodyne::acceptance {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    /// eps_eff formula under test; swapped out by the mutation self-test.
    std::function<double(Efficiency, Efficiency)> eps_eff = [](Efficiency x, Efficiency y) {
        return effective_efficiency(x, y).value();
    };
    std::uint64_t seed = 20240917;
    std::size_t mc_events = 100000;
};

namespace detail {

inline std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CoherentScenario {
    PhaseDistribution ideal;
    PhaseDistribution squeeze;
    PhaseDistribution beam_splitter;
    double a = 0.0;
    double squeeze_off_diagonal = 0.0;
};

// Coherent z = 1 signal, (eps13, eps24) = (0.5, 1): ideal detectors with a
// vacuum generator, squeezed generator, and beam-splitter balancing to 0.5.
inline CoherentScenario coherent_scenario(std::size_t cutoff = 64) {
    const Efficiency e13(0.5), e24(1.0);
    const FockOperator rho = FockOperator::projector(coherent_ket({1.0, 0.0}, cutoff));
    CoherentScenario s;
    s.a = solve_squeezing(e13, e24);
    const FockOperator sq = convolve_state(GaussianSmear::from_efficiencies(e13, e24), squeezed_vacuum(s.a, cutoff).state());
    s.squeeze_off_diagonal = max_off_diagonal(sq);
    const Efficiency em(std::min(e13.value(), e24.value()));
    const FockOperator bs = convolve_state(GaussianSmear::isotropic(em), FockOperator::projector(number_ket(0, cutoff)));
    s.ideal = phase_distribution(rho, phase_matrix(DiagonalState::vacuum()));
    s.squeeze = phase_distribution(rho, phase_matrix(DiagonalState::from_operator(sq)));
    s.beam_splitter = phase_distribution(rho, phase_matrix(DiagonalState::from_operator(bs)));
    return s;
}

}  // namespace detail

inline CheckResult check_gamma_landscape(const Options&) {
    const auto t0 = std::chrono::steady_clock::now();
    const SweepResult r = sweep(SweepGrid{});
    const double elapsed = detail::seconds_since(t0);
    bool at_05_1 = false, at_1_05 = false;
    for (const auto& row : r.argmax) {
        at_05_1 |= std::abs(row.e13 - 0.5) < 1e-9 && std::abs(row.e24 - 1.0) < 1e-9;
        at_1_05 |= std::abs(row.e13 - 1.0) < 1e-9 && std::abs(row.e24 - 0.5) < 1e-9;
    }
    const bool ok = std::abs(r.max_gamma - 1.17) <= 0.01 && at_05_1 && at_1_05 && r.argmax.size() == 2 && elapsed < 10.0;
    return {1, "gamma-landscape", ok,
            detail::fmt("max gamma %.6f (target 1.17 +- 0.01), argmax count %zu, at (0.5,1): %d, at (1,0.5): %d, sweep %.3f s (< 10 s)",
                        r.max_gamma, r.argmax.size(), at_05_1, at_1_05, elapsed),
            elapsed};
}

inline CheckResult check_squeezing_solutions(const Options&) {
    const double a1 = solve_squeezing(Efficiency(0.5), Efficiency(1.0));
    const double a2 = solve_squeezing(Efficiency(1.0), Efficiency(0.5));
    const bool ok = std::abs(a1 - 2.414214) <= 1e-6 && std::abs(a2 - 0.414214) <= 1e-6 && std::abs(a1 * a2 - 1.0) <= 1e-12;
    return {2, "squeezing-solutions", ok,
            detail::fmt("a(0.5,1) = %.9f, a(1,0.5) = %.9f, product - 1 = %.2e", a1, a2, a1 * a2 - 1.0)};
}

inline CheckResult check_spectral_law(const Options& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const Efficiency e13(0.5), e24(1.0);
    const double a = solve_squeezing(e13, e24);
    const FockOperator state = convolve_state(GaussianSmear::from_efficiencies(e13, e24), squeezed_vacuum(a, 64).state());
    const RVector ev = eig_hermitian(state).eigenvalues;
    const double eps_eff = opt.eps_eff(e13, e24);
    double worst = 0.0;
    for (int n = 0; n <= 15; ++n) {
        const double expected = eps_eff * std::pow(1.0 - eps_eff, n);
        worst = std::max(worst, std::abs(ev(n) - expected) / expected);
    }
    // geometric spectrum: lambda_0 = eps_eff and lambda_{n+1}/lambda_n = 1 - eps_eff
    const double numeric_eff = ev(0);
    const double ratio_eff = 1.0 - ev(1) / ev(0);
    const double quoted = 0.828;
    const bool ok = worst <= 1e-5;
    return {3, "spectral-law", ok,
            detail::fmt("max rel err %.2e for n<=15 (tol 1e-5) against eps_eff = %.9f; spectrum gives eps_eff = %.9f "
                        "(lambda_0) / %.9f (ratio). Quoted 0.828 resolved: not reproduced (|0.828 - numeric| = %.3f); "
                        "2/(eta+1) = %.9f is, and 0.828 matches 2/eta = %.6f",
                        worst, eps_eff, numeric_eff, ratio_eff, std::abs(quoted - numeric_eff),
                        2.0 / (eta(e13, e24) + 1.0), 2.0 / eta(e13, e24)),
            detail::seconds_since(t0)};
}

inline CheckResult check_geometric_law(const Options&) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (double e : {0.3, 0.6, 0.9}) {
        const FockOperator out = convolve_state(GaussianSmear::isotropic(Efficiency(e)), FockOperator::projector(number_ket(0, 64)));
        for (std::size_t n = 0; n <= 20; ++n) {
            worst = std::max(worst, std::abs(out(n, n).real() - e * std::pow(1.0 - e, static_cast<double>(n))));
            for (std::size_t m = 0; m <= 20; ++m) {
                if (m != n) {
                    worst = std::max(worst, std::abs(out(m, n)));
                }
            }
        }
    }
    return {4, "geometric-law", worst <= 1e-8, detail::fmt("max entry error %.2e (tol 1e-8), eps in {0.3,0.6,0.9}, n<=20", worst),
            detail::seconds_since(t0)};
}

inline CheckResult check_diagonal_iff_equal(const Options& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const double grid[5] = {0.2, 0.4, 0.6, 0.8, 1.0};
    constexpr std::size_t kDim = 48;
    const FockOperator vac = FockOperator::projector(number_ket(0, kDim));
    int mismatches = 0;
    for (double x : grid) {
        for (double y : grid) {
            const FockOperator out = convolve_state(GaussianSmear::from_efficiencies(Efficiency(x), Efficiency(y)), vac);
            if (is_diagonal(out, 1e-8) != (x == y)) {
                ++mismatches;
            }
        }
    }
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    int counter_fail = 0;
    double worst_final = 0.0, weakest_intermediate = 1.0;
    for (int i = 0; i < 10; ++i) {
        double x = u(rng), y = u(rng);
        while (std::abs(x - y) < 0.05) {
            y = u(rng);
        }
        const FockOperator mid = convolve_state(GaussianSmear::from_efficiencies(Efficiency(y), Efficiency(x)), vac);
        const FockOperator out = convolve_state(GaussianSmear::from_efficiencies(Efficiency(x), Efficiency(y)), mid);
        weakest_intermediate = std::min(weakest_intermediate, max_off_diagonal(mid));
        worst_final = std::max(worst_final, max_off_diagonal(out));
        if (!is_diagonal(out, 1e-8) || is_diagonal(mid, 1e-8)) {
            ++counter_fail;
        }
    }
    const bool ok = mismatches == 0 && counter_fail == 0;
    return {5, "diagonal-iff-equal", ok,
            detail::fmt("5x5 grid mismatches %d; counterexample failures %d/10 (final max off-diagonal %.2e, "
                        "intermediate min off-diagonal %.2e)",
                        mismatches, counter_fail, worst_final, weakest_intermediate),
            detail::seconds_since(t0)};
}

inline CheckResult check_inequality(const Options& opt) {
    std::mt19937_64 rng(opt.seed + 6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0;
    double tightest = 1.0;
    for (int i = 0; i < 10000; ++i) {
        const double x = 1.0 - u(rng);  // (0, 1]
        const double y = i % 100 == 0 ? x : 1.0 - u(rng);
        const double eff = opt.eps_eff(Efficiency(x), Efficiency(y));
        const double em = std::min(x, y);
        if (std::abs(x - y) < 1e-12) {
            if (std::abs(eff - em) > 1e-12) {
                ++violations;
            }
        } else {
            if (!(eff > em)) {
                ++violations;
            }
            tightest = std::min(tightest, eff - em);
        }
    }
    return {6, "eps-eff-inequality", violations == 0,
            detail::fmt("violations %d of 10000 (100 equal pairs), smallest strict gap %.3e", violations, tightest)};
}

inline CheckResult check_min_variances(const Options&) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = detail::coherent_scenario();
    const double vid = min_variance(s.ideal).value;
    const double vsq = min_variance(s.squeeze).value;
    const double vbs = min_variance(s.beam_splitter).value;
    const bool id_ok = std::abs(vid - 0.76) <= 0.03;
    const bool sq_ok = std::abs(vsq - 0.89) <= 0.03;
    const bool bs_ok = std::abs(vbs - 1.24) <= 0.03;
    const bool order_ok = vid < vsq && vsq < vbs;
    // what the quoted squeezing value corresponds to
    const FockOperator rho = FockOperator::projector(coherent_ket({1.0, 0.0}, 64));
    const double v828 = min_variance(phase_distribution(rho, phase_matrix(geometric_state(Efficiency(0.828))))).value;
    return {7, "min-variances", id_ok && sq_ok && bs_ok && order_ok,
            detail::fmt("ideal %.4f (0.76+-0.03: %s), squeezing %.4f (0.89+-0.03: %s), beam splitter %.4f "
                        "(1.24+-0.03: %s), strict order %s. The squeezed generator is geometric with eps_eff = %.6f; "
                        "0.89 is only reproduced with eps_eff = 0.828 (gives %.4f)",
                        vid, id_ok ? "ok" : "FAIL", vsq, sq_ok ? "ok" : "FAIL", vbs, bs_ok ? "ok" : "FAIL",
                        order_ok ? "ok" : "FAIL", 2.0 / (eta(Efficiency(0.5), Efficiency(1.0)) + 1.0), v828),
            detail::seconds_since(t0)};
}

inline CheckResult check_smearing_ratio(const Options&) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = smearing_ratio(DiagonalState::vacuum(), Efficiency(0.8), 1, 20);
    double lo = 1e300, hi = -1e300;
    bool flagged = false;
    for (std::size_t m = 0; m < r.ratios.size(); ++m) {
        flagged |= r.flagged[m];
        lo = std::min(lo, r.ratios[m]);
        hi = std::max(hi, r.ratios[m]);
    }
    // trend: distance to 1 shrinks from the start to the end of the window and
    // its least-squares slope over m is negative
    const std::size_t count = r.ratios.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t m = 0; m < count; ++m) {
        const double x = static_cast<double>(m);
        const double y = std::abs(1.0 - r.ratios[m]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double nn = static_cast<double>(count);
    const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    const double first = std::abs(1.0 - r.ratios.front());
    const double last = std::abs(1.0 - r.ratios.back());
    const bool ok = !flagged && hi - lo > 1e-3 && last < first && slope < 0.0;
    return {8, "smearing-ratio-signature", ok,
            detail::fmt("r_0 = %.6f, r_20 = %.6f, spread %.3e (> 1e-3), |1-r| slope %.3e", r.ratios.front(),
                        r.ratios.back(), hi - lo, slope),
            detail::seconds_since(t0)};
}

inline CheckResult check_beam_splitter(const Options& opt) {
    std::mt19937_64 rng(opt.seed + 9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int refused = 0;
    for (int i = 0; i < 1000; ++i) {
        const Efficiency e1(0.01 + 0.99 * u(rng)), e3(0.01 + 0.99 * u(rng));
        const double e13 = overall_efficiency(e1, e3).value();
        const Efficiency e24(e13 * (0.01 + 0.99 * u(rng)));
        const auto bal = beam_splitter_transparency(e1, e3, e24);
        if (!bal.ok()) {
            ++refused;
            continue;
        }
        worst = std::max(worst, std::abs(attenuated_overall_efficiency(*bal.transparency, e1, e3) - e24.value()));
    }
    return {9, "beam-splitter-balancing", refused == 0 && worst <= 1e-12,
            detail::fmt("max |eps'_13 - eps24| = %.2e over 1000 draws (tol 1e-12), refusals %d", worst, refused)};
}

inline CheckResult check_monte_carlo(const Options& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const Efficiency e13(0.5), e24(1.0);
    const auto s = detail::coherent_scenario();
    const PhaseSpaceDensity density({CoherentSignal{{1.0, 0.0}}}, {SqueezedGenerator{s.a}},
                                    GaussianSmear::from_efficiencies(e13, e24));
    const EventBatch batch = sample_events(density, opt.mc_events, opt.seed);
    const EventBatch again = sample_events(density, opt.mc_events, opt.seed);
    const bool identical = batch.events == again.events;
    const PhaseHistogram h = bin_phases(batch, 64);
    const ChiSquare chi = chi_square_test(h.counts, bin_probabilities(s.squeeze, 64));
    const double empirical = histogram_min_variance(h).value;
    const double analytic = min_variance(s.squeeze).value;
    const bool ok = chi.p_value > 0.01 && std::abs(empirical - analytic) <= 0.05 && identical;
    return {10, "monte-carlo", ok,
            detail::fmt("%zu events, chi2 %.2f on %zu dof, p = %.4f (> 0.01); Var_min empirical %.4f vs analytic %.4f "
                        "(+-0.05); rerun identical: %s",
                        batch.count, chi.statistic, chi.dof, chi.p_value, empirical, analytic, identical ? "yes" : "no"),
            detail::seconds_since(t0)};
}

inline CheckResult check_series(const Options& opt) {
    const double em = 0.8;
    const double deltas[3] = {0.02, 0.01, 0.005};
    double err[3][3];
    for (int i = 0; i < 3; ++i) {
        const Efficiency x(em + deltas[i]), y(em);
        const SeriesApprox s = series_approx(x, y);
        const double eff = opt.eps_eff(x, y);
        err[i][0] = std::abs(solve_squeezing(x, y) - s.a);
        err[i][1] = std::abs(eff - s.eps_eff);
        err[i][2] = std::abs(eff / std::min(x.value(), y.value()) - s.gamma);
    }
    bool ok = true;
    std::string orders;
    const char* names[3] = {"a", "eps_eff", "gamma"};
    for (int q = 0; q < 3; ++q) {
        orders += names[q];
        for (int i = 0; i < 2; ++i) {
            const double order = std::log2(err[i][q] / err[i + 1][q]);
            ok &= order >= 1.8 && order <= 2.2;
            orders += detail::fmt(" %.3f", order);
        }
        orders += q < 2 ? "; " : "";
    }
    return {11, "series-expansions", ok, "observed orders (target [1.8, 2.2]): " + orders};
}

inline std::vector<CheckResult> run_all(const Options& opt = {}) {
    using Fn = CheckResult (*)(const Options&);
    const Fn checks[] = {check_gamma_landscape, check_squeezing_solutions, check_spectral_law, check_geometric_law,
                         check_diagonal_iff_equal, check_inequality,          check_min_variances, check_smearing_ratio,
                         check_beam_splitter,   check_monte_carlo,         check_series};
    std::vector<CheckResult> out;
    for (Fn f : checks) {
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r = f(opt);
        r.seconds = detail::seconds_since(t0);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace homodyne::acceptance

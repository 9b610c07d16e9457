#pragma once

// Two ways to restore rotation invariance when the homodyne pairs have
// unequal overall efficiencies eps13 != eps24:
//   - attenuate the stronger pair with an extra beam splitter (passive), which
//     leaves a CPO with efficiency min(eps13, eps24);
//   - keep the detectors and squeeze the vacuum parameter field so that the
//     convolved generator is again geometric, with effective efficiency
//     eps_eff = 2/(eta + 1) >= min(eps13, eps24).

#include "homodyne/smearing.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace homodyne {

struct DetectorQuad {
    Efficiency e1;
    Efficiency e2;
    Efficiency e3;
    Efficiency e4;

    [[nodiscard]] Efficiency e13() const { return overall_efficiency(e1, e3); }
    [[nodiscard]] Efficiency e24() const { return overall_efficiency(e2, e4); }
};

/// Outcome of a beam-splitter balancing request. On refusal `transparency`
/// is empty and `reason` names the arm that has to be attenuated instead.
struct BeamSplitterBalance {
    std::optional<double> transparency;
    double balanced_efficiency = 0.0;  // eps'_13 after insertion
    std::string reason;

    [[nodiscard]] bool ok() const { return transparency.has_value(); }
};

/// eps'_13 = 2 t e1 e3 / (e1 + t e3) for a splitter of transparency t before D3.
inline double attenuated_overall_efficiency(double t, Efficiency e1, Efficiency e3) {
    return 2.0 * t * e1.value() * e3.value() / (e1.value() + t * e3.value());
}

/// Transparency t = e1 e24 / (2 e1 e3 - e3 e24) placed before D3 so that the
/// 1-3 pair drops to e24. Requires e24 <= eps13.
inline BeamSplitterBalance beam_splitter_transparency(Efficiency e1, Efficiency e3, Efficiency e24) {
    BeamSplitterBalance out;
    const double e13 = overall_efficiency(e1, e3).value();
    if (e24.value() > e13) {
        out.reason = "pair 1-3 (eps13 = " + std::to_string(e13) + ") is already the weaker pair (eps24 = " +
                     std::to_string(e24.value()) + "); attenuate detector 2 or 4 instead";
        return out;
    }
    if (e24.value() == e13) {
        out.transparency = 1.0;
        out.balanced_efficiency = e13;
        return out;
    }
    const double den = 2.0 * e1.value() * e3.value() - e3.value() * e24.value();
    if (!(den > 0.0)) {
        out.reason = "degenerate balancing denominator; attenuate detector 2 or 4 instead";
        return out;
    }
    const double t = e1.value() * e24.value() / den;
    if (!(t > 0.0 && t <= 1.0)) {
        out.reason = "required transparency " + std::to_string(t) + " is not in (0, 1]; attenuate detector 2 or 4";
        return out;
    }
    out.transparency = t;
    out.balanced_efficiency = attenuated_overall_efficiency(t, e1, e3);
    return out;
}

struct QuadBalance {
    BeamSplitterBalance balance;
    int detector = 0;  // 3 or 4; 0 when no attenuation is needed
};

/// Balance a full detector quad by attenuating D3 or D4, whichever belongs to
/// the stronger pair.
inline QuadBalance balance_quad(const DetectorQuad& quad) {
    const double e13 = quad.e13().value();
    const double e24 = quad.e24().value();
    if (e13 == e24) {
        return {{1.0, e13, {}}, 0};
    }
    if (e13 > e24) {
        return {beam_splitter_transparency(quad.e1, quad.e3, quad.e24()), 3};
    }
    return {beam_splitter_transparency(quad.e2, quad.e4, quad.e13()), 4};
}

namespace detail {

// (eps24 - eps13) / (eps13 eps24)
inline double squeeze_asymmetry(Efficiency e13, Efficiency e24) {
    return (e24.value() - e13.value()) / (e13.value() * e24.value());
}

}  // namespace detail

/// Positive root of (1 - e24)/(2 e24) + a/4 = (1 - e13)/(2 e13) + 1/(4a),
/// a = d + sqrt(1 + d^2) with d = (e24 - e13)/(e13 e24). Written so the
/// d < 0 branch does not cancel.
inline double solve_squeezing(Efficiency e13, Efficiency e24) {
    const double d = detail::squeeze_asymmetry(e13, e24);
    const double root = std::hypot(1.0, d);
    return d >= 0.0 ? d + root : 1.0 / (root - d);
}

/// Residual of the balancing condition at a.
inline double squeezing_residual(Efficiency e13, Efficiency e24, double a) {
    const double lhs = (1.0 - e24.value()) / (2.0 * e24.value()) + a / 4.0;
    const double rhs = (1.0 - e13.value()) / (2.0 * e13.value()) + 1.0 / (4.0 * a);
    return lhs - rhs;
}

/// eta = (e13 - 2 e13 e24 + e24)/(e13 e24) + sqrt(1 + d^2).
inline double eta(Efficiency e13, Efficiency e24) {
    const double x = e13.value();
    const double y = e24.value();
    return (x - 2.0 * x * y + y) / (x * y) + std::hypot(1.0, detail::squeeze_asymmetry(e13, e24));
}

/// 2/(eta + 1): the convolved squeezed generator is eps_eff sum (1-eps_eff)^n |n><n|.
inline Efficiency effective_efficiency(Efficiency e13, Efficiency e24) {
    const double v = 2.0 / (eta(e13, e24) + 1.0);
    return Efficiency(std::min(v, 1.0));
}

/// eps_eff / min(e13, e24) >= 1.
inline double gamma(Efficiency e13, Efficiency e24) {
    return 2.0 / ((1.0 + eta(e13, e24)) * std::min(e13.value(), e24.value()));
}

struct SeriesApprox {
    double a = 1.0;
    double eps_eff = 0.0;
    double gamma = 1.0;
};

/// First-order expansions in delta = e13 - e24 about eps_m = min(e13, e24):
///   a ~ 1 - delta/eps_m^2, eps_eff ~ eps_m + |delta|/2, gamma ~ 1 + |delta|/(2 eps_m).
inline SeriesApprox series_approx(Efficiency e13, Efficiency e24) {
    const double delta = e13.value() - e24.value();
    const double em = std::min(e13.value(), e24.value());
    return {1.0 - delta / (em * em), em + 0.5 * std::abs(delta), 1.0 + std::abs(delta) / (2.0 * em)};
}

struct CompensationReport {
    double e13 = 1.0;
    double e24 = 1.0;
    std::optional<double> eps_bs;
    int bs_detector = 0;
    std::string bs_note;
    double a = 1.0;
    double eta = 1.0;
    double eps_eff = 1.0;
    double gamma = 1.0;
    double residual = 0.0;
};

inline CompensationReport compensate(Efficiency e13, Efficiency e24) {
    CompensationReport r;
    r.e13 = e13.value();
    r.e24 = e24.value();
    r.a = solve_squeezing(e13, e24);
    r.eta = homodyne::eta(e13, e24);
    r.eps_eff = effective_efficiency(e13, e24).value();
    r.gamma = homodyne::gamma(e13, e24);
    r.residual = squeezing_residual(e13, e24, r.a);
    r.bs_note = "individual detector efficiencies not given";
    return r;
}

inline CompensationReport compensate(const DetectorQuad& quad) {
    CompensationReport r = compensate(quad.e13(), quad.e24());
    const QuadBalance qb = balance_quad(quad);
    r.eps_bs = qb.balance.transparency;
    r.bs_detector = qb.detector;
    r.bs_note = qb.balance.ok() ? std::string() : qb.balance.reason;
    return r;
}

struct SweepRow {
    double e13 = 0.0;
    double e24 = 0.0;
    double a = 0.0;
    double eps_eff = 0.0;
    double gamma = 0.0;
};

struct SweepGrid {
    double lo = 0.01;
    double hi = 1.0;
    std::size_t points = 100;  // per axis; 100 points at 0.01 spacing hits 0.50 exactly

    [[nodiscard]] double value(std::size_t i) const {
        if (points == 1) {
            return hi;
        }
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
};

struct SweepResult {
    std::vector<SweepRow> rows;  // row-major in (e13 index, e24 index)
    double max_gamma = 0.0;
    std::vector<SweepRow> argmax;  // every row within tie tolerance of the max
};

inline SweepResult sweep(const SweepGrid& grid, double tie_tol = 1e-12) {
    if (grid.points == 0 || !(grid.lo > 0.0) || !(grid.hi <= 1.0) || grid.lo > grid.hi) {
        throw std::domain_error("sweep grid must lie inside (0, 1] with at least one point");
    }
    SweepResult out;
    out.rows.reserve(grid.points * grid.points);
    for (std::size_t i = 0; i < grid.points; ++i) {
        for (std::size_t j = 0; j < grid.points; ++j) {
            const Efficiency x(grid.value(i));
            const Efficiency y(grid.value(j));
            SweepRow row{x.value(), y.value(), solve_squeezing(x, y), effective_efficiency(x, y).value(), gamma(x, y)};
            out.max_gamma = std::max(out.max_gamma, row.gamma);
            out.rows.push_back(row);
        }
    }
    for (const auto& row : out.rows) {
        if (row.gamma >= out.max_gamma * (1.0 - tie_tol)) {
            out.argmax.push_back(row);
        }
    }
    return out;
}

}  // namespace homodyne

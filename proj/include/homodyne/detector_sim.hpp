#pragma once

// Monte Carlo of the high-amplitude eight-port measurement: each event is a
// point (q,p) drawn from the smeared phase-space density
//
//   g(q,p) = (1/2pi) tr[rho W(q,p) (mu * sigma) W(q,p)^*],
//
// and the recorded phase is its polar angle.
//
// Random numbers: std::mt19937_64 (bit-exact by the standard), one engine per
// chunk of kChunkEvents events, seeded with splitmix64(seed + (chunk + 1) *
// 0x9E3779B97F4A7C15). Uniforms take the top 53 bits; normals come from
// Box-Muller pairs. Chunks are reassembled in index order, so the batch does
// not depend on the thread count.

#include "homodyne/fock.hpp"
#include "homodyne/phase.hpp"
#include "homodyne/smearing.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

namespace homodyne {

// ---------------------------------------------------------------------------
// Scenario description

struct CoherentSignal {
    cplx z;  // z = (q_z + i p_z)/sqrt(2)
};
struct NumberSignal {
    std::size_t n = 0;
};
struct OperatorSignal {
    FockOperator rho;
};
using Signal = std::variant<CoherentSignal, NumberSignal, OperatorSignal>;

struct VacuumGenerator {};
struct SqueezedGenerator {
    double a = 1.0;
};
struct GeometricGenerator {
    double eps = 1.0;
};
struct OperatorGenerator {
    FockOperator sigma;
};
using Generator = std::variant<VacuumGenerator, SqueezedGenerator, GeometricGenerator, OperatorGenerator>;

inline FockOperator signal_operator(const Signal& s, std::size_t dim) {
    return std::visit(
        [dim](const auto& v) -> FockOperator {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, CoherentSignal>) {
                return FockOperator::projector(coherent_ket(v.z, dim));
            } else if constexpr (std::is_same_v<T, NumberSignal>) {
                return FockOperator::projector(number_ket(v.n, dim));
            } else {
                return v.rho.resized(dim);
            }
        },
        s);
}

inline FockOperator generator_operator(const Generator& g, std::size_t dim) {
    return std::visit(
        [dim](const auto& v) -> FockOperator {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, VacuumGenerator>) {
                return FockOperator::projector(number_ket(0, dim));
            } else if constexpr (std::is_same_v<T, SqueezedGenerator>) {
                return squeezed_vacuum(v.a, dim).state();
            } else if constexpr (std::is_same_v<T, GeometricGenerator>) {
                return geometric_state(Efficiency(v.eps), dim).to_operator(dim);
            } else {
                return v.sigma.resized(dim);
            }
        },
        g);
}

/// Quadrature covariance of a Gaussian generator (vacuum variance is 1/2).
inline std::optional<std::array<double, 2>> generator_variances(const Generator& g) {
    if (std::holds_alternative<VacuumGenerator>(g)) {
        return std::array<double, 2>{0.5, 0.5};
    }
    if (const auto* s = std::get_if<SqueezedGenerator>(&g)) {
        return std::array<double, 2>{1.0 / (2.0 * s->a), s->a / 2.0};
    }
    if (const auto* s = std::get_if<GeometricGenerator>(&g)) {
        const double v = (2.0 - s->eps) / (2.0 * s->eps);
        return std::array<double, 2>{v, v};
    }
    return std::nullopt;
}

struct Gaussian2D {
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 3> cov{1.0, 0.0, 1.0};  // (qq, qp, pp)

    [[nodiscard]] double det() const { return cov[0] * cov[2] - cov[1] * cov[1]; }
    [[nodiscard]] double operator()(double q, double p) const {
        const double dq = q - mean[0];
        const double dp = p - mean[1];
        const double dt = det();
        const double quad = (cov[2] * dq * dq - 2.0 * cov[1] * dq * dp + cov[0] * dp * dp) / dt;
        return std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(dt));
    }
};

namespace detail {

// First and second moments of (Q, P) for a truncated state.
inline Gaussian2D state_moments(const FockOperator& rho) {
    const auto d = FockOperator::idx(rho.dim());
    CMatrix a = CMatrix::Zero(d, d);
    for (Eigen::Index n = 1; n < d; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    const CMatrix q = (a + a.adjoint()) / std::numbers::sqrt2;
    const CMatrix p = (a - a.adjoint()) / cplx(0.0, std::numbers::sqrt2);
    const CMatrix& r = rho.matrix();
    auto expect = [&](const CMatrix& op) { return (r * op).trace().real(); };
    Gaussian2D g;
    g.mean = {expect(q), expect(p)};
    g.cov[0] = expect(q * q) - g.mean[0] * g.mean[0];
    g.cov[2] = expect(p * p) - g.mean[1] * g.mean[1];
    g.cov[1] = 0.5 * expect(q * p + p * q) - g.mean[0] * g.mean[1];
    return g;
}

}  // namespace detail

/// g(q,p) for a signal, a generator and a smearing measure.
///
/// Coherent signals with Gaussian generators have a closed-form Gaussian
/// density (mean (q_z, p_z), covariance 1/2 + generator + smear variances);
/// everything else is evaluated on the Fock cutoff from the convolved
/// generator.
class PhaseSpaceDensity {
public:
    PhaseSpaceDensity(const Signal& signal, const Generator& generator, const GaussianSmear& smear,
                      std::size_t cutoff = kDefaultCutoff)
        : cutoff_(cutoff) {
        const auto gen_var = generator_variances(generator);
        if (const auto* c = std::get_if<CoherentSignal>(&signal); c && gen_var) {
            Gaussian2D g;
            g.mean = {std::numbers::sqrt2 * c->z.real(), std::numbers::sqrt2 * c->z.imag()};
            g.cov = {0.5 + (*gen_var)[0] + smear.var_q(), 0.0, 0.5 + (*gen_var)[1] + smear.var_p()};
            gaussian_ = g;
            moments_ = g;
            return;
        }
        const FockOperator rho = signal_operator(signal, cutoff);
        require_state(rho, "phase-space density: signal");
        smeared_generator_ = convolve_state(smear, generator_operator(generator, cutoff));
        const auto eig = eig_hermitian(rho);
        for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
            if (eig.eigenvalues(k) > 1e-14) {
                weights_.push_back(eig.eigenvalues(k));
                kets_.push_back(eig.eigenvectors.col(k));
            }
        }
        const Gaussian2D sm = detail::state_moments(rho);
        const Gaussian2D gm = detail::state_moments(*smeared_generator_);
        moments_.mean = {sm.mean[0] - gm.mean[0], sm.mean[1] - gm.mean[1]};
        moments_.cov = {sm.cov[0] + gm.cov[0], sm.cov[1] + gm.cov[1], sm.cov[2] + gm.cov[2]};
    }

    [[nodiscard]] bool is_gaussian() const { return gaussian_.has_value(); }
    [[nodiscard]] const std::optional<Gaussian2D>& gaussian() const { return gaussian_; }
    /// Exact mean and covariance of the density (Gaussian or not).
    [[nodiscard]] const Gaussian2D& moments() const { return moments_; }
    [[nodiscard]] std::size_t cutoff() const { return cutoff_; }

    [[nodiscard]] double operator()(double q, double p) const {
        if (gaussian_) {
            return (*gaussian_)(q, p);
        }
        const CMatrix w = weyl_operator(q, p, cutoff_).matrix();
        double total = 0.0;
        for (std::size_t k = 0; k < kets_.size(); ++k) {
            const CVector u = w.adjoint() * kets_[k];
            total += weights_[k] * (u.adjoint() * smeared_generator_->matrix() * u)(0, 0).real();
        }
        return std::max(total, 0.0) / (2.0 * std::numbers::pi);
    }

    /// int_0^inf r g(r cos a, r sin a) dr.
    [[nodiscard]] double angular_density(double alpha) const {
        const double c = std::cos(alpha);
        const double s = std::sin(alpha);
        if (gaussian_) {
            const auto& g = *gaussian_;
            const double dt = g.det();
            // inverse covariance
            const double iqq = g.cov[2] / dt, iqp = -g.cov[1] / dt, ipp = g.cov[0] / dt;
            const double A = iqq * c * c + 2.0 * iqp * c * s + ipp * s * s;
            const double B = (iqq * c + iqp * s) * g.mean[0] + (iqp * c + ipp * s) * g.mean[1];
            const double C = iqq * g.mean[0] * g.mean[0] + 2.0 * iqp * g.mean[0] * g.mean[1] +
                             ipp * g.mean[1] * g.mean[1];
            const double r0 = B / A;
            // int_0^inf r exp(-(A r^2 - 2 B r + C)/2) dr
            const double tail = std::exp(-0.5 * C) / A;
            const double bulk = std::exp(-0.5 * C + 0.5 * B * r0) * r0 * std::sqrt(std::numbers::pi / (2.0 * A)) *
                                (1.0 + std::erf(r0 * std::sqrt(A / 2.0)));
            return (tail + bulk) / (2.0 * std::numbers::pi * std::sqrt(dt));
        }
        const double reach = trust_radius();
        auto f = [&](double r) { return r * (*this)(r * c, r * s); };
        return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, reach, 6, 1e-10);
    }

    /// Radius containing all but a negligible tail of the density.
    [[nodiscard]] double trust_radius() const {
        const double spread = std::sqrt(std::max(moments_.cov[0], moments_.cov[2]));
        return std::hypot(moments_.mean[0], moments_.mean[1]) + 9.0 * spread;
    }

private:
    std::size_t cutoff_;
    std::optional<Gaussian2D> gaussian_;
    Gaussian2D moments_;
    std::optional<FockOperator> smeared_generator_;
    std::vector<double> weights_;
    std::vector<CVector> kets_;
};

inline PhaseSpaceDensity phase_space_density(const Signal& signal, const Generator& generator,
                                             const GaussianSmear& smear, std::size_t cutoff = kDefaultCutoff) {
    return {signal, generator, smear, cutoff};
}

/// Phase distribution as the angular margin of the density, sampled on a grid.
inline PhaseDistribution angle_margin(const PhaseSpaceDensity& density, std::size_t grid_points = kDefaultPhaseGrid) {
    PhaseDistribution dist;
    dist.grid = uniform_angle_grid(grid_points);
    dist.density.resize(grid_points);
    for (std::size_t j = 0; j < grid_points; ++j) {
        dist.density[j] = density.angular_density(dist.grid[j]);
    }
    return dist;
}

// ---------------------------------------------------------------------------
// Sampling

inline constexpr std::size_t kChunkEvents = 4096;
inline constexpr std::size_t kMaxProposalsPerSample = 100;

struct Event {
    double q = 0.0;
    double p = 0.0;
    friend bool operator==(const Event&, const Event&) = default;
};

struct EventBatch {
    std::vector<Event> events;
    std::uint64_t seed = 0;
    std::size_t count = 0;
    double acceptance_rate = 1.0;  // 1 for exact Gaussian sampling
    std::size_t envelope_widenings = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t chunk_seed(std::uint64_t seed, std::size_t chunk) {
    return splitmix64(seed + (static_cast<std::uint64_t>(chunk) + 1) * 0x9E3779B97F4A7C15ULL);
}

class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct Envelope {
    Gaussian2D gauss;
    std::array<double, 3> chol{1.0, 0.0, 1.0};  // lower-triangular (l11, l21, l22)
    double bound = 1.0;                         // sup target / envelope (with margin)

    void factorize() {
        const double l11 = std::sqrt(gauss.cov[0]);
        const double l21 = gauss.cov[1] / l11;
        const double l22 = std::sqrt(std::max(gauss.cov[2] - l21 * l21, 1e-300));
        chol = {l11, l21, l22};
    }

    Event draw(NormalStream& rng) const {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        return {gauss.mean[0] + chol[0] * z1, gauss.mean[1] + chol[1] * z1 + chol[2] * z2};
    }
};

inline Envelope make_envelope(const PhaseSpaceDensity& density, double inflation) {
    Envelope env;
    env.gauss = density.moments();
    for (double& v : env.gauss.cov) {
        v *= inflation;
    }
    env.factorize();
    // bound from a grid scan over +-6 envelope standard deviations
    constexpr int kScan = 61;
    const double sq = 6.0 * std::sqrt(env.gauss.cov[0]);
    const double sp = 6.0 * std::sqrt(env.gauss.cov[2]);
    double worst = 0.0;
    for (int i = 0; i < kScan; ++i) {
        for (int j = 0; j < kScan; ++j) {
            const double q = env.gauss.mean[0] + sq * (2.0 * i / (kScan - 1) - 1.0);
            const double p = env.gauss.mean[1] + sp * (2.0 * j / (kScan - 1) - 1.0);
            worst = std::max(worst, density(q, p) / env.gauss(q, p));
        }
    }
    env.bound = 1.2 * worst;
    return env;
}

struct ChunkResult {
    std::vector<Event> events;
    std::size_t proposals = 0;
    std::size_t widenings = 0;
};

inline ChunkResult sample_chunk(const PhaseSpaceDensity& density, std::size_t count, std::uint64_t seed) {
    NormalStream rng(seed);
    ChunkResult out;
    out.events.reserve(count);
    if (const auto& g = density.gaussian()) {
        Envelope exact;
        exact.gauss = *g;
        exact.factorize();
        for (std::size_t i = 0; i < count; ++i) {
            out.events.push_back(exact.draw(rng));
        }
        out.proposals = count;
        return out;
    }
    double inflation = 1.5;
    Envelope env = make_envelope(density, inflation);
    while (out.events.size() < count) {
        bool accepted = false;
        for (std::size_t tries = 0; tries < kMaxProposalsPerSample; ++tries) {
            const Event e = env.draw(rng);
            ++out.proposals;
            const double u = rng.uniform();
            if (u * env.bound * env.gauss(e.q, e.p) < density(e.q, e.p)) {
                out.events.push_back(e);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            inflation *= 1.5;
            env = make_envelope(density, inflation);
            ++out.widenings;
        }
    }
    return out;
}

}  // namespace detail

/// Draw n events. Deterministic in (density, n, seed) for any thread count.
inline EventBatch sample_events(const PhaseSpaceDensity& density, std::size_t n, std::uint64_t seed,
                                unsigned threads = 1) {
    if (n == 0) {
        throw std::invalid_argument("sample_events needs at least one event");
    }
    const std::size_t chunks = (n + kChunkEvents - 1) / kChunkEvents;
    std::vector<detail::ChunkResult> results(chunks);
    auto run = [&](std::size_t first, std::size_t stride) {
        for (std::size_t c = first; c < chunks; c += stride) {
            const std::size_t count = std::min(kChunkEvents, n - c * kChunkEvents);
            results[c] = detail::sample_chunk(density, count, detail::chunk_seed(seed, c));
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, chunks));
    if (workers == 1) {
        run(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back(run, t, workers);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    EventBatch batch;
    batch.seed = seed;
    batch.events.reserve(n);
    std::size_t proposals = 0;
    for (auto& r : results) {
        batch.events.insert(batch.events.end(), r.events.begin(), r.events.end());
        proposals += r.proposals;
        batch.envelope_widenings += r.widenings;
    }
    batch.count = batch.events.size();
    batch.acceptance_rate = static_cast<double>(batch.count) / static_cast<double>(proposals);
    return batch;
}

// ---------------------------------------------------------------------------
// Histograms

struct PhaseHistogram {
    std::size_t n_bins = 0;
    std::vector<std::uint64_t> counts;
    std::uint64_t origin_events = 0;  // included in counts[0]

    [[nodiscard]] std::uint64_t total() const {
        std::uint64_t s = 0;
        for (auto c : counts) {
            s += c;
        }
        return s;
    }
    [[nodiscard]] double bin_width() const { return 2.0 * std::numbers::pi / static_cast<double>(n_bins); }
};

/// Polar angle in [0, 2pi); the origin maps to 0.
inline double pointer_angle(double q, double p) {
    if (q == 0.0 && p == 0.0) {
        return 0.0;
    }
    double a = std::atan2(p, q);
    if (a < 0.0) {
        a += 2.0 * std::numbers::pi;
    }
    return a >= 2.0 * std::numbers::pi ? 0.0 : a;
}

inline PhaseHistogram bin_phases(const EventBatch& batch, std::size_t n_bins) {
    if (n_bins == 0) {
        throw std::invalid_argument("histogram needs at least one bin");
    }
    PhaseHistogram h;
    h.n_bins = n_bins;
    h.counts.assign(n_bins, 0);
    const double scale = static_cast<double>(n_bins) / (2.0 * std::numbers::pi);
    for (const auto& e : batch.events) {
        if (e.q == 0.0 && e.p == 0.0) {
            ++h.origin_events;
            ++h.counts[0];
            continue;
        }
        auto bin = static_cast<std::size_t>(pointer_angle(e.q, e.p) * scale);
        h.counts[std::min(bin, n_bins - 1)] += 1;
    }
    return h;
}

/// Minimum variance of the piecewise-constant density the histogram defines.
inline MinVariance histogram_min_variance(const PhaseHistogram& h) {
    const std::uint64_t total = h.total();
    if (total == 0) {
        throw std::domain_error("histogram_min_variance: empty histogram");
    }
    const std::size_t harmonics = std::max<std::size_t>(256, 8 * h.n_bins);
    const double width = h.bin_width();
    std::vector<cplx> a(harmonics + 1, cplx(0.0));
    a[0] = 1.0;
    for (std::size_t j = 0; j < h.n_bins; ++j) {
        if (h.counts[j] == 0) {
            continue;
        }
        const double mass = static_cast<double>(h.counts[j]) / static_cast<double>(total);
        const double centre = width * (static_cast<double>(j) + 0.5);
        for (std::size_t k = 1; k <= harmonics; ++k) {
            const double kk = static_cast<double>(k);
            const double sinc = std::sin(0.5 * kk * width) / (0.5 * kk * width);
            a[k] += mass * sinc * std::polar(1.0, -kk * centre);
        }
    }
    return detail::minimize_second_moment(a, std::max<std::size_t>(512, 8 * h.n_bins));
}

struct ChiSquare {
    double statistic = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
};

/// Pearson chi-square of observed counts against bin probabilities.
inline ChiSquare chi_square_test(const std::vector<std::uint64_t>& observed, const std::vector<double>& probs,
                                 std::size_t fitted_parameters = 0) {
    if (observed.size() != probs.size() || observed.size() < 2 + fitted_parameters) {
        throw std::invalid_argument("chi-square needs matching bins and at least two cells");
    }
    double n = 0.0;
    for (auto o : observed) {
        n += static_cast<double>(o);
    }
    ChiSquare out;
    std::size_t cells = 0;
    for (std::size_t j = 0; j < observed.size(); ++j) {
        const double expected = n * probs[j];
        if (expected <= 0.0) {
            if (observed[j] > 0) {
                out.statistic = std::numeric_limits<double>::infinity();
            }
            continue;
        }
        const double diff = static_cast<double>(observed[j]) - expected;
        out.statistic += diff * diff / expected;
        ++cells;
    }
    out.dof = cells - 1 - fitted_parameters;
    if (!std::isfinite(out.statistic)) {
        out.p_value = 0.0;
    } else {
        boost::math::chi_squared dist(static_cast<double>(out.dof));
        out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
    }
    return out;
}

}  // namespace homodyne

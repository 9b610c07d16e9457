// homodyne: command-line front end.
//
//   homodyne compensate  --e13 0.5 --e24 1
//   homodyne phase-dist  --e13 0.5 --e24 1 --signal coherent:1,0 --out fig5.csv
//   homodyne sweep       --grid 100 [--parametric] --out gamma.csv
//   homodyne sample      --e13 0.5 --e24 1 --generator auto --events 100000 --seed 7 --out run
//   homodyne verify
//
// Exit codes: 0 ok, 1 verification failure, 2 config error, 3 numeric-domain
// error, 4 I/O error.

#include "homodyne/acceptance.hpp"
#include "homodyne/homodyne.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using homodyne::cplx;
using homodyne::Efficiency;
using json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kDomainError = 3, kIoError = 4 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 12 significant digits everywhere
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}
json jnum(double v) {
    if (!std::isfinite(v)) {
        return nullptr;
    }
    return std::strtod(num(v).c_str(), nullptr);
}

struct RawOptions {
    std::optional<double> e1, e2, e3, e4, e13, e24;
    std::string signal = "coherent:1,0";
    std::string generator = "auto";
    std::size_t cutoff = homodyne::kDefaultCutoff;
    std::size_t bins = 64;
    std::size_t events = 100000;
    std::uint64_t seed = 1;
    std::optional<std::size_t> grid;
    double lo = 0.01;
    double hi = 1.0;
    bool parametric = false;
    std::string out;
    std::string format;
    std::string config;
    unsigned threads = 1;
    bool inject_eff_bug = false;
};

struct Pair {
    Efficiency e13{1.0};
    Efficiency e24{1.0};
    std::optional<homodyne::DetectorQuad> quad;
};

Efficiency checked(double v, const char* name) {
    try {
        return Efficiency(v);
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string(name) + ": " + e.what());
    }
}

Pair resolve_efficiencies(const RawOptions& o) {
    const bool any_quad = o.e1 || o.e2 || o.e3 || o.e4;
    const bool any_pair = o.e13 || o.e24;
    if (any_quad && any_pair) {
        throw ConfigError("give either --e1..--e4 or --e13/--e24, not both");
    }
    if (any_quad) {
        if (!(o.e1 && o.e2 && o.e3 && o.e4)) {
            throw ConfigError("a detector quad needs all of --e1 --e2 --e3 --e4");
        }
        homodyne::DetectorQuad q{checked(*o.e1, "e1"), checked(*o.e2, "e2"), checked(*o.e3, "e3"), checked(*o.e4, "e4")};
        return {q.e13(), q.e24(), q};
    }
    if (!(o.e13 && o.e24)) {
        throw ConfigError("efficiencies missing: give --e13 and --e24, or --e1..--e4");
    }
    return {checked(*o.e13, "e13"), checked(*o.e24, "e24"), std::nullopt};
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot read a number from '" + s + "' in " + what);
    }
}

homodyne::Signal parse_signal(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "coherent") {
        const auto comma = arg.find(',');
        const double re = parse_double(arg.substr(0, comma), "--signal");
        const double im = comma == std::string::npos ? 0.0 : parse_double(arg.substr(comma + 1), "--signal");
        return homodyne::CoherentSignal{{re, im}};
    }
    if (kind == "number") {
        const double n = parse_double(arg, "--signal");
        if (n < 0 || n != std::floor(n)) {
            throw ConfigError("number signal needs a nonnegative integer");
        }
        return homodyne::NumberSignal{static_cast<std::size_t>(n)};
    }
    throw ConfigError("--signal must be coherent:<re>,<im> or number:<n>, got '" + spec + "'");
}

homodyne::Generator parse_generator(const std::string& spec, const Pair& eff) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "vacuum") {
        return homodyne::VacuumGenerator{};
    }
    if (kind == "auto") {
        return homodyne::SqueezedGenerator{homodyne::solve_squeezing(eff.e13, eff.e24)};
    }
    if (kind == "squeezed") {
        const double a = parse_double(arg, "--generator");
        if (!(a > 0.0)) {
            throw ConfigError("squeezing parameter must be positive");
        }
        return homodyne::SqueezedGenerator{a};
    }
    if (kind == "geometric") {
        return homodyne::GeometricGenerator{checked(parse_double(arg, "--generator"), "geometric").value()};
    }
    throw ConfigError("--generator must be vacuum, squeezed:<a>, geometric:<eps> or auto, got '" + spec + "'");
}

std::string signal_label(const homodyne::Signal& s) {
    if (const auto* c = std::get_if<homodyne::CoherentSignal>(&s)) {
        return "coherent:" + num(c->z.real()) + "," + num(c->z.imag());
    }
    return "number:" + std::to_string(std::get<homodyne::NumberSignal>(s).n);
}

std::string generator_label(const homodyne::Generator& g) {
    if (const auto* s = std::get_if<homodyne::SqueezedGenerator>(&g)) {
        return "squeezed:" + num(s->a);
    }
    if (const auto* s = std::get_if<homodyne::GeometricGenerator>(&g)) {
        return "geometric:" + num(s->eps);
    }
    return "vacuum";
}

// signal truncated to the cutoff; refuses when the amplitude leaks past it
homodyne::FockOperator signal_state(const homodyne::Signal& s, std::size_t cutoff) {
    if (const auto* c = std::get_if<homodyne::CoherentSignal>(&s)) {
        const double kept = homodyne::coherent_ket(c->z, cutoff).squaredNorm();
        if (1.0 - kept > 1e-10) {
            throw std::domain_error("cutoff " + std::to_string(cutoff) + " too small for coherent amplitude |z| = " +
                                    num(std::abs(c->z)) + " (lost weight " + num(1.0 - kept) + ")");
        }
    }
    return homodyne::signal_operator(s, cutoff);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output helpers

class Sink {
public:
    explicit Sink(const std::string& path) : path_(path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) {
                throw IoError("cannot write " + path);
            }
        }
    }
    std::ostream& stream() { return path_.empty() ? std::cout : file_; }
    void close() {
        if (!path_.empty()) {
            file_.close();
            if (!file_) {
                throw IoError("error while writing " + path_);
            }
        }
    }

private:
    std::string path_;
    std::ofstream file_;
};

void write_json(const json& j, const std::string& path) {
    Sink s(path);
    s.stream() << j.dump(2) << '\n';
    s.close();
}

std::string sidecar_path(const std::string& out) {
    const auto dot = out.rfind('.');
    const auto slash = out.rfind('/');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    return (has_ext ? out.substr(0, dot) : out) + "_summary.json";
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_compensate(const RawOptions& o) {
    const Pair eff = resolve_efficiencies(o);
    const auto r = eff.quad ? homodyne::compensate(*eff.quad) : homodyne::compensate(eff.e13, eff.e24);
    const double em = std::min(r.e13, r.e24);
    json j;
    j["e13"] = jnum(r.e13);
    j["e24"] = jnum(r.e24);
    j["eps_bs"] = r.eps_bs ? jnum(*r.eps_bs) : json(nullptr);
    j["bs_detector"] = r.bs_detector;
    j["bs_note"] = r.bs_note;
    j["a"] = jnum(r.a);
    j["eta"] = jnum(r.eta);
    j["eps_eff"] = jnum(r.eps_eff);
    j["gamma"] = jnum(r.gamma);
    j["residual"] = jnum(r.residual);
    j["eps_eff_ge_min"] = r.eps_eff >= em;
    if (o.format == "csv") {
        Sink s(o.out);
        s.stream() << "e13,e24,eps_bs,bs_detector,a,eta,eps_eff,gamma,residual\n"
                   << num(r.e13) << ',' << num(r.e24) << ',' << (r.eps_bs ? num(*r.eps_bs) : "") << ','
                   << r.bs_detector << ',' << num(r.a) << ',' << num(r.eta) << ',' << num(r.eps_eff) << ','
                   << num(r.gamma) << ',' << num(r.residual) << '\n';
        s.close();
    } else {
        write_json(j, o.out);
    }
    return kOk;
}

int cmd_phase_dist(const RawOptions& o) {
    const Pair eff = resolve_efficiencies(o);
    const auto signal = parse_signal(o.signal);
    const std::size_t grid = o.grid.value_or(homodyne::kDefaultPhaseGrid);
    const std::size_t size = std::min(o.cutoff, homodyne::kPhaseMatrixTrustRadius);
    const homodyne::FockOperator rho = signal_state(signal, o.cutoff);
    if (1.0 - rho.resized(size).trace().real() > 1e-10) {
        throw std::domain_error("signal has weight beyond the phase-matrix size " + std::to_string(size));
    }

    const double a = homodyne::solve_squeezing(eff.e13, eff.e24);
    const homodyne::FockOperator sq = homodyne::convolve_state(homodyne::GaussianSmear::from_efficiencies(eff.e13, eff.e24),
                                                               homodyne::squeezed_vacuum(a, o.cutoff).state());
    if (!homodyne::is_diagonal(sq, 1e-8)) {
        throw std::domain_error("convolved squeezed generator is not diagonal at this cutoff (off-diagonal " +
                                num(homodyne::max_off_diagonal(sq)) + ")");
    }
    const Efficiency em(std::min(eff.e13.value(), eff.e24.value()));
    const auto p_ideal = homodyne::phase_distribution(rho, homodyne::phase_matrix(homodyne::DiagonalState::vacuum(), size), grid);
    const auto p_sq = homodyne::phase_distribution(
        rho, homodyne::phase_matrix(homodyne::DiagonalState::from_operator(sq), size), grid);
    const auto p_bs = homodyne::phase_distribution(rho, homodyne::phase_matrix(homodyne::geometric_state(em, o.cutoff), size), grid);
    const auto v_ideal = homodyne::min_variance(p_ideal);
    const auto v_sq = homodyne::min_variance(p_sq);
    const auto v_bs = homodyne::min_variance(p_bs);

    json summary;
    summary["signal"] = signal_label(signal);
    summary["e13"] = jnum(eff.e13);
    summary["e24"] = jnum(eff.e24);
    summary["a"] = jnum(a);
    summary["eps_eff"] = jnum(homodyne::effective_efficiency(eff.e13, eff.e24));
    summary["eps_bs_generator"] = jnum(em);
    summary["cutoff"] = o.cutoff;
    summary["grid"] = grid;
    summary["var_min_ideal"] = jnum(v_ideal.value);
    summary["var_min_squeeze"] = jnum(v_sq.value);
    summary["var_min_beamsplitter"] = jnum(v_bs.value);
    summary["integral_ideal"] = jnum(p_ideal.integral());
    summary["integral_squeeze"] = jnum(p_sq.integral());
    summary["integral_beamsplitter"] = jnum(p_bs.integral());

    if (o.format == "json") {
        json j = summary;
        json rows = json::array();
        for (std::size_t k = 0; k < grid; ++k) {
            rows.push_back({jnum(p_ideal.grid[k]), jnum(p_ideal.density[k]), jnum(p_sq.density[k]), jnum(p_bs.density[k])});
        }
        j["columns"] = {"alpha", "p_ideal", "p_squeeze", "p_beamsplitter"};
        j["rows"] = rows;
        write_json(j, o.out);
        return kOk;
    }
    Sink s(o.out);
    s.stream() << "alpha,p_ideal,p_squeeze,p_beamsplitter\n";
    for (std::size_t k = 0; k < grid; ++k) {
        s.stream() << num(p_ideal.grid[k]) << ',' << num(p_ideal.density[k]) << ',' << num(p_sq.density[k]) << ','
                   << num(p_bs.density[k]) << '\n';
    }
    s.close();
    if (o.out.empty()) {
        std::cerr << summary.dump() << '\n';
    } else {
        write_json(summary, sidecar_path(o.out));
    }
    return kOk;
}

int cmd_sweep(const RawOptions& o) {
    homodyne::SweepGrid grid;
    grid.lo = o.lo;
    grid.hi = o.hi;
    grid.points = o.grid.value_or(100);
    if (!(grid.lo > 0.0 && grid.hi <= 1.0 && grid.lo <= grid.hi) || grid.points == 0) {
        throw ConfigError("sweep range must satisfy 0 < lo <= hi <= 1 with at least one point");
    }
    const auto r = homodyne::sweep(grid);

    json summary;
    summary["lo"] = jnum(grid.lo);
    summary["hi"] = jnum(grid.hi);
    summary["points_per_axis"] = grid.points;
    summary["rows"] = r.rows.size();
    summary["max_gamma"] = jnum(r.max_gamma);
    json where = json::array();
    for (const auto& row : r.argmax) {
        where.push_back({{"e13", jnum(row.e13)}, {"e24", jnum(row.e24)}, {"a", jnum(row.a)}});
    }
    summary["argmax"] = where;
    if (o.parametric) {
        // gamma values reached by more than one distinct a
        std::map<std::string, std::vector<double>> by_gamma;
        for (const auto& row : r.rows) {
            by_gamma[num(row.gamma)].push_back(row.a);
        }
        std::size_t multi = 0;
        for (const auto& [g, as] : by_gamma) {
            const auto [mn, mx] = std::minmax_element(as.begin(), as.end());
            multi += (*mx - *mn) > 1e-9 * std::max(1.0, *mx) ? 1 : 0;
        }
        summary["multivalued_gamma_values"] = multi;
    }

    if (o.format == "json") {
        json j = summary;
        json rows = json::array();
        for (const auto& row : r.rows) {
            if (o.parametric) {
                rows.push_back({jnum(row.a), jnum(row.gamma)});
            } else {
                rows.push_back({jnum(row.e13), jnum(row.e24), jnum(row.a), jnum(row.eps_eff), jnum(row.gamma)});
            }
        }
        j["columns"] = o.parametric ? json{"a", "gamma"} : json{"e13", "e24", "a", "eps_eff", "gamma"};
        j["table"] = rows;
        write_json(j, o.out);
        return kOk;
    }
    Sink s(o.out);
    s.stream() << (o.parametric ? "a,gamma\n" : "e13,e24,a,eps_eff,gamma\n");
    for (const auto& row : r.rows) {
        if (o.parametric) {
            s.stream() << num(row.a) << ',' << num(row.gamma) << '\n';
        } else {
            s.stream() << num(row.e13) << ',' << num(row.e24) << ',' << num(row.a) << ',' << num(row.eps_eff) << ','
                       << num(row.gamma) << '\n';
        }
    }
    s.close();
    if (o.out.empty()) {
        std::cerr << summary.dump() << '\n';
    } else {
        write_json(summary, sidecar_path(o.out));
    }
    return kOk;
}

int cmd_sample(const RawOptions& o) {
    const Pair eff = resolve_efficiencies(o);
    const auto signal = parse_signal(o.signal);
    const auto generator = parse_generator(o.generator, eff);
    if (o.bins == 0) {
        throw ConfigError("--bins must be at least 1");
    }
    if (o.events == 0) {
        throw ConfigError("--events must be at least 1");
    }
    (void)signal_state(signal, o.cutoff);
    const auto smear = homodyne::GaussianSmear::from_efficiencies(eff.e13, eff.e24);
    const homodyne::PhaseSpaceDensity density(signal, generator, smear, o.cutoff);
    const auto batch = homodyne::sample_events(density, o.events, o.seed, std::max(1u, o.threads));
    const auto hist = homodyne::bin_phases(batch, o.bins);
    const auto analytic = homodyne::angle_margin(density, density.is_gaussian() ? homodyne::kDefaultPhaseGrid : 256);
    const auto probs = homodyne::bin_probabilities(analytic, o.bins);

    const std::string prefix = o.out.empty() ? "homodyne_sample" : o.out;
    {
        Sink s(prefix + "_events.csv");
        s.stream() << "q,p\n";
        for (const auto& e : batch.events) {
            s.stream() << num(e.q) << ',' << num(e.p) << '\n';
        }
        s.close();
    }
    {
        Sink s(prefix + "_hist.csv");
        s.stream() << "bin,alpha_lo,alpha_hi,count,expected\n";
        for (std::size_t j = 0; j < o.bins; ++j) {
            s.stream() << j << ',' << num(hist.bin_width() * j) << ',' << num(hist.bin_width() * (j + 1)) << ','
                       << hist.counts[j] << ',' << num(probs[j] * static_cast<double>(batch.count)) << '\n';
        }
        s.close();
    }
    json report;
    report["signal"] = signal_label(signal);
    report["generator"] = generator_label(generator);
    report["e13"] = jnum(eff.e13);
    report["e24"] = jnum(eff.e24);
    report["cutoff"] = o.cutoff;
    report["seed"] = o.seed;
    report["events"] = batch.count;
    report["bins"] = o.bins;
    report["sampler"] = density.is_gaussian() ? "exact-gaussian" : "rejection";
    report["acceptance_rate"] = jnum(batch.acceptance_rate);
    report["envelope_widenings"] = batch.envelope_widenings;
    report["origin_events"] = hist.origin_events;
    if (o.bins >= 2) {
        const auto chi = homodyne::chi_square_test(hist.counts, probs);
        report["chi2"] = jnum(chi.statistic);
        report["dof"] = chi.dof;
        report["p_value"] = jnum(chi.p_value);
    } else {
        report["chi2"] = nullptr;
        report["dof"] = 0;
        report["p_value"] = nullptr;
    }
    report["var_min_empirical"] = jnum(homodyne::histogram_min_variance(hist).value);
    report["var_min_analytic"] = jnum(homodyne::min_variance(analytic).value);
    write_json(report, prefix + "_report.json");
    return kOk;
}

int cmd_verify(const RawOptions& o) {
    homodyne::acceptance::Options opt;
    if (o.inject_eff_bug) {
        // mutation self-test: drop the +1 in eps_eff = 2/(eta + 1)
        opt.eps_eff = [](Efficiency x, Efficiency y) { return std::min(1.0, 2.0 / homodyne::eta(x, y)); };
    }
    const auto results = homodyne::acceptance::run_all(opt);
    std::vector<std::string> failed;
    for (const auto& r : results) {
        json line;
        line["id"] = r.id;
        line["check"] = r.name;
        line["passed"] = r.passed;
        line["detail"] = r.detail;
        line["seconds"] = jnum(r.seconds);
        std::cout << line.dump() << '\n';
        if (!r.passed) {
            failed.push_back(r.name);
        }
    }
    const Efficiency e13(0.5), e24(1.0);
    json summary;
    summary["all_passed"] = failed.empty();
    summary["failed"] = failed;
    summary["eps_eff_resolution"] = {
        {"scenario", "e13=0.5, e24=1"},
        {"two_over_eta_plus_one", jnum(2.0 / (homodyne::eta(e13, e24) + 1.0))},
        {"two_over_eta", jnum(2.0 / homodyne::eta(e13, e24))},
        {"quoted", 0.828},
        {"reproduced_by_spectrum", "2/(eta+1)"},
    };
    std::cout << summary.dump() << '\n';
    return failed.empty() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eight-port homodyne detection with unequal detector efficiencies"};
    app.require_subcommand(1);
    RawOptions o;
    std::map<std::string, CLI::Option*> keyed;
    auto keep = [&](const std::string& key, CLI::Option* opt) { keyed[key] = opt; };

    keep("e1", app.add_option("--e1", o.e1, "efficiency of detector 1"));
    keep("e2", app.add_option("--e2", o.e2, "efficiency of detector 2"));
    keep("e3", app.add_option("--e3", o.e3, "efficiency of detector 3"));
    keep("e4", app.add_option("--e4", o.e4, "efficiency of detector 4"));
    keep("e13", app.add_option("--e13", o.e13, "overall efficiency of pair 1-3"));
    keep("e24", app.add_option("--e24", o.e24, "overall efficiency of pair 2-4"));
    keep("signal", app.add_option("--signal", o.signal, "coherent:<re>,<im> | number:<n>")->capture_default_str());
    keep("generator", app.add_option("--generator", o.generator, "vacuum | squeezed:<a> | geometric:<eps> | auto")
                          ->capture_default_str());
    keep("cutoff", app.add_option("--cutoff", o.cutoff, "Fock cutoff (>= 16)")->capture_default_str());
    keep("bins", app.add_option("--bins", o.bins, "angular bins")->capture_default_str());
    keep("events", app.add_option("--events", o.events, "events to sample")->capture_default_str());
    keep("seed", app.add_option("--seed", o.seed, "random seed")->capture_default_str());
    keep("grid", app.add_option("--grid", o.grid, "angle grid (phase-dist) or points per axis (sweep)"));
    keep("lo", app.add_option("--lo", o.lo, "sweep lower bound")->capture_default_str());
    keep("hi", app.add_option("--hi", o.hi, "sweep upper bound")->capture_default_str());
    keep("parametric", app.add_flag("--parametric", o.parametric, "sweep: emit (a, gamma) pairs"));
    keep("out", app.add_option("--out", o.out, "output path (sample: file prefix)"));
    keep("format", app.add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"})));
    keep("threads", app.add_option("--threads", o.threads, "sampling threads (output does not depend on it)")
                        ->capture_default_str());
    app.add_option("--config", o.config, "flat key=value file; flags override it");
    app.add_flag("--inject-eff-bug", o.inject_eff_bug)->group("");

    auto* compensate = app.add_subcommand("compensate", "beam-splitter and squeezing compensation report");
    auto* phase_dist = app.add_subcommand("phase-dist", "ideal / squeezing / beam-splitter phase distributions");
    auto* sweep = app.add_subcommand("sweep", "gamma over an efficiency grid");
    auto* sample = app.add_subcommand("sample", "Monte Carlo detection events and phase histogram");
    auto* verify = app.add_subcommand("verify", "run the acceptance checks");
    for (auto* sub : {compensate, phase_dist, sweep, sample, verify}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (!o.config.empty()) {
            for (const auto& [key, value] : read_config_file(o.config)) {
                const auto it = keyed.find(key);
                if (it == keyed.end()) {
                    throw ConfigError("unknown config key '" + key + "'");
                }
                if (it->second->count() == 0) {
                    it->second->add_result(value);
                    it->second->run_callback();
                }
            }
        }
        if (o.cutoff < 16) {
            throw ConfigError("--cutoff must be at least 16");
        }
        if (o.format.empty()) {
            o.format = compensate->parsed() ? "json" : "csv";
        }
        if (compensate->parsed()) {
            return cmd_compensate(o);
        }
        if (phase_dist->parsed()) {
            return cmd_phase_dist(o);
        }
        if (sweep->parsed()) {
            return cmd_sweep(o);
        }
        if (sample->parsed()) {
            return cmd_sample(o);
        }
        return cmd_verify(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const CLI::ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric domain error: " << e.what() << '\n';
        return kDomainError;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kDomainError;
    }
}

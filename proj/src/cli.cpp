#include "qgtube/cli.hpp"

#include "qgtube/bands.hpp"
#include "qgtube/errors.hpp"
#include "qgtube/halftube.hpp"
#include "qgtube/io.hpp"
#include "qgtube/oracle.hpp"
#include "qgtube/propagator.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

namespace qgtube {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Options {
    std::string command;
    std::string config;
    std::string out;
    std::string svg;
    std::string dispersion;
    std::string window;
    std::string case_name;
    std::string far_end = "dirichlet";
    double tol = kNaN;
    int threads = 1;
    int alpha = 0, beta = 0, delta = 0;
    double lambda = kNaN;
    int grid = 0;
    int columns = 40;
    int points = 40;
    int count = 12;
    int states = 100;
    std::uint64_t seed = 1;
};

std::pair<double, double> parse_window(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ValidationError("--window expects a,b");
    auto num = [&](std::string t) {
        while (!t.empty() && t.front() == ' ') t.erase(t.begin());
        while (!t.empty() && t.back() == ' ') t.pop_back();
        double x = 0;
        const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
        if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size() || !std::isfinite(x))
            throw ValidationError("--window has a malformed number '" + t + "'");
        return x;
    };
    const double a = num(s.substr(0, comma)), b = num(s.substr(comma + 1));
    if (!(a < b)) throw ValidationError("--window needs a < b");
    return {a, b};
}

json read_json(std::istream& is, const std::string& what) {
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed JSON in " + what + ": " + e.what());
    }
}

bool has_params(const Options& o) { return o.alpha != 0 || o.beta != 0 || o.delta != 0; }

// Config from --config (a path, or "-" for stdin), else from --alpha/--beta/--delta with a
// Neumann boundary, else from stdin when allowed.
HalfTubeConfig resolve_config(const Options& o, std::istream& in, bool stdin_fallback) {
    HalfTubeConfig cfg;
    if (o.config == "-" || (o.config.empty() && !has_params(o) && stdin_fallback)) {
        cfg = config_from_json(read_json(in, "stdin"));
    } else if (!o.config.empty()) {
        std::ifstream f(o.config);
        if (!f) throw ValidationError("cannot open config file '" + o.config + "'");
        cfg = config_from_json(read_json(f, o.config));
    } else {
        if (!has_params(o)) throw ValidationError("need --config or --alpha/--beta/--delta");
        return neumann_config(make_params(o.alpha, o.beta, o.delta == 0 ? 1 : o.delta));
    }
    if (has_params(o) && (o.alpha != cfg.params.alpha || o.beta != cfg.params.beta ||
                          (o.delta != 0 && o.delta != cfg.params.delta)))
        throw ValidationError("--alpha/--beta/--delta conflict with the config file");
    return cfg;
}

double require_lambda(const Options& o) {
    if (!std::isfinite(o.lambda)) throw ValidationError("--lambda is required");
    return o.lambda;
}

double tol_or(const Options& o, double fallback) {
    if (std::isnan(o.tol)) return fallback;
    if (!(o.tol > 0)) throw ValidationError("--tol must be positive");
    return o.tol;
}

json run_header(const Options& o, const HalfTubeConfig* cfg) {
    json h;
    h["command"] = o.command;
    if (cfg) h["config"] = config_to_json(*cfg);
    if (std::isfinite(o.lambda)) h["lambda"] = o.lambda;
    if (!o.window.empty()) h["window"] = o.window;
    if (!std::isnan(o.tol)) h["tol"] = o.tol;
    h["threads"] = o.threads;
    return h;
}

json mode_json(const FloquetMode& m) {
    return {{"ell", m.ell},
            {"z", complex_to_json(m.z)},
            {"z1", complex_to_json(m.z1)},
            {"z2", complex_to_json(m.z2)},
            {"abs_z1", std::abs(m.z1)},
            {"classification", std::string(to_string(m.classification))},
            {"self_flux", m.self_flux},
            {"multiplicity", m.multiplicity}};
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw ValidationError("cannot open output file '" + path + "'");
            os_ = &file_;
        }
    }
    std::ostream& stream() { return *os_; }
    void json_doc(const json& j) { *os_ << j.dump(2) << '\n'; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

int cmd_bands(const Options& o, std::ostream& out, std::istream& in) {
    const HalfTubeConfig cfg = resolve_config(o, in, false);
    const auto [lo, hi] = parse_window(o.window.empty() ? "-10,150" : o.window);
    const int grid = o.grid > 0 ? o.grid : 512;
    const auto bands = spectrum_bands(lo, hi, cfg.params, cfg.potential);
    const auto sd = dirichlet_spectrum(cfg.potential, lo, hi);

    Output dst(o.out, out);
    std::ostream& os = dst.stream();
    os << "# qgtube bands\n# run: " << run_header(o, &cfg).dump() << "\n# dirichlet:";
    for (double x : sd) os << ' ' << format_double(x);
    os << "\nell,segment,k_lo,k_hi,lambda_lo,lambda_hi\n";
    for (const Band& b : bands)
        os << b.ell << ',' << b.segment_index << ',' << format_double(b.k_lo) << ',' << format_double(b.k_hi) << ','
           << format_double(b.lambda_lo) << ',' << format_double(b.lambda_hi) << '\n';

    if (!o.svg.empty()) {
        std::ofstream f(o.svg);
        if (!f) throw ValidationError("cannot open svg file '" + o.svg + "'");
        write_band_svg(f, band_diagram(lo, hi, grid, cfg.params, cfg.potential), bands, lo, hi, cfg.params);
    }
    if (!o.dispersion.empty()) {
        std::ofstream f(o.dispersion);
        if (!f) throw ValidationError("cannot open dispersion file '" + o.dispersion + "'");
        f << "# qgtube dispersion\n# run: " << run_header(o, &cfg).dump() << "\nell,k,g,k1,k2\n";
        for (const auto& pt : export_dispersion_data(grid, cfg.params))
            f << pt.ell << ',' << format_double(pt.k) << ',' << format_double(pt.g) << ',' << format_double(pt.k1)
              << ',' << format_double(pt.k2) << '\n';
    }
    return kExitOk;
}

int cmd_modes(const Options& o, std::ostream& out, std::istream& in) {
    const HalfTubeConfig cfg = resolve_config(o, in, false);
    const double lambda = require_lambda(o);
    const ModeSet ms = mode_set(lambda, cfg.params, transfer_constants(lambda, cfg.potential));
    json j;
    j["run"] = run_header(o, &cfg);
    j["lambda"] = lambda;
    j["num_propagating_pairs"] = ms.num_propagating_pairs;
    j["band_edge"] = ms.band_edge;
    j["modes"] = json::array();
    for (const auto& m : ms.modes) j["modes"].push_back(mode_json(m));
    Output(o.out, out).json_doc(j);
    return kExitOk;
}

int cmd_propagator_check(const Options& o, std::ostream& out, std::istream& in) {
    const HalfTubeConfig cfg = resolve_config(o, in, false);
    const double lambda = require_lambda(o);
    const double tol = tol_or(o, 1e-9);
    if (o.states < 1) throw ValidationError("--states must be positive");
    const TubeParams& p = cfg.params;
    const TransferConstants tc = transfer_constants(lambda, cfg.potential);
    const PropagatorBundle b = build_propagator(lambda, p, tc);
    const ModeSet ms = mode_set(lambda, p, tc);

    const double symplectic = (b.P.adjoint() * b.J * b.P - b.J).cwiseAbs().maxCoeff();
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> nd;
    double invariance = 0.0;
    for (int t = 0; t < o.states; ++t) {
        Eigen::VectorXcd x(b.dimension()), y(b.dimension());
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cplx(nd(rng), nd(rng));
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = cplx(nd(rng), nd(rng));
        x.normalize();
        y.normalize();
        invariance = std::max(invariance, std::abs(flux(propagate(x, 1, b), propagate(y, 1, b), b) - flux(x, y, b)));
    }
    const double mismatch = propagator_dispersion_mismatch(b, ms);
    const int R = p.rings();
    const bool sig_ok = b.n_plus == R && b.n_minus == R;
    const bool pass = sig_ok && symplectic <= tol && invariance <= tol && (ms.band_edge || mismatch <= 1e-8);

    json j;
    j["run"] = run_header(o, &cfg);
    j["lambda"] = lambda;
    j["signature"] = {b.n_plus, b.n_minus};
    j["expected_signature"] = {R, R};
    j["symplectic_residual"] = symplectic;
    j["flux_invariance"] = invariance;
    j["eigenvalue_mismatch"] = mismatch;
    {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(b.P, false);
        json ev = json::array(), z1 = json::array();
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(complex_to_json(es.eigenvalues()(i)));
        for (const auto& m : ms.modes) z1.push_back(complex_to_json(m.z1));
        j["propagator_eigenvalues"] = ev;
        j["dispersion_z1"] = z1;
    }
    j["band_edge"] = ms.band_edge;
    j["states"] = o.states;
    j["pass"] = pass;
    Output(o.out, out).json_doc(j);
    return pass ? kExitOk : kExitNumerical;
}

int cmd_scatter(const Options& o, std::ostream& out, std::istream& in) {
    const HalfTubeConfig cfg = resolve_config(o, in, true);
    const double lambda = require_lambda(o);
    const double tol = tol_or(o, 1e-9);
    const ScatteringResult r = scattering_matrix(lambda, cfg);
    json j;
    j["run"] = run_header(o, &cfg);
    j["lambda"] = lambda;
    j["singular"] = r.singular;
    j["restricted_rcond"] = r.restricted_rcond;
    j["channels"] = json::array();
    for (int k = 0; k < r.basis.size(); ++k) {
        const Channel& ch = r.basis.channels[static_cast<std::size_t>(k)];
        j["channels"].push_back({{"index", k},
                                 {"propagating", ch.propagating},
                                 {"incoming", mode_json(ch.incoming)},
                                 {"outgoing", mode_json(ch.outgoing)},
                                 {"incoming_scale", complex_to_json(ch.incoming_scale)},
                                 {"outgoing_scale", complex_to_json(ch.outgoing_scale)}});
    }
    bool pass = true;
    if (!r.singular) {
        j["S"] = matrix_to_json(r.S);
        j["aux_values"] = matrix_to_json(r.aux_values);
        j["flux_residual"] = r.flux_residual;
        j["evanescent_flux_residual"] = r.evanescent_flux_residual;
        j["unitarity_residual"] = r.unitarity_residual;
        pass = r.flux_residual <= tol && r.unitarity_residual <= std::max(tol, 1e-8);
    }
    j["pass"] = pass;
    Output(o.out, out).json_doc(j);
    return pass ? kExitOk : kExitNumerical;
}

json candidate_json(const BoundStateCandidate& c) {
    return {{"lambda", c.lambda},
            {"smallest_singular_value", c.smallest_singular_value},
            {"embedded", c.embedded},
            {"residual", c.residual},
            {"decay_ratio", c.decay_ratio},
            {"expected_decay", c.expected_decay},
            {"outgoing", vector_to_json(c.outgoing)},
            {"aux_values", vector_to_json(c.aux_values)}};
}

int cmd_bound(const Options& o, std::ostream& out, std::istream& in) {
    const HalfTubeConfig cfg = resolve_config(o, in, true);
    if (o.window.empty()) throw ValidationError("--window is required");
    const auto [lo, hi] = parse_window(o.window);
    const BoundStateScan scan = bound_state_scan(lo, hi, cfg, o.grid > 0 ? o.grid : 201);
    json j;
    j["run"] = run_header(o, &cfg);
    j["threshold"] = kBoundStateThreshold;
    j["candidates"] = json::array();
    for (const auto& c : scan.candidates) j["candidates"].push_back(candidate_json(c));
    j["skipped"] = scan.skipped;
    Output(o.out, out).json_doc(j);
    return kExitOk;
}

int cmd_design_robin(const Options& o, std::ostream& out, std::istream& in) {
    const HalfTubeConfig base = resolve_config(o, in, false);
    if (!base.potential.is_zero()) throw ValidationError("design-robin supports the zero potential only");
    if (o.case_name.empty()) throw ValidationError("--case is required");
    const double lambda = require_lambda(o);
    const RobinDesign d = design_robin(parse_bound_case(o.case_name), lambda, base.params);
    const BoundStateCandidate c = candidate_from_design(d);
    json j = config_to_json(d.config);
    j["design"] = {{"case", o.case_name},
                   {"lambda", lambda},
                   {"z", d.z},
                   {"z1", d.z1},
                   {"z2", d.z2},
                   {"roots", d.roots},
                   {"residual", c.residual},
                   {"decay_ratio", c.decay_ratio},
                   {"embedded", c.embedded}};
    j["run"] = run_header(o, nullptr);
    Output(o.out, out).json_doc(j);
    return kExitOk;
}

int cmd_oracle_verify(const Options& o, std::ostream& out, std::istream& in) {
    const HalfTubeConfig cfg = resolve_config(o, in, true);
    const double lambda = require_lambda(o);
    const double tol = tol_or(o, 1e-2);
    FarEnd far;
    if (o.far_end == "dirichlet") far = FarEnd::Dirichlet;
    else if (o.far_end == "neumann") far = FarEnd::Neumann;
    else throw ValidationError("--far-end must be dirichlet or neumann");

    // Is lambda a bound state of the configuration? Gives the decay to match against.
    double expected = kNaN;
    bool bound = false;
    try {
        const BoundStateSystem sys = bound_state_system(lambda, cfg);
        if (sys.sigma_min < kBoundStateThreshold) {
            BoundStateCandidate c;
            c.lambda = lambda;
            c.outgoing = sys.outgoing;
            c.aux_values = sys.aux_values;
            expected = verify_bound_state(c, cfg).expected_decay;
            bound = true;
        }
    } catch (const UnsupportedPointError&) {
    } catch (const DirichletSpectrumError&) {
    }

    auto solve = [&](int N, OracleMatch& match, std::vector<double>& values) {
        const DiscretizedModel m = build_model(cfg, o.columns, N, far);
        const auto pairs = eigs_near(m, lambda, o.count, o.seed);
        values.clear();
        for (const auto& e : pairs) values.push_back(e.value);
        match = bound ? match_by_decay(m, pairs, expected) : OracleMatch{pairs.front().value, 0.0, 0};
        if (!bound) {
            auto norms = column_norms(m, pairs.front().vector);
            norms.resize(std::min<std::size_t>(norms.size(), 10));
            match.decay_fit = fit_geometric_decay(norms);
        }
        return m.size();
    };
    OracleMatch fine, coarse;
    std::vector<double> values, coarse_values;
    const auto rows = solve(o.points, fine, values);
    solve(o.points / 2, coarse, coarse_values);
    const double err_fine = std::abs(fine.lambda - lambda);
    const double err_coarse = std::abs(coarse.lambda - lambda);
    const double ratio = err_fine > 0 ? err_coarse / err_fine : std::numeric_limits<double>::infinity();

    const bool pass = bound ? (err_fine <= tol && std::abs(fine.decay_fit - expected) <= 0.1) : (err_fine > tol);
    json j;
    j["run"] = run_header(o, &cfg);
    j["columns"] = o.columns;
    j["points"] = o.points;
    j["rows"] = rows;
    j["bound_state"] = bound;
    j["nearest_eigenvalues"] = values;
    j["matched_eigenvalue"] = fine.lambda;
    j["error"] = err_fine;
    j["decay_fit"] = fine.decay_fit;
    if (bound) j["expected_decay"] = expected;
    j["coarse_points"] = o.points / 2;
    j["coarse_eigenvalue"] = coarse.lambda;
    j["convergence_ratio"] = bound ? json(ratio) : json(nullptr);
    j["pass"] = pass;
    Output(o.out, out).json_doc(j);
    return pass ? kExitOk : kExitNumerical;
}

int cmd_dirichlet(const Options& o, std::ostream& out, std::istream& in) {
    EdgePotential q = EdgePotential::zero();
    HalfTubeConfig cfg;
    const bool have_cfg = !o.config.empty() || has_params(o);
    if (have_cfg) {
        cfg = resolve_config(o, in, false);
        q = cfg.potential;
    }
    const auto [lo, hi] = parse_window(o.window.empty() ? "-10,150" : o.window);
    json j;
    j["run"] = run_header(o, have_cfg ? &cfg : nullptr);
    j["potential"] = potential_to_json(q);
    j["eigenvalues"] = dirichlet_spectrum(q, lo, hi);
    Output(o.out, out).json_doc(j);
    return kExitOk;
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in) {
    Options o;
    CLI::App app{"Floquet modes, bands, scattering and bound states of square-lattice quantum-graph tubes"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", o.config, "JSON config path ('-' for stdin)");
    app.add_option("--tol", o.tol, "tolerance override");
    app.add_option("--threads", o.threads, "worker threads (accepted for reproducibility; runs are single-threaded)")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "output path (default stdout)");
    app.add_option("--svg", o.svg, "SVG output path (bands)");
    app.add_option("--alpha", o.alpha, "horizontal identification step");
    app.add_option("--beta", o.beta, "vertical identification step");
    app.add_option("--delta", o.delta, "common factor");

    auto* bands = app.add_subcommand("bands", "band intervals in a lambda window (CSV)");
    bands->add_option("--window", o.window, "a,b (default -10,150)");
    bands->add_option("--grid", o.grid, "k-grid for the SVG and dispersion data");
    bands->add_option("--dispersion", o.dispersion, "write (k, g, k1, k2) curve data to this CSV");

    auto* modes = app.add_subcommand("modes", "Floquet modes at one lambda (JSON)");
    modes->add_option("--lambda", o.lambda)->required();

    auto* prop = app.add_subcommand("propagator-check", "propagator and flux-form checks (JSON)");
    prop->add_option("--lambda", o.lambda)->required();
    prop->add_option("--states", o.states, "random states for the invariance test");
    prop->add_option("--seed", o.seed);

    auto* scatter = app.add_subcommand("scatter", "scattering matrix of the half-tube (JSON)");
    scatter->add_option("--lambda", o.lambda)->required();

    auto* bound = app.add_subcommand("bound", "bound-state scan (JSON)");
    bound->add_option("--window", o.window, "a,b")->required();
    bound->add_option("--grid", o.grid, "scan grid points (default 201)");

    auto* design = app.add_subcommand("design-robin", "Robin coefficients supporting a bound state (config JSON)");
    design->add_option("--case", o.case_name, "a, b, c or d")->required();
    design->add_option("--lambda", o.lambda)->required();

    auto* oracle = app.add_subcommand("oracle-verify", "finite-difference cross-check (JSON)");
    oracle->add_option("--lambda", o.lambda)->required();
    oracle->add_option("--columns", o.columns, "tube columns M")->check(CLI::Range(10, 100000));
    oracle->add_option("--points", o.points, "points per edge N")->check(CLI::Range(8, 100000));
    oracle->add_option("--count", o.count, "eigenvalues to compute")->check(CLI::PositiveNumber);
    oracle->add_option("--far-end", o.far_end, "dirichlet or neumann");
    oracle->add_option("--seed", o.seed);

    auto* dir = app.add_subcommand("dirichlet", "edge Dirichlet spectrum in a window (JSON)");
    dir->add_option("--window", o.window, "a,b (default -10,150)");

    std::vector<std::string> argv_store{"qgtube"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_store) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << one_line(e.what()) << '\n';
        return kExitValidation;
    }

    try {
        for (auto* sub : app.get_subcommands()) o.command = sub->get_name();
        if (o.command == "bands") return cmd_bands(o, out, in);
        if (o.command == "modes") return cmd_modes(o, out, in);
        if (o.command == "propagator-check") return cmd_propagator_check(o, out, in);
        if (o.command == "scatter") return cmd_scatter(o, out, in);
        if (o.command == "bound") return cmd_bound(o, out, in);
        if (o.command == "design-robin") return cmd_design_robin(o, out, in);
        if (o.command == "oracle-verify") return cmd_oracle_verify(o, out, in);
        if (o.command == "dirichlet") return cmd_dirichlet(o, out, in);
        err << "error: unknown subcommand\n";
        return kExitValidation;
    } catch (const Error& e) {
        err << "error: " << one_line(e.what()) << '\n';
        return e.numerical() ? kExitNumerical : kExitValidation;
    } catch (const json::exception& e) {
        err << "error: invalid config: " << one_line(e.what()) << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << one_line(e.what()) << '\n';
        return kExitNumerical;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr, std::cin);
}

}  // namespace qgtube

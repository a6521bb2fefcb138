#include "qgtube/halftube.hpp"

#include "qgtube/bands.hpp"
#include "qgtube/errors.hpp"
#include "qgtube/numeric.hpp"
#include "qgtube/propagator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace qgtube {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

bool robin_ok(const RobinPair& r) {
    return std::isfinite(r.a) && std::isfinite(r.b) && !(r.a == 0.0 && r.b == 0.0);
}

TransferConstants aux_edge_constants(double lambda, const EdgePotential& q, double length, const std::string& name) {
    const TransferConstants tc = transfer_constants(lambda, q, length);
    if (is_dirichlet_point(tc)) {
        std::ostringstream os;
        os << name << " has a Dirichlet eigenvalue at lambda=" << lambda;
        throw DirichletSpectrumError(os.str(), lambda);
    }
    return tc;
}

double dist2(const FloquetMode& m, cplx t1, cplx t2) { return std::abs(m.z1 - t1) + std::abs(m.z2 - t2); }

}  // namespace

void HalfTubeConfig::validate() const {
    const int rings = params.rings();
    require(rings > 0, "tube parameters are not initialized");
    require(static_cast<int>(boundary_robin.size()) == rings,
            "boundary_robin needs exactly beta*delta entries");
    for (std::size_t n = 0; n < boundary_robin.size(); ++n)
        require(robin_ok(boundary_robin[n]), "boundary_robin[" + std::to_string(n) + "] must not be (0,0)");
    const int g = aux.vertex_count();
    for (int v = 0; v < g; ++v)
        require(robin_ok(aux.vertex_robin[static_cast<std::size_t>(v)]),
                "aux vertex " + std::to_string(v) + " robin must not be (0,0)");
    for (const auto& e : aux.internal_edges) {
        require(e.from >= 0 && e.from < g && e.to >= 0 && e.to < g, "aux edge endpoint out of range");
        require(std::isfinite(e.length) && e.length > 0, "aux edge length must be positive");
    }
    for (const auto& e : aux.attachment_edges) {
        require(e.from >= 0 && e.from < g, "attachment edge aux endpoint out of range");
        require(e.ring >= 0 && e.ring < rings, "attachment edge targets an invalid ring");
        require(std::isfinite(e.length) && e.length > 0, "aux edge length must be positive");
    }
}

HalfTubeConfig neumann_config(const TubeParams& p, const EdgePotential& potential) {
    HalfTubeConfig cfg;
    cfg.params = p;
    cfg.potential = potential;
    cfg.boundary_robin.assign(static_cast<std::size_t>(p.rings()), RobinPair{0.0, 1.0});
    return cfg;
}

int ChannelBasis::propagating_count() const {
    return static_cast<int>(std::count_if(channels.begin(), channels.end(), [](const Channel& c) { return c.propagating; }));
}

ChannelBasis channel_basis(double lambda, const TubeParams& p, const EdgePotential& potential) {
    ChannelBasis basis;
    basis.lambda = lambda;
    basis.tc = transfer_constants(lambda, potential);
    const ModeSet ms = mode_set(lambda, p, basis.tc);
    if (ms.band_edge) {
        std::ostringstream os;
        os << "lambda=" << lambda << " is a band edge";
        throw UnsupportedPointError(os.str(), lambda);
    }
    std::vector<FloquetMode> left, right;
    for (const auto& m : ms.modes) (is_leftward(m.classification) ? left : right).push_back(m);
    const int rings = p.rings();
    if (static_cast<int>(left.size()) != rings || static_cast<int>(right.size()) != rings) {
        std::ostringstream os;
        os << "expected " << rings << " modes in each direction, got " << left.size() << " leftward and "
           << right.size() << " rightward";
        throw ConsistencyError(os.str());
    }
    std::sort(left.begin(), left.end(), [](const FloquetMode& a, const FloquetMode& b) {
        const double aa = std::arg(a.z1), ab = std::arg(b.z1);
        if (a.ell != b.ell) return a.ell < b.ell;
        if (aa != ab) return aa < ab;
        return std::abs(a.z1) < std::abs(b.z1);
    });

    const PropagatorBundle bundle = build_propagator(lambda, p, basis.tc);
    std::vector<bool> used(right.size(), false);
    for (const FloquetMode& in : left) {
        const bool prop = in.classification == ModeClass::LeftProp;
        const cplx t1 = prop ? std::conj(in.z1) : 1.0 / std::conj(in.z1);
        const cplx t2 = prop ? std::conj(in.z2) : 1.0 / std::conj(in.z2);
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < right.size(); ++k) {
            if (used[k] || is_propagating(right[k].classification) != prop) continue;
            const double d = dist2(right[k], t1, t2);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(k);
            }
        }
        if (best < 0) throw ConsistencyError("no rightward partner for a leftward mode");
        used[static_cast<std::size_t>(best)] = true;

        Channel ch;
        ch.incoming = in;
        ch.outgoing = right[static_cast<std::size_t>(best)];
        ch.propagating = prop;
        const Eigen::VectorXcd xin = mode_state(ch.incoming, p);
        const Eigen::VectorXcd xout = mode_state(ch.outgoing, p);
        // phase: largest-magnitude state coordinate real positive
        // (first coordinate within 1e-9 of the max, since propagating modes tie everywhere)
        auto phase = [](const Eigen::VectorXcd& x) {
            const double top = x.cwiseAbs().maxCoeff();
            Eigen::Index k = 0;
            while (std::abs(x(k)) < top * (1 - 1e-9)) ++k;
            return std::conj(x(k)) / std::abs(x(k));
        };
        if (prop) {
            const double fin = flux(xin, xin, bundle).real();
            const double fout = flux(xout, xout, bundle).real();
            if (!(fin < 0 && fout > 0)) throw ConsistencyError("propagating channel has the wrong flux sign");
            ch.incoming_scale = phase(xin) / std::sqrt(-fin);
            ch.outgoing_scale = phase(xout) / std::sqrt(fout);
        } else {
            ch.outgoing_scale = phase(xout);
            const cplx kappa = flux(ch.outgoing_scale * xout, xin, bundle);
            if (std::abs(kappa) == 0.0) throw ConsistencyError("evanescent pair has zero cross flux");
            ch.incoming_scale = 1.0 / kappa;
        }
        basis.channels.push_back(ch);
    }
    return basis;
}

Eigen::MatrixXcd assemble_F(double lambda, const HalfTubeConfig& config, const ChannelBasis& basis) {
    const TubeParams& p = config.params;
    const int rings = p.rings();
    const int g = config.aux.vertex_count();
    if (basis.size() != rings) throw ParameterError("channel basis does not match the tube");
    const TransferConstants& tc = basis.tc;
    if (is_dirichlet_point(tc)) throw DirichletSpectrumError("tube edges have a Dirichlet eigenvalue", lambda);

    std::vector<TransferConstants> internal_tc, attach_tc;
    for (std::size_t i = 0; i < config.aux.internal_edges.size(); ++i) {
        const auto& e = config.aux.internal_edges[i];
        internal_tc.push_back(aux_edge_constants(lambda, e.potential, e.length,
                                                 "aux edge " + std::to_string(i) + " (" + std::to_string(e.from) +
                                                     "-" + std::to_string(e.to) + ")"));
    }
    for (std::size_t i = 0; i < config.aux.attachment_edges.size(); ++i) {
        const auto& e = config.aux.attachment_edges[i];
        attach_tc.push_back(aux_edge_constants(lambda, e.potential, e.length,
                                               "attachment edge " + std::to_string(i) + " (aux " +
                                                   std::to_string(e.from) + " - ring " + std::to_string(e.ring) + ")"));
    }

    // Mode columns: j in [0, R) outgoing, [R, 2R) incoming.
    auto mode_of = [&](int col) -> std::pair<const FloquetMode*, cplx> {
        const Channel& ch = basis.channels[static_cast<std::size_t>(col % rings)];
        return col < rings ? std::make_pair(&ch.outgoing, ch.outgoing_scale)
                           : std::make_pair(&ch.incoming, ch.incoming_scale);
    };

    Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(g + rings, g + 2 * rings);
    for (int n = 0; n < rings; ++n) {
        const RobinPair& r = config.boundary_robin[static_cast<std::size_t>(n)];
        const VertexId vn{0, n};
        const Neighbors nb = neighbors(vn, p);
        // tube edges of T_+ at v_n: right, down, and up when it stays in column 0
        std::vector<VertexId> inside;
        for (const VertexId& w : {nb.right, nb.down, nb.up})
            if (w.column >= 0) inside.push_back(w);
        double attach_c = 0.0;
        for (std::size_t i = 0; i < attach_tc.size(); ++i) {
            const auto& e = config.aux.attachment_edges[i];
            if (e.ring != n) continue;
            attach_c += attach_tc[i].c / attach_tc[i].s;
            F(g + n, e.from) += r.b / attach_tc[i].s;
        }
        for (int col = 0; col < 2 * rings; ++col) {
            const auto [m, scale] = mode_of(col);
            const cplx u = m->value_at(vn, p);
            cplx deriv = 0.0;
            for (const VertexId& w : inside) deriv += (m->value_at(w, p) - tc.c * u) / tc.s;
            F(g + n, g + col) = scale * (r.a * u + r.b * (deriv - attach_c * u));
        }
    }
    for (int v = 0; v < g; ++v) F(v, v) += config.aux.vertex_robin[static_cast<std::size_t>(v)].a;
    for (std::size_t i = 0; i < internal_tc.size(); ++i) {
        const auto& e = config.aux.internal_edges[i];
        const double c = internal_tc[i].c, s = internal_tc[i].s;
        const double bf = config.aux.vertex_robin[static_cast<std::size_t>(e.from)].b;
        const double bt = config.aux.vertex_robin[static_cast<std::size_t>(e.to)].b;
        F(e.from, e.to) += bf / s;
        F(e.from, e.from) -= bf * c / s;
        F(e.to, e.from) += bt / s;
        F(e.to, e.to) -= bt * c / s;
    }
    for (std::size_t i = 0; i < attach_tc.size(); ++i) {
        const auto& e = config.aux.attachment_edges[i];
        const double c = attach_tc[i].c, s = attach_tc[i].s;
        const double b = config.aux.vertex_robin[static_cast<std::size_t>(e.from)].b;
        F(e.from, e.from) -= b * c / s;
        for (int col = 0; col < 2 * rings; ++col) {
            const auto [m, scale] = mode_of(col);
            F(e.from, g + col) += b / s * scale * m->value_at({0, e.ring}, p);
        }
    }
    return F;
}

double conservation_form(const Eigen::VectorXcd& c_out, const Eigen::VectorXcd& c_in, const ChannelBasis& basis) {
    double total = 0.0;
    for (int j = 0; j < basis.size(); ++j) {
        if (basis.channels[static_cast<std::size_t>(j)].propagating)
            total += std::norm(c_out(j)) - std::norm(c_in(j));
        else
            total += 2.0 * (std::conj(c_out(j)) * c_in(j)).real();
    }
    return total;
}

ScatteringResult scattering_matrix(double lambda, const HalfTubeConfig& config) {
    config.validate();
    ScatteringResult res;
    res.lambda = lambda;
    res.basis = channel_basis(lambda, config.params, config.potential);
    const Eigen::MatrixXcd F = assemble_F(lambda, config, res.basis);
    const int rings = config.params.rings();
    const int g = config.aux.vertex_count();
    const int nr = g + rings;

    Eigen::MatrixXcd Fr = F.leftCols(nr);
    const Eigen::MatrixXcd Fin = F.rightCols(rings);
    Eigen::VectorXd scale(nr);
    for (int j = 0; j < nr; ++j) {
        scale(j) = Fr.col(j).norm();
        if (scale(j) == 0.0) scale(j) = 1.0;
        Fr.col(j) /= scale(j);
    }
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(Fr);
    res.restricted_rcond = lu.rcond();
    for (int j = 0; j < rings; ++j)
        if (res.basis.channels[static_cast<std::size_t>(j)].propagating) res.propagating.push_back(j);
    if (lu.rank() < nr || res.restricted_rcond < 1e-12) {
        res.singular = true;
        return res;
    }
    Eigen::MatrixXcd X = -lu.solve(Fin);
    for (int j = 0; j < nr; ++j) X.row(j) /= scale(j);
    res.aux_values = X.topRows(g);
    res.S = X.bottomRows(rings);

    const auto np = static_cast<Eigen::Index>(res.propagating.size());
    Eigen::MatrixXcd Sp(np, np);
    for (Eigen::Index a = 0; a < np; ++a)
        for (Eigen::Index b = 0; b < np; ++b) Sp(a, b) = res.S(res.propagating[a], res.propagating[b]);
    if (np > 0)
        res.unitarity_residual =
            (Sp.adjoint() * Sp - Eigen::MatrixXcd::Identity(np, np)).cwiseAbs().maxCoeff();

    for (int j = 0; j < rings; ++j) {
        Eigen::VectorXcd cin = Eigen::VectorXcd::Zero(rings);
        cin(j) = 1.0;
        const Eigen::VectorXcd cout = res.S.col(j);
        const double form = std::abs(conservation_form(cout, cin, res.basis));
        if (res.basis.channels[static_cast<std::size_t>(j)].propagating)
            res.flux_residual = std::max(res.flux_residual, form);
        else
            res.evanescent_flux_residual =
                std::max(res.evanescent_flux_residual, form / std::max(1.0, cout.squaredNorm()));
    }
    return res;
}

BoundStateSystem bound_state_system(double lambda, const HalfTubeConfig& config) {
    const ChannelBasis basis = channel_basis(lambda, config.params, config.potential);
    const Eigen::MatrixXcd F = assemble_F(lambda, config, basis);
    const int rings = config.params.rings();
    const int g = config.aux.vertex_count();
    const int nr = g + rings;
    const int np = basis.propagating_count();

    // Columns scaled by the field amplitude they represent (not by their F entries,
    // which vanish for an exact bound state); rows equilibrated afterwards.
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(nr + np, nr);
    A.topRows(nr) = F.leftCols(nr);
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(nr);
    for (int j = 0; j < rings; ++j) {
        const Channel& ch = basis.channels[static_cast<std::size_t>(j)];
        double amp = 0.0;
        for (int n = 0; n < rings; ++n) amp += std::norm(ch.outgoing.value_at({0, n}, config.params));
        scale(g + j) = std::abs(ch.outgoing_scale) * std::sqrt(amp);
    }
    for (int j = 0; j < nr; ++j) A.col(j) /= scale(j);
    for (int i = 0; i < nr; ++i) {
        const double rn = A.row(i).norm();
        if (rn > 0) A.row(i) /= rn;
    }
    int row = nr;
    for (int j = 0; j < rings; ++j)
        if (basis.channels[static_cast<std::size_t>(j)].propagating) A(row++, g + j) = 1.0;

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
    BoundStateSystem sys;
    sys.sigma_min = svd.singularValues()(nr - 1);
    Eigen::VectorXcd x = svd.matrixV().col(nr - 1);
    for (int j = 0; j < nr; ++j) x(j) /= scale(j);
    sys.aux_values = x.head(g);
    sys.outgoing = x.tail(rings);
    return sys;
}

namespace {

double sigma_or_inf(double lambda, const HalfTubeConfig& config) {
    try {
        return bound_state_system(lambda, config).sigma_min;
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

double golden_min(const HalfTubeConfig& config, double a, double b) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = sigma_or_inf(x1, config), f2 = sigma_or_inf(x2, config);
    double best_x = f1 < f2 ? x1 : x2, best_f = std::min(f1, f2);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = sigma_or_inf(x1, config);
            if (f1 < best_f) { best_f = f1; best_x = x1; }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = sigma_or_inf(x2, config);
            if (f2 < best_f) { best_f = f2; best_x = x2; }
        }
    }
    return best_x;
}

std::vector<double> scan_exclusions(double lo, double hi, const HalfTubeConfig& config) {
    std::vector<double> ex = dirichlet_spectrum(config.potential, lo - 1.0, hi + 1.0);
    for (const auto& e : config.aux.internal_edges)
        for (double l : dirichlet_spectrum(e.potential, lo - 1.0, hi + 1.0, e.length)) ex.push_back(l);
    for (const auto& e : config.aux.attachment_edges)
        for (double l : dirichlet_spectrum(e.potential, lo - 1.0, hi + 1.0, e.length)) ex.push_back(l);
    for (double l : band_edges(lo - 1.0, hi + 1.0, config.params, config.potential)) ex.push_back(l);
    std::sort(ex.begin(), ex.end());
    return ex;
}

bool near_any(double x, const std::vector<double>& pts, double tol) {
    auto it = std::lower_bound(pts.begin(), pts.end(), x - tol);
    return it != pts.end() && *it <= x + tol;
}

}  // namespace

BoundStateScan bound_state_scan(double lo, double hi, const HalfTubeConfig& config, int grid) {
    config.validate();
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) throw ParameterError("window must be a bounded interval");
    if (grid < 3) throw ParameterError("scan grid needs at least 3 points");
    const std::vector<double> excluded = scan_exclusions(lo, hi, config);

    BoundStateScan out;
    std::vector<double> xs(static_cast<std::size_t>(grid)), fs(xs.size());
    for (int i = 0; i < grid; ++i) {
        const double x = lo + (hi - lo) * i / (grid - 1);
        xs[static_cast<std::size_t>(i)] = x;
        if (near_any(x, excluded, kScanExclusion)) {
            out.skipped.push_back(x);
            fs[static_cast<std::size_t>(i)] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        try {
            fs[static_cast<std::size_t>(i)] = bound_state_system(x, config).sigma_min;
        } catch (const Error&) {
            out.skipped.push_back(x);
            fs[static_cast<std::size_t>(i)] = std::numeric_limits<double>::quiet_NaN();
        }
    }

    std::vector<double> found;
    for (int i = 0; i < grid; ++i) {
        const double f = fs[static_cast<std::size_t>(i)];
        if (std::isnan(f)) continue;
        const bool left_ok = i == 0 || std::isnan(fs[static_cast<std::size_t>(i - 1)]) || f <= fs[static_cast<std::size_t>(i - 1)];
        const bool right_ok = i == grid - 1 || std::isnan(fs[static_cast<std::size_t>(i + 1)]) || f <= fs[static_cast<std::size_t>(i + 1)];
        if (!(left_ok && right_ok)) continue;
        const double a = xs[static_cast<std::size_t>(std::max(0, i - 1))];
        const double b = xs[static_cast<std::size_t>(std::min(grid - 1, i + 1))];
        double x = golden_min(config, a, b);
        if (sigma_or_inf(x, config) > f) x = xs[static_cast<std::size_t>(i)];
        if (near_any(x, excluded, kScanExclusion)) continue;
        bool dup = false;
        for (double y : found) dup = dup || std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(x));
        if (dup) continue;
        BoundStateSystem sys;
        try {
            sys = bound_state_system(x, config);
        } catch (const Error&) {
            continue;
        }
        if (!(sys.sigma_min < kBoundStateThreshold)) continue;
        found.push_back(x);
        BoundStateCandidate c;
        c.lambda = x;
        c.smallest_singular_value = sys.sigma_min;
        c.outgoing = sys.outgoing;
        c.aux_values = sys.aux_values;
        c.embedded = in_spectrum(x, config.params, config.potential).in_spectrum;
        const BoundStateCheck chk = verify_bound_state(c, config);
        c.residual = chk.residual;
        c.decay_ratio = chk.decay_ratio;
        c.expected_decay = chk.expected_decay;
        out.candidates.push_back(std::move(c));
    }
    std::sort(out.candidates.begin(), out.candidates.end(),
              [](const BoundStateCandidate& a, const BoundStateCandidate& b) { return a.lambda < b.lambda; });
    return out;
}

BoundCase parse_bound_case(const std::string& s) {
    std::string t;
    for (char ch : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (t == "a") return BoundCase::A;
    if (t == "b") return BoundCase::B;
    if (t == "c") return BoundCase::C;
    if (t == "d") return BoundCase::D;
    throw ParameterError("bound-state case must be one of a, b, c, d (got '" + s + "')");
}

std::string to_string(BoundCase c) {
    switch (c) {
        case BoundCase::A: return "a";
        case BoundCase::B: return "b";
        case BoundCase::C: return "c";
        case BoundCase::D: return "d";
    }
    return "?";
}

RobinDesign design_robin(BoundCase which, double lambda, const TubeParams& p) {
    const std::string name = "case (" + to_string(which) + ")";
    auto fail = [&](const std::string& why) { throw ParameterError(name + ": " + why); };
    if (!std::isfinite(lambda)) fail("lambda must be finite");
    const bool beta_even = p.beta % 2 == 0;
    const double root = lambda > 0 ? std::sqrt(lambda) : 0.0;
    switch (which) {
        case BoundCase::A:
            if (!(lambda < 0)) fail("requires lambda < 0");
            break;
        case BoundCase::B:
            if (!beta_even) fail("requires beta even");
            if (!(lambda < 0)) fail("requires lambda < 0");
            break;
        case BoundCase::C: {
            if (!beta_even) fail("requires beta even");
            if (!(lambda > 0)) fail("requires lambda > 0");
            const double t = std::fmod(root + kPi / 2, 2 * kPi);
            if (!(t > 0 && t < kPi)) fail("requires sqrt(lambda) in (-pi/2, pi/2) + 2 pi Z");
            break;
        }
        case BoundCase::D: {
            if (beta_even) fail("requires beta odd");
            if (p.alpha % 2 != 0) fail("requires alpha even so that z2 > 1");
            if (!(lambda > 0)) fail("requires lambda > 0");
            const double t = std::fmod(root - kPi / 2, 2 * kPi);
            if (!(t > 0 && t < kPi)) fail("requires sqrt(lambda) in (pi/2, 3pi/2) + 2 pi Z");
            break;
        }
    }
    const EdgePotential zero = EdgePotential::zero();
    const TransferConstants tc = transfer_constants(lambda, zero);
    if (is_dirichlet_point(tc)) fail("lambda is in the Dirichlet spectrum (k pi)^2");
    if (mode_set(lambda, p, tc).band_edge) fail("lambda is a band edge");

    const double target = 4.0 * tc.c;
    auto f = [&](double z) {
        return std::pow(z, p.beta) + std::pow(z, -p.beta) + std::pow(z, p.alpha) + std::pow(z, -p.alpha) - target;
    };
    const double sign = which == BoundCase::A ? 1.0 : -1.0;
    constexpr int kGrid = 4096;
    RobinDesign d;
    double za = sign / kGrid;
    double fa = f(za);
    for (int i = 2; i < kGrid; ++i) {
        const double zb = sign * i / kGrid;
        const double fb = f(zb);
        if (std::isfinite(fa) && std::isfinite(fb) && ((fa < 0) != (fb < 0) || fb == 0.0)) {
            double lo = za, hi = zb, flo = fa;
            while (true) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                const double fm = f(mid);
                if (fm == 0.0) { lo = hi = mid; break; }
                if ((fm < 0) == (flo < 0)) { lo = mid; flo = fm; }
                else hi = mid;
            }
            d.roots.push_back(0.5 * (lo + hi));
        }
        za = zb;
        fa = fb;
    }
    if (d.roots.empty()) throw InfeasibleError(name + ": no real root of the dispersion relation in the case interval");
    std::sort(d.roots.begin(), d.roots.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    d.lambda = lambda;
    d.z = d.roots.front();
    d.z1 = std::pow(d.z, p.beta);
    d.z2 = std::pow(d.z, -p.alpha);
    bool signs = false;
    switch (which) {
        case BoundCase::A: signs = d.z1 > 0 && d.z1 < 1 && d.z2 > 1; break;
        case BoundCase::B:
        case BoundCase::C: signs = d.z1 > 0 && d.z1 < 1 && d.z2 < -1; break;
        case BoundCase::D: signs = d.z1 > -1 && d.z1 < 0 && d.z2 > 1; break;
    }
    if (!signs) throw InfeasibleError(name + ": root violates the sign conditions on z1, z2");

    d.config = neumann_config(p, zero);
    const double z = d.z;
    for (int n = 0; n < p.rings(); ++n) {
        const int chi = p.boundary_flags[static_cast<std::size_t>(n)];
        const double bracket = std::pow(z, p.beta) + std::pow(z, p.alpha) - (2 + chi) * tc.c + chi * std::pow(z, -p.alpha);
        d.config.boundary_robin[static_cast<std::size_t>(n)] = {-bracket / tc.s, 1.0};
    }
    return d;
}

BoundStateCandidate candidate_from_design(const RobinDesign& design) {
    const TubeParams& p = design.config.params;
    const ChannelBasis basis = channel_basis(design.lambda, p, design.config.potential);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < basis.size(); ++j) {
        const FloquetMode& m = basis.channels[static_cast<std::size_t>(j)].outgoing;
        if (m.ell != 0) continue;
        const double dd = std::abs(m.z - design.z);
        if (dd < best_d) {
            best_d = dd;
            best = j;
        }
    }
    if (best < 0 || best_d > 1e-8) throw ConsistencyError("designed mode not found among the outgoing channels");
    BoundStateCandidate c;
    c.lambda = design.lambda;
    c.outgoing = Eigen::VectorXcd::Zero(basis.size());
    c.outgoing(best) = 1.0 / basis.channels[static_cast<std::size_t>(best)].outgoing_scale;
    c.aux_values = Eigen::VectorXcd::Zero(0);
    c.embedded = in_spectrum(design.lambda, p, design.config.potential).in_spectrum;
    const BoundStateCheck chk = verify_bound_state(c, design.config);
    c.residual = chk.residual;
    c.decay_ratio = chk.decay_ratio;
    c.expected_decay = chk.expected_decay;
    return c;
}

double fit_geometric_decay(const std::vector<double>& norms) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t m = 0; m < norms.size(); ++m) {
        if (!(norms[m] > 0) || !std::isfinite(norms[m])) continue;
        const double x = static_cast<double>(m), y = std::log(norms[m]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return std::exp(slope);
}

BoundStateCheck verify_bound_state(const BoundStateCandidate& candidate, const HalfTubeConfig& config) {
    config.validate();
    const TubeParams& p = config.params;
    const int rings = p.rings();
    const int g = config.aux.vertex_count();
    const double lambda = candidate.lambda;
    const ChannelBasis basis = channel_basis(lambda, p, config.potential);
    if (candidate.outgoing.size() != rings || candidate.aux_values.size() != g)
        throw ParameterError("candidate coefficients do not match the configuration");

    BoundStateCheck chk;
    double coef_max = 0.0;
    for (int j = 0; j < rings; ++j)
        coef_max = std::max(coef_max, std::abs(candidate.outgoing(j) * basis.channels[static_cast<std::size_t>(j)].outgoing_scale));
    for (int j = 0; j < rings; ++j) {
        const Channel& ch = basis.channels[static_cast<std::size_t>(j)];
        if (std::abs(candidate.outgoing(j) * ch.outgoing_scale) > 1e-8 * coef_max)
            chk.expected_decay = std::max(chk.expected_decay, std::abs(ch.outgoing.z1));
    }

    const int cols = kVerifyColumns + 1;  // vertex values on columns 0..20
    auto idx = [rings](const VertexId& v) { return static_cast<std::size_t>(v.column * rings + v.ring); };
    std::vector<cplx> u(static_cast<std::size_t>(cols * rings), 0.0);
    for (int col = 0; col < cols; ++col)
        for (int n = 0; n < rings; ++n) {
            cplx val = 0.0;
            for (int j = 0; j < rings; ++j) {
                const Channel& ch = basis.channels[static_cast<std::size_t>(j)];
                if (candidate.outgoing(j) == 0.0) continue;
                val += candidate.outgoing(j) * ch.outgoing_scale * ch.outgoing.value_at({col, n}, p);
            }
            u[idx({col, n})] = val;
        }
    double umax = 0.0;
    for (const cplx& x : u) umax = std::max(umax, std::abs(x));
    for (int v = 0; v < g; ++v) umax = std::max(umax, std::abs(candidate.aux_values(v)));

    std::vector<double> norms;
    for (int col = 0; col < cols; ++col) {
        double s = 0.0;
        for (int n = 0; n < rings; ++n) s += std::norm(u[idx({col, n})]);
        norms.push_back(std::sqrt(s));
    }
    chk.decay_ratio = fit_geometric_decay(norms);
    if (umax == 0.0) return chk;

    // Sum of outgoing derivatives per vertex; every tube edge is the right or up edge of exactly one vertex.
    std::vector<cplx> dsum(u.size(), 0.0);
    std::vector<cplx> aux_dsum(static_cast<std::size_t>(g), 0.0);
    const TransferConstants& tc = basis.tc;
    for (int col = 0; col < cols; ++col)
        for (int n = 0; n < rings; ++n) {
            const VertexId v{col, n};
            const Neighbors nb = neighbors(v, p);
            for (const VertexId& w : {nb.right, nb.up}) {
                if (w.column < 0 || w.column >= cols) continue;
                const auto [dv, dw] = edge_outgoing_derivatives(u[idx(v)], u[idx(w)], tc);
                dsum[idx(v)] += dv;
                dsum[idx(w)] += dw;
            }
        }
    for (const auto& e : config.aux.internal_edges) {
        const TransferConstants etc = transfer_constants(lambda, e.potential, e.length);
        const auto [d0, d1] = edge_outgoing_derivatives(candidate.aux_values(e.from), candidate.aux_values(e.to), etc);
        aux_dsum[static_cast<std::size_t>(e.from)] += d0;
        aux_dsum[static_cast<std::size_t>(e.to)] += d1;
    }
    for (const auto& e : config.aux.attachment_edges) {
        const TransferConstants etc = transfer_constants(lambda, e.potential, e.length);
        const auto [d0, d1] = edge_outgoing_derivatives(candidate.aux_values(e.from), u[idx({0, e.ring})], etc);
        aux_dsum[static_cast<std::size_t>(e.from)] += d0;
        dsum[idx({0, e.ring})] += d1;
    }

    double worst = 0.0;
    for (int col = 0; col < kVerifyColumns; ++col)
        for (int n = 0; n < rings; ++n) {
            const VertexId v{col, n};
            cplx r = dsum[idx(v)];
            if (col == 0) {
                const RobinPair& rb = config.boundary_robin[static_cast<std::size_t>(n)];
                r = rb.a * u[idx(v)] + rb.b * r;
            }
            worst = std::max(worst, std::abs(r));
        }
    for (int v = 0; v < g; ++v) {
        const RobinPair& rb = config.aux.vertex_robin[static_cast<std::size_t>(v)];
        worst = std::max(worst, std::abs(rb.a * candidate.aux_values(v) + rb.b * aux_dsum[static_cast<std::size_t>(v)]));
    }
    chk.residual = worst / umax;
    return chk;
}

}  // namespace qgtube

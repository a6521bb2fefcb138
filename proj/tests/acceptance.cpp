// Acceptance checks, one line per criterion. Exit status is nonzero if any fails.
#include "qgtube/bands.hpp"
#include "qgtube/halftube.hpp"
#include "qgtube/io.hpp"
#include "qgtube/oracle.hpp"
#include "qgtube/propagator.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

using namespace qgtube;

namespace {

const EdgePotential kZero = EdgePotential::zero();

struct Outcome {
    bool pass = true;
    std::ostringstream note;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            note << " [fail: " << what << "]";
        }
    }
};

std::vector<TubeParams> panels() { return {make_params(2, 5, 1), make_params(3, 5, 2)}; }

double distance_to(double x, const std::vector<double>& pts) {
    double d = 1e300;
    for (double p : pts) d = std::min(d, std::abs(p - x));
    return d;
}

// 100 energies in [-5, 40] away from sigma_D and band edges
std::vector<double> random_lambdas(const TubeParams& p, std::uint64_t seed) {
    std::vector<double> avoid = dirichlet_spectrum(kZero, -5, 40);
    const auto edges = band_edges(-5, 40, p, kZero);
    avoid.insert(avoid.end(), edges.begin(), edges.end());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-5, 40);
    std::vector<double> out;
    while (out.size() < 100) {
        const double l = u(rng);
        if (distance_to(l, avoid) > 1e-4) out.push_back(l);
    }
    return out;
}

Outcome criterion1() {
    Outcome o;
    double worst = 0;
    for (const auto& p : panels()) {
        for (double l : random_lambdas(p, 2024 + p.alpha)) {
            const auto tc = transfer_constants(l, kZero);
            const auto ms = mode_set(l, p, tc);
            if (ms.band_edge) continue;
            worst = std::max(worst, propagator_dispersion_mismatch(build_propagator(l, p, tc), ms));
        }
    }
    o.require(worst <= 1e-8, "mismatch");
    o.note << "max eigenvalue mismatch " << worst;
    return o;
}

Outcome criterion2() {
    Outcome o;
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    double symp = 0, inv = 0;
    bool signature = true;
    for (const auto& p : panels()) {
        const int R = p.rings();
        for (double l : {-2.5, 3.7006, 12.3, 25.0, 39.9}) {
            const auto b = build_propagator(l, p, transfer_constants(l, kZero));
            signature = signature && hermitian_signature(b.J) == std::pair{R, R};
            symp = std::max(symp, (b.P.adjoint() * b.J * b.P - b.J).cwiseAbs().maxCoeff());
            for (int t = 0; t < 100; ++t) {
                Eigen::VectorXcd x(2 * R);
                for (int i = 0; i < 2 * R; ++i) x(i) = cplx(g(rng), g(rng));
                const double f0 = flux(x, x, b).real();
                const double f1 = flux(propagate(x, 1, b), propagate(x, 1, b), b).real();
                inv = std::max(inv, std::abs(f1 - f0) / std::max(1.0, std::abs(f0)));
            }
        }
    }
    o.require(signature, "signature");
    o.require(symp <= 1e-9, "P^H J P");
    o.require(inv <= 1e-9, "invariance");
    o.note << "signature (R,R) " << (signature ? "ok" : "bad") << ", |P^H J P - J| " << symp << ", flux drift " << inv;
    return o;
}

Outcome criterion3() {
    Outcome o;
    double sym = 0;
    for (const auto& p : panels()) {
        std::size_t total = 0;
        for (int ell = 0; ell < p.delta; ++ell) {
            const auto segs = monotonic_segments(ell, p);
            o.require(segs.size() == static_cast<std::size_t>(2 * p.beta), "segments per sector");
            total += segs.size();
        }
        o.require(total == static_cast<std::size_t>(2 * p.beta * p.delta), "total segments");
        for (double l : {-1.0, 3.7006, 12.3, 25.0}) {
            const auto ms = mode_set(l, p, transfer_constants(l, kZero));
            for (std::size_t i = 0; i < ms.modes.size(); ++i)
                for (std::size_t j = i + 1; j < ms.modes.size(); ++j)
                    o.require(std::abs(ms.modes[i].z1 - ms.modes[j].z1) + std::abs(ms.modes[i].z2 - ms.modes[j].z2) > 1e-9,
                              "disjointness");
            for (int ell = 0; ell < p.delta; ++ell) {
                std::vector<cplx> a, b;
                for (const auto& m : ms.modes) {
                    if (m.ell == ell) a.push_back(std::conj(m.z1) + 10.0 * std::conj(m.z2));
                    if (m.ell == (p.delta - ell) % p.delta) b.push_back(m.z1 + 10.0 * m.z2);
                }
                sym = std::max(sym, multiset_mismatch(a, b));
            }
        }
    }
    o.require(sym <= 1e-9, "conjugation symmetry");
    o.note << "2*beta segments per sector, conjugation mismatch " << sym;
    return o;
}

Outcome criterion4() {
    Outcome o;
    int worst_agree = 500;
    double curve_err = 0;
    for (const auto& p : panels()) {
        const auto bands = spectrum_bands(0.1, 40, p, kZero);
        const auto edges = band_edges(0.1, 40, p, kZero);
        int agree = 0;
        for (int i = 0; i < 500; ++i) {
            const double l = 0.1 + (40 - 0.1) * i / 499.0;
            bool inside = false;
            for (const auto& b : bands) inside = inside || (l >= b.lambda_lo && l <= b.lambda_hi);
            const bool ok = inside == in_spectrum(l, p, kZero).in_spectrum;
            agree += ok;
            if (!ok) o.require(distance_to(l, edges) <= 1e-4, "disagreement away from a band edge");
        }
        worst_agree = std::min(worst_agree, agree);

        // band diagram panel: every curve point solves 2c(l) = g_ell(k) and sits in a band
        const auto curves = band_diagram(-5, 40, 400, p, kZero);
        std::vector<int> seen(static_cast<std::size_t>(p.delta), 0);
        for (const auto& c : curves) {
            for (const auto& [k, l] : c.points) {
                if (!std::isfinite(l)) continue;
                ++seen[static_cast<std::size_t>(c.ell)];
                curve_err = std::max(curve_err, std::abs(2 * transfer_constants(l, kZero).c - band_function(k, c.ell, p)));
            }
        }
        for (int s : seen) o.require(s > 0, "empty sector in band diagram");
        const std::string name = "bands_" + std::to_string(p.alpha) + "_" + std::to_string(p.beta) + "_" +
                                 std::to_string(p.delta) + ".svg";
        std::ofstream svg(name);
        write_band_svg(svg, curves, spectrum_bands(-5, 40, p, kZero), -5, 40, p);
    }
    o.require(worst_agree >= 499, "agreement");
    o.require(curve_err <= 1e-8, "curve data");
    o.note << "agreement " << worst_agree << "/500, curve residual " << curve_err;
    return o;
}

struct DesignCase {
    BoundCase which;
    int alpha, beta;
    double lambda;
    bool embedded;
};

Outcome criterion5() {
    Outcome o;
    double res = 0, decay = 0, fd = 0, rmin = 1e300, rmax = 0;
    for (const auto& c : {DesignCase{BoundCase::A, 2, 5, -1.0, false}, DesignCase{BoundCase::B, 1, 2, -1.0, false},
                          DesignCase{BoundCase::C, 1, 2, 1.0, true}, DesignCase{BoundCase::D, 2, 5, 4.84, true}}) {
        const auto p = make_params(c.alpha, c.beta, 1);
        const auto d = design_robin(c.which, c.lambda, p);
        const auto cand = candidate_from_design(d);
        const auto chk = verify_bound_state(cand, d.config);
        res = std::max(res, chk.residual);
        decay = std::max(decay, std::abs(chk.decay_ratio - std::abs(d.z1)));
        o.require(cand.embedded == c.embedded, "embedded flag, case " + to_string(c.which));

        double err[2];
        for (int i = 0; i < 2; ++i) {
            const auto m = build_model(d.config, 40, i == 0 ? 20 : 40);
            const auto pairs = eigs_near(m, c.lambda, 12);
            const auto match = match_by_decay(m, pairs, std::abs(d.z1));
            err[i] = std::abs(match.lambda - c.lambda);
        }
        fd = std::max(fd, err[1]);
        rmin = std::min(rmin, err[0] / err[1]);
        rmax = std::max(rmax, err[0] / err[1]);
    }
    o.require(res <= 1e-10, "vertex residual");
    o.require(decay <= 1e-8, "decay ratio");
    o.require(fd <= 1e-2, "oracle eigenvalue");
    o.require(rmin >= 3.5 && rmax <= 4.5, "convergence ratio");
    o.note << "residual " << res << ", decay error " << decay << ", oracle error " << fd << ", ratio [" << rmin << ", "
           << rmax << "]";
    return o;
}

Outcome criterion6() {
    Outcome o;
    double fl = 0, un = 0;
    int tested = 0;
    std::vector<HalfTubeConfig> configs;
    for (const auto& p : panels()) configs.push_back(neumann_config(p));
    configs.push_back(design_robin(BoundCase::A, -1.0, make_params(2, 5, 1)).config);
    const auto edges = band_edges(0.5, 40, configs[0].params, kZero);
    const auto sd = dirichlet_spectrum(kZero, 0.5, 40);
    for (int i = 0; tested < 20 && i < 400; ++i) {
        const double l = 0.5 + 39.5 * (i + 0.37) / 400;
        if (distance_to(l, edges) < 1e-3 || distance_to(l, sd) < 1e-3) continue;
        if (!in_spectrum(l, configs[0].params, kZero).in_spectrum) continue;
        if (i % 7 != 0) continue;
        ++tested;
        for (const auto& cfg : configs) {
            if (mode_set(l, cfg.params, transfer_constants(l, kZero)).band_edge) continue;
            const auto r = scattering_matrix(l, cfg);
            fl = std::max(fl, r.flux_residual);
            un = std::max(un, r.unitarity_residual);
        }
    }
    o.require(tested == 20, "20 in-band energies");
    o.require(fl <= 1e-9, "flux residual");
    o.require(un <= 1e-8, "unitarity");
    o.note << tested << " energies, flux residual " << fl << ", unitarity " << un;
    return o;
}

Outcome criterion7() {
    Outcome o;
    double smallest = 1e300;
    long roots = 0;
    for (const auto& p : panels())
        for (double l : random_lambdas(p, 2024 + p.alpha)) {
            const auto tc = transfer_constants(l, kZero);
            for (int ell = 0; ell < p.delta; ++ell) {
                const cplx eta = sector_twist(ell, p);
                for (const auto& r : laurent_roots(l, ell, p, tc)) {
                    if (std::abs(std::abs(r.z) - 1) <= 1e-6) continue;
                    ++roots;
                    smallest = std::min(smallest, std::abs(laurent_log_derivative(r.z, eta, p) / r.z));
                }
            }
        }
    o.require(smallest > 1e-8, "simple roots");
    o.note << roots << " off-circle roots, min |f'| " << smallest;
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::function<Outcome()>, double>> checks = {
        {criterion1, 10}, {criterion2, 1e9}, {criterion3, 1e9}, {criterion4, 30},
        {criterion5, 60}, {criterion6, 1e9}, {criterion7, 1e9}};
    int failed = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = checks[i].first();
        } catch (const std::exception& e) {
            o.pass = false;
            o.note << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > checks[i].second) o.require(false, "runtime");
        std::printf("criterion %zu: %s  %s  (%.2f s)\n", i + 1, o.pass ? "PASS" : "FAIL", o.note.str().c_str(), secs);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}

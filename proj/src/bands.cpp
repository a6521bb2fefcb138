#include "qgtube/bands.hpp"

#include "qgtube/dispersion.hpp"
#include "qgtube/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace qgtube {

namespace {

constexpr double kPi = std::numbers::pi;

double two_c(double lambda, const EdgePotential& q) { return 2.0 * transfer_constants(lambda, q).c; }

// Bisection down to adjacent doubles for f(lo), f(hi) of opposite sign (or zero).
template <class F>
double bisect(F&& f, double lo, double hi) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    if (f(hi) == 0.0) return hi;
    while (true) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Golden-section search for an extremum of f on [a, b]; sign = +1 for a maximum.
template <class F>
double golden_extremum(F&& f, double a, double b, double sign) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = sign * f(x1), f2 = sign * f(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = sign * f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = sign * f(x2);
        }
    }
    return 0.5 * (a + b);
}

// Interior extrema of 2c(lambda) on (lo, hi).
std::vector<double> energy_turning_points(double lo, double hi, const EdgePotential& q) {
    std::vector<double> pts;
    if (q.is_zero()) {
        for (int k = 1; k * k * kPi * kPi < hi; ++k) {
            const double l = k * k * kPi * kPi;
            if (l > lo) pts.push_back(l);
        }
        return pts;
    }
    // Turning points of c(lambda, 1) are separated by roughly (2k+1) pi^2.
    const double step = 0.1;
    const long n = std::max(4L, static_cast<long>(std::ceil((hi - lo) / step)));
    std::vector<double> xs(static_cast<std::size_t>(n) + 1), ys(xs.size());
    for (long i = 0; i <= n; ++i) {
        xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        ys[static_cast<std::size_t>(i)] = two_c(xs[static_cast<std::size_t>(i)], q);
    }
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
        const double d0 = ys[i] - ys[i - 1], d1 = ys[i + 1] - ys[i];
        if ((d0 > 0 && d1 <= 0) || (d0 < 0 && d1 >= 0)) {
            const double sign = d0 > 0 ? 1.0 : -1.0;
            pts.push_back(golden_extremum([&](double l) { return two_c(l, q); }, xs[i - 1], xs[i + 1], sign));
        }
    }
    return pts;
}

double wrap_two_pi(double x) {
    double r = std::fmod(x, 2.0 * kPi);
    if (r < 0) r += 2.0 * kPi;
    if (r >= 2.0 * kPi) r -= 2.0 * kPi;
    return r;
}

}  // namespace

double band_function(double k, int ell, const TubeParams& p) {
    const double phi = 2.0 * kPi * ell / static_cast<double>(p.rings());
    return std::cos(p.beta * k) + std::cos(p.alpha * k - phi);
}

double band_function_derivative(double k, int ell, const TubeParams& p) {
    const double phi = 2.0 * kPi * ell / static_cast<double>(p.rings());
    return -p.beta * std::sin(p.beta * k) - p.alpha * std::sin(p.alpha * k - phi);
}

std::vector<MonotonicSegment> monotonic_segments(int ell, const TubeParams& p) {
    auto dg = [&](double k) { return band_function_derivative(k, ell, p); };
    const int n = kCriticalSeedGrid;
    const double h = 2.0 * kPi / n;
    std::vector<double> crit;
    double ka = -kPi + 0.5 * h;
    double fa = dg(ka);
    for (int i = 1; i <= n; ++i) {
        const double kb = -kPi + (i + 0.5) * h;
        const double fb = dg(kb);
        if ((fa < 0) != (fb < 0) || fb == 0.0) {
            double k = bisect(dg, ka, kb);
            if (k <= -kPi) k += 2.0 * kPi;
            if (k > kPi) k -= 2.0 * kPi;
            crit.push_back(k);
        }
        ka = kb;
        fa = fb;
    }
    std::sort(crit.begin(), crit.end());
    crit.erase(std::unique(crit.begin(), crit.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               crit.end());
    if (static_cast<int>(crit.size()) != 2 * p.beta) {
        std::ostringstream os;
        os << "sector " << ell << " has " << crit.size() << " critical points, expected " << 2 * p.beta;
        throw ConsistencyError(os.str());
    }
    std::vector<MonotonicSegment> segs;
    for (std::size_t i = 0; i < crit.size(); ++i) {
        const double a = crit[i];
        const double b = (i + 1 < crit.size()) ? crit[i + 1] : crit[0] + 2.0 * kPi;
        const double ga = band_function(a, ell, p), gb = band_function(b, ell, p);
        segs.push_back({a, b, std::min(ga, gb), std::max(ga, gb)});
    }
    return segs;
}

std::vector<EnergyBranch> energy_branches(double lo, double hi, const EdgePotential& potential) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi)) throw ParameterError("window must be a bounded interval");
    std::vector<double> cuts{lo};
    for (double t : energy_turning_points(lo, hi, potential)) cuts.push_back(t);
    cuts.push_back(hi);
    std::vector<EnergyBranch> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (!(cuts[i] < cuts[i + 1])) continue;
        out.push_back({cuts[i], cuts[i + 1], two_c(cuts[i], potential), two_c(cuts[i + 1], potential)});
    }
    return out;
}

namespace {

// lambda on the branch where 2c(lambda) = value; value must lie in the branch range.
double solve_on_branch(const EnergyBranch& br, double value, const EdgePotential& q) {
    if (value == br.two_c_lo) return br.lambda_lo;
    if (value == br.two_c_hi) return br.lambda_hi;
    return bisect([&](double l) { return two_c(l, q) - value; }, br.lambda_lo, br.lambda_hi);
}

}  // namespace

std::vector<Band> spectrum_bands(double lo, double hi, const TubeParams& p, const EdgePotential& potential) {
    const auto branches = energy_branches(lo, hi, potential);
    std::vector<Band> bands;
    for (int ell = 0; ell < p.delta; ++ell) {
        const auto segs = monotonic_segments(ell, p);
        for (std::size_t si = 0; si < segs.size(); ++si) {
            const MonotonicSegment& seg = segs[si];
            for (const EnergyBranch& br : branches) {
                const double vmin = std::max(seg.g_min, std::min(br.two_c_lo, br.two_c_hi));
                const double vmax = std::min(seg.g_max, std::max(br.two_c_lo, br.two_c_hi));
                if (!(vmin < vmax)) continue;
                const double l1 = solve_on_branch(br, vmin, potential);
                const double l2 = solve_on_branch(br, vmax, potential);
                Band b;
                b.lambda_lo = std::min(l1, l2);
                b.lambda_hi = std::max(l1, l2);
                if (!(b.lambda_lo < b.lambda_hi)) continue;
                b.ell = ell;
                b.segment_index = static_cast<int>(si);
                b.k_lo = seg.k_lo;
                b.k_hi = seg.k_hi;
                bands.push_back(b);
            }
        }
    }
    std::sort(bands.begin(), bands.end(), [](const Band& a, const Band& b) {
        return std::tie(a.ell, a.segment_index, a.lambda_lo) < std::tie(b.ell, b.segment_index, b.lambda_lo);
    });
    return bands;
}

std::vector<double> band_edges(double lo, double hi, const TubeParams& p, const EdgePotential& potential) {
    std::vector<double> values;
    for (int ell = 0; ell < p.delta; ++ell)
        for (const auto& seg : monotonic_segments(ell, p)) {
            values.push_back(seg.g_min);
            values.push_back(seg.g_max);
        }
    std::vector<double> edges;
    for (const EnergyBranch& br : energy_branches(lo, hi, potential)) {
        const double vmin = std::min(br.two_c_lo, br.two_c_hi), vmax = std::max(br.two_c_lo, br.two_c_hi);
        for (double v : values)
            if (v >= vmin && v <= vmax) edges.push_back(solve_on_branch(br, v, potential));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(), [](double a, double b) { return std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(a)); }),
                edges.end());
    return edges;
}

SpectrumMembership in_spectrum(double lambda, const TubeParams& p, const EdgePotential& potential) {
    const ModeSet ms = mode_set(lambda, p, transfer_constants(lambda, potential));
    SpectrumMembership m;
    m.multiplicity = ms.num_propagating_pairs;
    m.band_edge = ms.band_edge;
    m.in_spectrum = m.multiplicity > 0 || ms.band_edge;
    return m;
}

std::vector<DispersionCurvePoint> export_dispersion_data(int grid, const TubeParams& p) {
    if (grid < 2) throw ParameterError("dispersion grid needs at least 2 points");
    std::vector<DispersionCurvePoint> out;
    out.reserve(static_cast<std::size_t>(grid) * static_cast<std::size_t>(p.delta));
    for (int ell = 0; ell < p.delta; ++ell) {
        const double phase = 2.0 * kPi * ell / static_cast<double>(p.rings());
        for (int i = 0; i < grid; ++i) {
            // uniform grid over (-pi, pi]; index grid/2 - 1 lands on k = 0 for even grids
            const double k = (i + 1 == grid) ? kPi : -kPi + 2.0 * kPi * (i + 1) / grid;
            DispersionCurvePoint pt;
            pt.ell = ell;
            pt.k = k;
            pt.g = band_function(k, ell, p);
            pt.k1 = wrap_two_pi(p.beta * k);
            pt.k2 = wrap_two_pi(-p.alpha * k + phase);
            out.push_back(pt);
        }
    }
    return out;
}

std::vector<BandDiagramCurve> band_diagram(double lo, double hi, int grid, const TubeParams& p,
                                           const EdgePotential& potential) {
    const auto branches = energy_branches(lo, hi, potential);
    const auto data = export_dispersion_data(grid, p);
    std::vector<BandDiagramCurve> curves;
    for (int ell = 0; ell < p.delta; ++ell) {
        for (std::size_t bi = 0; bi < branches.size(); ++bi) {
            const EnergyBranch& br = branches[bi];
            const double vmin = std::min(br.two_c_lo, br.two_c_hi), vmax = std::max(br.two_c_lo, br.two_c_hi);
            BandDiagramCurve c;
            c.ell = ell;
            c.branch = static_cast<int>(bi);
            for (const auto& pt : data) {
                if (pt.ell != ell) continue;
                const double l = (pt.g >= vmin && pt.g <= vmax) ? solve_on_branch(br, pt.g, potential)
                                                                : std::numeric_limits<double>::quiet_NaN();
                c.points.emplace_back(pt.k, l);
            }
            curves.push_back(std::move(c));
        }
    }
    return curves;
}

}  // namespace qgtube

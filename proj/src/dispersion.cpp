#include "qgtube/dispersion.hpp"

#include "qgtube/errors.hpp"
#include "qgtube/numeric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qgtube {

namespace {

constexpr int kNewtonIters = 80;

// Parlett-Reinsch balancing by powers of two. Leaves eigenvalues unchanged.
void balance(Eigen::MatrixXcd& a) {
    const Eigen::Index n = a.rows();
    bool converged = false;
    while (!converged) {
        converged = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            double g = r / 2.0;
            while (c < g) {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while (c >= g) {
                f /= 2.0;
                c /= 4.0;
            }
            if ((c + r) / f < 0.95 * s) {
                converged = false;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
}

cplx newton_polish(cplx z, cplx eta, double target, const TubeParams& p) {
    auto g = [&](cplx w) { return laurent_value(w, eta, p) - target; };
    cplx best = z;
    double best_res = std::abs(g(z));
    for (int it = 0; it < kNewtonIters; ++it) {
        const cplx dz = g(z) * z / laurent_log_derivative(z, eta, p);
        if (!std::isfinite(dz.real()) || !std::isfinite(dz.imag())) break;
        z -= dz;
        const double res = std::abs(g(z));
        if (res <= best_res) {
            best_res = res;
            best = z;
        }
        if (std::abs(dz) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(z)) break;
    }
    return best;
}

}  // namespace

std::string_view to_string(ModeClass c) {
    switch (c) {
        case ModeClass::RightProp: return "right_propagating";
        case ModeClass::LeftProp: return "left_propagating";
        case ModeClass::RightEvan: return "right_evanescent";
        case ModeClass::LeftEvan: return "left_evanescent";
        case ModeClass::BandEdge: return "band_edge";
    }
    return "unknown";
}

bool is_rightward(ModeClass c) { return c == ModeClass::RightProp || c == ModeClass::RightEvan; }
bool is_leftward(ModeClass c) { return c == ModeClass::LeftProp || c == ModeClass::LeftEvan; }
bool is_propagating(ModeClass c) { return c == ModeClass::RightProp || c == ModeClass::LeftProp; }

cplx sector_twist(int ell, const TubeParams& p) {
    return unit_phase(-static_cast<double>(ell) / static_cast<double>(p.rings()));
}

cplx laurent_value(cplx z, cplx eta, const TubeParams& p) {
    const cplx zb = ipow(z, p.beta);
    const cplx za = ipow(z, p.alpha);
    return zb + 1.0 / zb + eta * za + 1.0 / (eta * za);
}

cplx laurent_log_derivative(cplx z, cplx eta, const TubeParams& p) {
    const cplx zb = ipow(z, p.beta);
    const cplx za = ipow(z, p.alpha);
    return static_cast<double>(p.beta) * (zb - 1.0 / zb) + static_cast<double>(p.alpha) * (eta * za - 1.0 / (eta * za));
}

std::vector<LaurentRoot> laurent_roots(double lambda, int ell, const TubeParams& p, const TransferConstants& tc) {
    if (is_dirichlet_point(tc)) {
        std::ostringstream os;
        os << "lambda=" << lambda << " is in the edge Dirichlet spectrum";
        throw DirichletSpectrumError(os.str(), lambda);
    }
    const cplx eta = sector_twist(ell, p);
    const int deg = 2 * p.beta;
    // ascending coefficients of the monic polynomial z^beta * (laurent - 4c)
    std::vector<cplx> coef(static_cast<std::size_t>(deg) + 1, cplx(0.0));
    coef[0] = 1.0;
    coef[static_cast<std::size_t>(p.beta - p.alpha)] += 1.0 / eta;
    coef[static_cast<std::size_t>(p.beta)] += -4.0 * tc.c;
    coef[static_cast<std::size_t>(p.beta + p.alpha)] += eta;
    coef[static_cast<std::size_t>(deg)] = 1.0;

    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -coef[static_cast<std::size_t>(i)];
    balance(comp);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    if (es.info() != Eigen::Success) throw ConvergenceError("companion eigensolve failed");

    const double target = 4.0 * tc.c;
    std::vector<cplx> raw(static_cast<std::size_t>(deg));
    for (int i = 0; i < deg; ++i) raw[static_cast<std::size_t>(i)] = newton_polish(es.eigenvalues()(i), eta, target, p);

    // Merge clusters (double roots at band edges).
    const double deriv_scale = 2.0 * static_cast<double>(p.beta) * static_cast<double>(p.beta);
    std::vector<int> owner(raw.size());
    std::iota(owner.begin(), owner.end(), 0);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        for (std::size_t j = i + 1; j < raw.size(); ++j) {
            if (owner[j] != static_cast<int>(j)) continue;
            const double dist = std::abs(raw[i] - raw[j]);
            const bool flat = std::abs(laurent_log_derivative(raw[i], eta, p)) < kClusterTol * deriv_scale &&
                              std::abs(laurent_log_derivative(raw[j], eta, p)) < kClusterTol * deriv_scale;
            if (dist < kClusterTol * std::max(1.0, std::abs(raw[i])) && flat) owner[j] = owner[i];
        }
    }
    std::vector<LaurentRoot> roots;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (owner[i] != static_cast<int>(i)) continue;
        cplx sum = 0.0;
        int count = 0;
        for (std::size_t j = 0; j < raw.size(); ++j) {
            if (owner[j] == static_cast<int>(i)) {
                sum += raw[j];
                ++count;
            }
        }
        roots.push_back({sum / static_cast<double>(count), count});
    }
    std::sort(roots.begin(), roots.end(), [](const LaurentRoot& a, const LaurentRoot& b) {
        const double aa = std::arg(a.z), ab = std::arg(b.z);
        if (aa != ab) return aa < ab;
        return std::abs(a.z) < std::abs(b.z);
    });
    return roots;
}

std::pair<cplx, cplx> floquet_pair(cplx z, int ell, const TubeParams& p) {
    const cplx eta = sector_twist(ell, p);
    return {ipow(z, p.beta), 1.0 / (eta * ipow(z, p.alpha))};
}

cplx FloquetMode::value_at(const VertexId& v, const TubeParams& p) const {
    return ipow(z1, v.column + p.shift(v.ring)) * ipow(z2, v.ring);
}

double mode_self_flux(cplx z, double lambda, int ell, const TubeParams& p, const TransferConstants& tc) {
    if (std::abs(std::abs(z) - 1.0) > kUnitCircleTol) {
        std::ostringstream os;
        os << "self flux requested for |z|=" << std::abs(z) << " off the unit circle at lambda=" << lambda;
        throw ClassificationError(os.str());
    }
    const auto [z1, z2] = floquet_pair(z, ell, p);
    const double ad = static_cast<double>(p.alpha * p.delta);
    const double bd = static_cast<double>(p.beta * p.delta);
    const cplx value = (ad * (1.0 / z2 - z2) + bd * (z1 - 1.0 / z1)) / (cplx(0.0, 2.0) * tc.s);
    if (std::abs(value.imag()) > 1e-9 * std::max(1.0, std::abs(value))) {
        std::ostringstream os;
        os << "self flux has imaginary residue " << value.imag() << " at lambda=" << lambda;
        throw ClassificationError(os.str());
    }
    return value.real();
}

cplx cross_flux(const FloquetMode& a, const FloquetMode& b, const TubeParams& p, const TransferConstants& tc) {
    const int ad = p.alpha * p.delta;
    const int bd = p.beta * p.delta;
    const cplx r1 = std::conj(a.z1) * b.z1;
    const cplx r2 = 1.0 / (std::conj(a.z2) * b.z2);
    auto geometric = [](cplx r, int n) {
        cplx term = 1.0, sum = 0.0;
        for (int j = 1; j <= n; ++j) {
            term *= r;
            sum += term;
        }
        return sum;
    };
    const cplx vertical = (1.0 / b.z2 - 1.0 / std::conj(a.z2)) * geometric(r1, ad);
    const cplx horizontal = (b.z1 - std::conj(a.z1)) * geometric(r2, bd);
    return (vertical + horizontal) / (cplx(0.0, 2.0) * tc.s);
}

ModeSet mode_set(double lambda, const TubeParams& p, const TransferConstants& tc) {
    ModeSet set;
    set.lambda = lambda;
    const double flat_scale = 2.0 * static_cast<double>(p.alpha + p.beta);
    for (int ell = 0; ell < p.delta; ++ell) {
        const cplx eta = sector_twist(ell, p);
        for (const LaurentRoot& root : laurent_roots(lambda, ell, p, tc)) {
            FloquetMode m;
            m.z = root.z;
            std::tie(m.z1, m.z2) = floquet_pair(root.z, ell, p);
            m.ell = ell;
            m.eta = eta;
            m.multiplicity = root.multiplicity;
            const bool on_circle = std::abs(std::abs(m.z1) - 1.0) <= kUnitCircleTol;
            const bool flat = std::abs(laurent_log_derivative(root.z, eta, p)) < kBandEdgeTol * flat_scale;
            if (root.multiplicity > 1 || (on_circle && flat)) {
                m.classification = ModeClass::BandEdge;
                set.band_edge = true;
            } else if (on_circle) {
                m.self_flux = mode_self_flux(root.z, lambda, ell, p, tc);
                m.classification = m.self_flux > 0 ? ModeClass::RightProp : ModeClass::LeftProp;
            } else {
                m.classification = std::abs(m.z1) < 1.0 ? ModeClass::RightEvan : ModeClass::LeftEvan;
            }
            for (int k = 0; k < root.multiplicity; ++k) set.modes.push_back(m);
        }
    }
    set.num_propagating_pairs = static_cast<int>(
        std::count_if(set.modes.begin(), set.modes.end(), [](const FloquetMode& m) { return m.classification == ModeClass::RightProp; }));
    return set;
}

}  // namespace qgtube

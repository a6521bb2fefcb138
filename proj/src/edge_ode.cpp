#include "qgtube/edge_ode.hpp"

#include "qgtube/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qgtube {

namespace {

constexpr double kSeriesThreshold = 1e-6;
constexpr double kRichardsonTol = 1e-12;
constexpr long kMaxSteps = 1L << 22;

using State = std::array<double, 4>;  // (c, c', s, s')

State rk4_step(const State& y, double x, double h, double lambda, const EdgePotential& q, double length) {
    auto rhs = [&](double xx, const State& v) {
        const double w = q.at(xx / length) - lambda;
        return State{v[1], w * v[0], v[3], w * v[2]};
    };
    auto axpy = [](const State& a, double t, const State& b) {
        return State{a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2], a[3] + t * b[3]};
    };
    const State k1 = rhs(x, y);
    const State k2 = rhs(x + h / 2, axpy(y, h / 2, k1));
    const State k3 = rhs(x + h / 2, axpy(y, h / 2, k2));
    const State k4 = rhs(x + h, axpy(y, h, k3));
    State out;
    for (int i = 0; i < 4; ++i) out[i] = y[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return out;
}

template <class Visit>
State integrate(double lambda, const EdgePotential& q, double length, long steps, Visit&& visit) {
    State y{1.0, 0.0, 0.0, 1.0};
    const double h = length / static_cast<double>(steps);
    visit(0L, y);
    for (long i = 0; i < steps; ++i) {
        y = rk4_step(y, h * static_cast<double>(i), h, lambda, q, length);
        visit(i + 1, y);
    }
    return y;
}

// Steps per sample interval so that h * sqrt(|lambda - q|) starts around 0.05.
long initial_steps(double lambda, const EdgePotential& q, double length) {
    const long intervals = static_cast<long>(q.samples().size()) - 1;
    const double freq = std::sqrt(std::abs(lambda) + q.bound() + 1.0) * length;
    const long wanted = std::max(intervals, static_cast<long>(std::ceil(freq / 0.05)));
    return intervals * ((wanted + intervals - 1) / intervals);
}

TransferConstants closed_form(double lambda, double length) {
    TransferConstants tc;
    tc.lambda = lambda;
    tc.length = length;
    const double x2 = lambda * length * length;
    if (std::abs(x2) < kSeriesThreshold) {
        // Taylor branch: c = sum (-x2)^k / (2k)!, s = L sum (-x2)^k / (2k+1)!
        tc.c = 1.0 - x2 / 2.0 + x2 * x2 / 24.0;
        tc.s = length * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
        tc.c_prime = -lambda * length * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
        tc.s_prime = tc.c;
        return tc;
    }
    if (lambda > 0) {
        const double k = std::sqrt(lambda);
        tc.c = std::cos(k * length);
        tc.s = std::sin(k * length) / k;
        tc.c_prime = -k * std::sin(k * length);
        tc.s_prime = tc.c;
    } else {
        const double k = std::sqrt(-lambda);
        tc.c = std::cosh(k * length);
        tc.s = std::sinh(k * length) / k;
        tc.c_prime = k * std::sinh(k * length);
        tc.s_prime = tc.c;
    }
    return tc;
}

double state_scale(const State& y) {
    double m = 1.0;
    for (double v : y) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

EdgePotential EdgePotential::sampled(std::vector<double> values, double bound) {
    if (values.size() < kMinSamples) {
        std::ostringstream os;
        os << "sampled potential needs at least " << kMinSamples << " samples, got " << values.size();
        throw ValidationError(os.str());
    }
    if (!(bound > 0)) throw ValidationError("potential bound must be positive");
    double qmax = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError("potential sample is not finite");
        if (std::abs(v) >= bound) throw ValidationError("potential sample exceeds bound");
        qmax = std::max(qmax, std::abs(v));
    }
    const double tol = kSymmetryTol * std::max(1.0, qmax);
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
        if (std::abs(values[i] - values[n - 1 - i]) > tol)
            throw ValidationError("potential is not symmetric about the edge midpoint");
    }
    EdgePotential p;
    p.kind_ = Kind::Sampled;
    p.samples_ = std::move(values);
    p.bound_ = bound;
    return p;
}

double EdgePotential::at(double t) const {
    if (kind_ == Kind::Zero) return 0.0;
    const double pos = std::clamp(t, 0.0, 1.0) * static_cast<double>(samples_.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(pos), samples_.size() - 2);
    const double f = pos - static_cast<double>(i);
    return samples_[i] * (1.0 - f) + samples_[i + 1] * f;
}

TransferConstants transfer_constants(double lambda, const EdgePotential& potential, double length) {
    if (!(length > 0)) throw ParameterError("edge length must be positive");
    if (potential.is_zero()) return closed_form(lambda, length);

    long steps = initial_steps(lambda, potential, length);
    State coarse = integrate(lambda, potential, length, steps, [](long, const State&) {});
    while (true) {
        const State fine = integrate(lambda, potential, length, 2 * steps, [](long, const State&) {});
        double err = 0.0;
        for (int i = 0; i < 4; ++i) err = std::max(err, std::abs(fine[i] - coarse[i]) / 15.0);
        if (err <= kRichardsonTol * state_scale(fine)) {
            TransferConstants tc;
            tc.lambda = lambda;
            tc.length = length;
            State best;
            for (int i = 0; i < 4; ++i) best[i] = fine[i] + (fine[i] - coarse[i]) / 15.0;
            tc.c = best[0];
            tc.c_prime = best[1];
            tc.s = best[2];
            tc.s_prime = best[3];
            return tc;
        }
        steps *= 2;
        if (steps > kMaxSteps) {
            std::ostringstream os;
            os << "edge integration did not reach tolerance at lambda=" << lambda << " (estimate " << err << ")";
            throw AccuracyError(os.str());
        }
        coarse = fine;
    }
}

bool is_dirichlet_point(const TransferConstants& tc) {
    const double scale = std::max({1.0, std::abs(tc.c), std::abs(tc.s_prime)}) * tc.length;
    return std::abs(tc.s) <= 1e-12 * scale;
}

std::vector<double> dirichlet_spectrum(const EdgePotential& potential, double lo, double hi, double length) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || lo > hi) throw ParameterError("window must be a bounded interval");
    auto s_at = [&](double l) { return transfer_constants(l, potential, length).s; };

    // Consecutive Dirichlet eigenvalues are separated by at least ~3 pi^2 / L^2 - 2C,
    // so this sampling cannot step over a pair of sign changes.
    const double sep = 3.0 * M_PI * M_PI / (length * length) - 2.0 * potential.bound();
    const double step = std::min(0.5, std::max(sep, 1.0) / 8.0);
    const long n = std::max(1L, static_cast<long>(std::ceil((hi - lo) / step)));

    std::vector<double> roots;
    double a = lo;
    double fa = s_at(a);
    if (fa == 0.0) roots.push_back(a);
    for (long i = 1; i <= n; ++i) {
        const double b = (i == n) ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        const double fb = s_at(b);
        if (fb == 0.0) {
            roots.push_back(b);
        } else if (fa != 0.0 && (fa < 0) != (fb < 0)) {
            double x0 = a, x1 = b, f0 = fa;
            // Bisect down to adjacent doubles.
            while (true) {
                const double m = 0.5 * (x0 + x1);
                if (m <= x0 || m >= x1) break;
                const double fm = s_at(m);
                if (fm == 0.0) {
                    x0 = x1 = m;
                    break;
                }
                if ((fm < 0) == (f0 < 0)) {
                    x0 = m;
                    f0 = fm;
                } else {
                    x1 = m;
                }
            }
            roots.push_back(0.5 * (x0 + x1));
        }
        a = b;
        fa = fb;
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

std::vector<cplx> reconstruct_edge(cplx u0, cplx u1, double lambda, const EdgePotential& potential, int grid,
                                   double length) {
    if (grid < 1) throw ParameterError("grid must be positive");
    const TransferConstants tc = transfer_constants(lambda, potential, length);
    if (is_dirichlet_point(tc)) {
        std::ostringstream os;
        os << "lambda=" << lambda << " is a Dirichlet eigenvalue of the edge";
        throw SingularEdgeError(os.str());
    }
    const cplx slope = (u1 - tc.c * u0) / tc.s;
    std::vector<cplx> out(static_cast<std::size_t>(grid) + 1);

    if (potential.is_zero()) {
        for (int i = 0; i <= grid; ++i) {
            const double x = length * static_cast<double>(i) / grid;
            const TransferConstants at = closed_form(lambda, x);
            out[static_cast<std::size_t>(i)] = u0 * at.c + slope * at.s;
        }
    } else {
        const long intervals = static_cast<long>(potential.samples().size()) - 1;
        const long base = std::lcm(intervals, static_cast<long>(grid));
        const long wanted = initial_steps(lambda, potential, length) * 4;
        const long steps = base * std::max(1L, (wanted + base - 1) / base);
        const long stride = steps / grid;
        integrate(lambda, potential, length, steps, [&](long i, const State& y) {
            if (i % stride == 0) out[static_cast<std::size_t>(i / stride)] = u0 * y[0] + slope * y[2];
        });
    }
    out.front() = u0;
    out.back() = u1;
    return out;
}

std::pair<cplx, cplx> edge_outgoing_derivatives(cplx u0, cplx u1, const TransferConstants& tc) {
    const cplx slope = (u1 - tc.c * u0) / tc.s;
    const cplx d_end = u0 * tc.c_prime + slope * tc.s_prime;
    return {slope, -d_end};
}

}  // namespace qgtube

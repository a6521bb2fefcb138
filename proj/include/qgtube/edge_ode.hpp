#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace qgtube {

using cplx = std::complex<double>;

/// Symmetric bounded potential q on an edge [0, L].
///
/// A Sampled potential is given on a uniform grid including both endpoints
/// and is interpolated linearly between samples.
class EdgePotential {
public:
    enum class Kind { Zero, Sampled };

    static constexpr std::size_t kMinSamples = 16;
    static constexpr double kSymmetryTol = 1e-9;

    EdgePotential() = default;
    static EdgePotential zero() { return {}; }
    /// Throws ValidationError unless the samples are symmetric and |q| < bound.
    static EdgePotential sampled(std::vector<double> values, double bound);

    Kind kind() const noexcept { return kind_; }
    bool is_zero() const noexcept { return kind_ == Kind::Zero; }
    const std::vector<double>& samples() const noexcept { return samples_; }
    double bound() const noexcept { return bound_; }

    /// q at relative position t = x/L in [0, 1].
    double at(double t) const;

private:
    Kind kind_ = Kind::Zero;
    std::vector<double> samples_;
    double bound_ = 1.0;
};

/// Values at x = L of the fundamental solutions of -u'' + q u = lambda u:
/// c has (c, c') = (1, 0) at x = 0 and s has (s, s') = (0, 1).
struct TransferConstants {
    double lambda = 0.0;
    double length = 1.0;
    double c = 1.0;
    double s = 1.0;
    double c_prime = 0.0;
    double s_prime = 1.0;

    /// c * s' - c' * s, identically 1 for exact solutions.
    double wronskian() const { return c * s_prime - c_prime * s; }
};

TransferConstants transfer_constants(double lambda, const EdgePotential& potential, double length = 1.0);

/// True when s(lambda, L) vanishes to working precision.
bool is_dirichlet_point(const TransferConstants& tc);

/// All Dirichlet eigenvalues of the edge inside [lo, hi], ascending.
std::vector<double> dirichlet_spectrum(const EdgePotential& potential, double lo, double hi,
                                       double length = 1.0);

/// Samples of the edge solution with u(0) = u0, u(L) = u1 at grid + 1 equally
/// spaced points. Throws SingularEdgeError at a Dirichlet point.
std::vector<cplx> reconstruct_edge(cplx u0, cplx u1, double lambda, const EdgePotential& potential,
                                   int grid, double length = 1.0);

/// Derivatives of the same solution at both endpoints, each directed into the
/// edge (away from its vertex). Evaluated through c' and s' at the far end, so it
/// is an independent route from the (u1 - c u0) / s relation.
std::pair<cplx, cplx> edge_outgoing_derivatives(cplx u0, cplx u1, const TransferConstants& tc);

}  // namespace qgtube

#pragma once

#include "qgtube/edge_ode.hpp"
#include "qgtube/lattice.hpp"

#include <utility>
#include <vector>

namespace qgtube {

/// Number of grid points per sector used to seed critical points of g_ell.
inline constexpr int kCriticalSeedGrid = 4096;

/// g_ell(k) = cos(beta k) + cos(alpha k - 2 pi ell / (beta delta)).
double band_function(double k, int ell, const TubeParams& p);
double band_function_derivative(double k, int ell, const TubeParams& p);

struct MonotonicSegment {
    double k_lo = 0.0;
    double k_hi = 0.0;  // may exceed pi when the segment wraps past the period end
    double g_min = 0.0;
    double g_max = 0.0;
};

/// The 2*beta monotonic pieces of g_ell over one period, starting at the first
/// critical point in (-pi, pi]. Throws ConsistencyError if the count is not 2*beta.
std::vector<MonotonicSegment> monotonic_segments(int ell, const TubeParams& p);

struct Band {
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    int ell = 0;
    int segment_index = 0;
    double k_lo = 0.0;
    double k_hi = 0.0;
};

/// A maximal lambda-interval on which 2c(lambda, 1) is monotone.
struct EnergyBranch {
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    double two_c_lo = 0.0;  // 2c at lambda_lo
    double two_c_hi = 0.0;  // 2c at lambda_hi
};

/// Monotone branches of 2c(lambda, 1) inside [lo, hi].
std::vector<EnergyBranch> energy_branches(double lo, double hi, const EdgePotential& potential);

/// Bands of the full tube in [lo, hi], one record per (segment, energy branch) pair.
/// Bands are closed; overlapping bands are not merged.
std::vector<Band> spectrum_bands(double lo, double hi, const TubeParams& p, const EdgePotential& potential);

/// Band edges inside [lo, hi]: lambda where 2c(lambda) equals a critical value of some g_ell.
std::vector<double> band_edges(double lo, double hi, const TubeParams& p, const EdgePotential& potential);

struct SpectrumMembership {
    bool in_spectrum = false;
    int multiplicity = 0;  // number of rightward propagating modes
    bool band_edge = false;
};

/// Throws DirichletSpectrumError at lambda in sigma_D.
SpectrumMembership in_spectrum(double lambda, const TubeParams& p, const EdgePotential& potential);

struct DispersionCurvePoint {
    int ell = 0;
    double k = 0.0;
    double g = 0.0;
    double k1 = 0.0;  // beta k mod 2 pi
    double k2 = 0.0;  // -alpha k + 2 pi ell / (beta delta) mod 2 pi
};

/// Per-sector curves (k, g_ell(k)) and their torus-line parameterization on a
/// uniform k-grid of `grid` points over (-pi, pi].
std::vector<DispersionCurvePoint> export_dispersion_data(int grid, const TubeParams& p);

/// Band-diagram curve: for every energy branch, lambda(k) solving 2c(lambda) = g_ell(k).
struct BandDiagramCurve {
    int ell = 0;
    int branch = 0;
    std::vector<std::pair<double, double>> points;  // (k, lambda); gaps where no solution
};

std::vector<BandDiagramCurve> band_diagram(double lo, double hi, int grid, const TubeParams& p,
                                           const EdgePotential& potential);

}  // namespace qgtube

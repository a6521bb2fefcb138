#pragma once

#include "qgtube/edge_ode.hpp"
#include "qgtube/lattice.hpp"

#include <string_view>
#include <utility>
#include <vector>

namespace qgtube {

/// |z1| is on the unit circle iff | |z1| - 1 | <= kUnitCircleTol.
inline constexpr double kUnitCircleTol = 1e-8;
/// Roots closer than this with small derivative are merged into a double root.
inline constexpr double kClusterTol = 1e-6;
/// Normalized |z f'(z)| below this on the unit circle marks a band edge.
inline constexpr double kBandEdgeTol = 1e-6;

enum class ModeClass { RightProp, LeftProp, RightEvan, LeftEvan, BandEdge };

std::string_view to_string(ModeClass c);
bool is_rightward(ModeClass c);
bool is_leftward(ModeClass c);
bool is_propagating(ModeClass c);

/// eta = exp(-2 pi i ell / (beta delta)), the sector twist.
cplx sector_twist(int ell, const TubeParams& p);

/// Laurent form z^b + z^-b + eta z^a + eta^-1 z^-a of the reduced dispersion relation.
cplx laurent_value(cplx z, cplx eta, const TubeParams& p);
/// z times the derivative of laurent_value.
cplx laurent_log_derivative(cplx z, cplx eta, const TubeParams& p);

struct LaurentRoot {
    cplx z;
    int multiplicity = 1;
};

/// The 2*beta roots (with multiplicity) of
///   z^{2b} + eta z^{b+a} - 4c z^b + eta^-1 z^{b-a} + 1 = 0.
/// Throws DirichletSpectrumError when s(lambda, 1) = 0.
std::vector<LaurentRoot> laurent_roots(double lambda, int ell, const TubeParams& p, const TransferConstants& tc);

/// (z1, z2) = (z^beta, eta^-1 z^-alpha).
std::pair<cplx, cplx> floquet_pair(cplx z, int ell, const TubeParams& p);

struct FloquetMode {
    cplx z;
    cplx z1;
    cplx z2;
    int ell = 0;
    cplx eta;
    ModeClass classification = ModeClass::RightEvan;
    double self_flux = 0.0;  // zero for evanescent modes
    int multiplicity = 1;

    /// Mode value at a tube vertex for the normalization u(v_0) = 1.
    cplx value_at(const VertexId& v, const TubeParams& p) const;
};

struct ModeSet {
    double lambda = 0.0;
    std::vector<FloquetMode> modes;
    int num_propagating_pairs = 0;
    bool band_edge = false;
};

/// Flux [u, u] of a unit-circle mode normalized to u(v_0) = 1.
/// Throws ClassificationError when z is off the unit circle.
double mode_self_flux(cplx z, double lambda, int ell, const TubeParams& p, const TransferConstants& tc);

/// Flux [u_a, u_b] of two modes (u(v_0) = 1 each) at the same lambda, summed over
/// a staircase loop of alpha*delta vertical and beta*delta horizontal edges.
cplx cross_flux(const FloquetMode& a, const FloquetMode& b, const TubeParams& p, const TransferConstants& tc);

/// All 2*beta*delta Floquet modes at lambda, classified.
ModeSet mode_set(double lambda, const TubeParams& p, const TransferConstants& tc);

}  // namespace qgtube

#pragma once

#include "qgtube/dispersion.hpp"
#include "qgtube/edge_ode.hpp"
#include "qgtube/lattice.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace qgtube {

/// a u(v) + b (sum of outgoing derivatives) = 0
struct RobinPair {
    double a = 0.0;
    double b = 1.0;
};

struct AuxInternalEdge {
    int from = 0;  // aux vertex index
    int to = 0;    // aux vertex index
    double length = 1.0;
    EdgePotential potential;
};

struct AuxAttachmentEdge {
    int from = 0;  // aux vertex index
    int ring = 0;  // boundary vertex v_ring of the half-tube
    double length = 1.0;
    EdgePotential potential;
};

/// Finite graph glued to the boundary column of the half-tube.
struct AuxGraph {
    std::vector<RobinPair> vertex_robin;  // one entry per aux vertex
    std::vector<AuxInternalEdge> internal_edges;
    std::vector<AuxAttachmentEdge> attachment_edges;

    int vertex_count() const { return static_cast<int>(vertex_robin.size()); }
    bool empty() const { return vertex_robin.empty(); }
};

struct HalfTubeConfig {
    TubeParams params;
    EdgePotential potential;
    std::vector<RobinPair> boundary_robin;  // n = 0..beta*delta-1
    AuxGraph aux;

    /// Throws ValidationError on malformed data.
    void validate() const;
};

/// Pure Neumann (Kirchhoff) boundary with no aux graph.
HalfTubeConfig neumann_config(const TubeParams& p, const EdgePotential& potential = EdgePotential::zero());

/// An incoming (leftward) mode and its matched outgoing (rightward) partner.
/// Scales are applied on top of the u(v_0) = 1 normalization: propagating modes
/// carry unit flux, an evanescent pair has [u_out, u_in] = 1. Phases make the
/// largest state coordinate real positive (for the incoming evanescent mode the
/// phase follows from the pairing).
struct Channel {
    FloquetMode incoming;
    FloquetMode outgoing;
    cplx incoming_scale = 1.0;
    cplx outgoing_scale = 1.0;
    bool propagating = false;
};

struct ChannelBasis {
    double lambda = 0.0;
    TransferConstants tc;
    std::vector<Channel> channels;  // size beta*delta

    int size() const { return static_cast<int>(channels.size()); }
    int propagating_count() const;
};

/// Throws DirichletSpectrumError in sigma_D and UnsupportedPointError at a band edge.
ChannelBasis channel_basis(double lambda, const TubeParams& p, const EdgePotential& potential);

/// (gamma + R) x (gamma + 2R) matrix, columns ordered (aux values, outgoing c+, incoming c-).
Eigen::MatrixXcd assemble_F(double lambda, const HalfTubeConfig& config, const ChannelBasis& basis);

struct ScatteringResult {
    double lambda = 0.0;
    bool singular = false;               // restricted map not invertible: bound state present
    Eigen::MatrixXcd S;                  // R x R, outgoing <- incoming
    Eigen::MatrixXcd aux_values;         // gamma x R
    std::vector<int> propagating;        // channel indices with |z1| = 1
    double flux_residual = 0.0;          // conservation form, propagating excitations
    double evanescent_flux_residual = 0.0;  // same form, evanescent excitations, relative to |S|
    double unitarity_residual = 0.0;     // max |S_p^H S_p - I|
    double restricted_rcond = 0.0;
    ChannelBasis basis;
};

ScatteringResult scattering_matrix(double lambda, const HalfTubeConfig& config);

/// Conservation form sum_prop(|c+|^2 - |c-|^2) + 2 sum_evan Re(conj(c+) c-).
double conservation_form(const Eigen::VectorXcd& c_out, const Eigen::VectorXcd& c_in, const ChannelBasis& basis);

inline constexpr double kBoundStateThreshold = 1e-6;
inline constexpr double kScanExclusion = 1e-6;

struct BoundStateCandidate {
    double lambda = 0.0;
    double smallest_singular_value = 0.0;
    Eigen::VectorXcd outgoing;    // channel-basis coefficients, size R
    Eigen::VectorXcd aux_values;  // size gamma
    bool embedded = false;
    double residual = 0.0;        // from verify_bound_state
    double decay_ratio = 0.0;
    double expected_decay = 0.0;
};

struct BoundStateSystem {
    double sigma_min = 0.0;
    Eigen::VectorXcd outgoing;
    Eigen::VectorXcd aux_values;
};

/// Smallest singular value of the bound-state system at lambda (incoming columns
/// removed, propagating outgoing coefficients forced to zero, columns unit-normalized).
BoundStateSystem bound_state_system(double lambda, const HalfTubeConfig& config);

struct BoundStateScan {
    std::vector<BoundStateCandidate> candidates;
    std::vector<double> skipped;  // grid points too close to sigma_D or a band edge
};

BoundStateScan bound_state_scan(double lo, double hi, const HalfTubeConfig& config, int grid);

enum class BoundCase { A, B, C, D };

/// Parses "a".."d" (case-insensitive); throws ParameterError otherwise.
BoundCase parse_bound_case(const std::string& s);
std::string to_string(BoundCase c);

struct RobinDesign {
    HalfTubeConfig config;
    double lambda = 0.0;
    double z = 0.0;
    double z1 = 0.0;
    double z2 = 0.0;
    std::vector<double> roots;  // every real root in the case interval, ascending |z|
};

/// Robin coefficients for which the single sector-0 mode with real z is a bound state.
/// Zero edge potential only.
RobinDesign design_robin(BoundCase which, double lambda, const TubeParams& p);

struct BoundStateCheck {
    double residual = 0.0;        // max vertex-condition violation / max |u|
    double decay_ratio = 0.0;     // geometric fit of column norms
    double expected_decay = 0.0;  // largest |z1| among the participating modes
};

inline constexpr int kVerifyColumns = 20;

BoundStateCheck verify_bound_state(const BoundStateCandidate& candidate, const HalfTubeConfig& config);

/// The designed single-mode field as a candidate (coefficients in the channel basis), verified.
BoundStateCandidate candidate_from_design(const RobinDesign& design);

/// Least-squares ratio r with norms[m] ~ C r^m; zero entries are skipped.
double fit_geometric_decay(const std::vector<double>& norms);

}  // namespace qgtube

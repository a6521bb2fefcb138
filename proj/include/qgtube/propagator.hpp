#pragma once

#include "qgtube/dispersion.hpp"
#include "qgtube/edge_ode.hpp"
#include "qgtube/lattice.hpp"

#include <Eigen/Dense>

#include <vector>

namespace qgtube {

/// Transfer operator on the vertex values of two adjacent slanted columns and the
/// flux form on the same space.
///
/// State layout: entries 0..R-1 hold column m (ring 0..R-1), entries R..2R-1 hold
/// column m+1, with R = beta*delta.
struct PropagatorBundle {
    double lambda = 0.0;
    Eigen::MatrixXcd P;
    Eigen::MatrixXcd P_inverse;
    Eigen::MatrixXcd J;
    int n_plus = 0;
    int n_minus = 0;

    Eigen::Index dimension() const { return P.rows(); }
};

/// Throws DirichletSpectrumError if s(lambda, 1) = 0 and DegenerateStencilError
/// if the column solve is singular.
PropagatorBundle build_propagator(double lambda, const TubeParams& p, const TransferConstants& tc);

/// P^steps applied to state; negative steps use the inverse.
Eigen::VectorXcd propagate(const Eigen::VectorXcd& state, int steps, const PropagatorBundle& bundle);

/// a^H J b
cplx flux(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, const PropagatorBundle& bundle);

/// Column-(0, 1) state of a Floquet mode with u(v_0) = 1.
Eigen::VectorXcd mode_state(const FloquetMode& mode, const TubeParams& p);

/// Signature (n_plus, n_minus) of a Hermitian matrix, eigenvalues below tol*max|eig| ignored.
std::pair<int, int> hermitian_signature(const Eigen::MatrixXcd& h, double tol = 1e-12);

/// Largest pair distance under the matching of a and b (equal sizes) that minimizes the
/// total distance (Hungarian algorithm).
double multiset_mismatch(const std::vector<cplx>& a, const std::vector<cplx>& b);

/// Eigenvalues of P against the z1 of every mode at the same lambda.
double propagator_dispersion_mismatch(const PropagatorBundle& bundle, const ModeSet& modes);

}  // namespace qgtube

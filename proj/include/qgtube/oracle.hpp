#pragma once

#include "qgtube/halftube.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <vector>

namespace qgtube {

/// A finite metric graph with Robin (or Dirichlet) vertex conditions.
struct MetricGraph {
    struct Vertex {
        RobinPair condition;  // b = 0 means Dirichlet
    };
    struct Edge {
        int from = 0;
        int to = 0;
        double length = 1.0;
        EdgePotential potential;
    };
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
};

enum class FarEnd { Dirichlet, Neumann };

/// One unknown of the discretized model.
struct Dof {
    enum class Kind { TubeVertex, AuxVertex, EdgeSample } kind = Kind::EdgeSample;
    int a = 0;  // column | aux index | edge index
    int b = 0;  // ring   | 0         | sample index 1..N-1
};

/// Lumped piecewise-linear discretization of -u'' + q u on every edge; vertex rows carry
/// the Robin term -a/b and half the adjacent cell masses. The stored matrix is the
/// symmetrized operator M^{-1/2} K M^{-1/2}.
struct DiscretizedModel {
    int columns = 0;
    int points_per_edge = 0;
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd inv_sqrt_mass;
    std::vector<Dof> index_map;
    int rings = 0;
    int edge_count = 0;
    int vertex_count = 0;  // vertices carrying an unknown (Dirichlet ones are eliminated)

    Eigen::Index size() const { return matrix.rows(); }
};

inline constexpr long kMaxOracleRows = 20'000'000;

/// Discretizes a standalone metric graph (used for the textbook order checks).
DiscretizedModel build_graph_model(const MetricGraph& graph, int points_per_edge);

/// Half-tube truncated after column M plus the aux graph. Throws ParameterError unless
/// M >= 10 and N >= 8, SizeError beyond kMaxOracleRows.
DiscretizedModel build_model(const HalfTubeConfig& config, int columns, int points_per_edge,
                             FarEnd far_end = FarEnd::Dirichlet);

struct EigenPair {
    double value = 0.0;
    Eigen::VectorXd vector;  // physical values (mass-weighted back-transform), unit 2-norm
};

/// The `count` eigenvalues nearest `target` by shift-invert Lanczos with full
/// reorthogonalization, ordered by distance. Throws ConvergenceError.
std::vector<EigenPair> eigs_near(const DiscretizedModel& model, double target, int count,
                                 std::uint64_t seed = 12345);

/// Norms of the tube vertex values per column 0..columns-1.
std::vector<double> column_norms(const DiscretizedModel& model, const Eigen::VectorXd& v);

struct OracleMatch {
    double lambda = 0.0;
    double decay_fit = 0.0;
    int index = -1;  // into the eigs_near result
};

/// Eigenpair whose column-norm decay (fitted on columns 0..fit_columns-1) is closest to `expected_decay`.
OracleMatch match_by_decay(const DiscretizedModel& model, const std::vector<EigenPair>& pairs,
                           double expected_decay, int fit_columns = 10);

/// Lowest Dirichlet eigenvalue of one edge of length 1 and q = 0 on N cells.
double single_edge_lowest(int points_per_edge);

}  // namespace qgtube

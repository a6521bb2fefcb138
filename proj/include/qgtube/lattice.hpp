#pragma once

#include <array>
#include <vector>

namespace qgtube {

/// Geometry of the tube obtained from the square lattice by identifying
/// (m, n) ~ (m + alpha*delta, n + beta*delta).
///
/// The boundary vertices of the slanted fundamental domain are
/// v_n = (shift(n), n) for n = 0..beta*delta-1 with shift(n) = ceil(alpha*n/beta).
struct TubeParams {
    int alpha = 0;
    int beta = 0;
    int delta = 0;
    std::vector<int> shifts;          // s(n), n = 0..beta*delta-1
    std::vector<int> exponents;       // r(n) = s(n)*beta - n*alpha
    std::vector<int> boundary_flags;  // chi_n = 1 iff s(n+1) == s(n)

    int rings() const noexcept { return beta * delta; }
    /// s(n) extended to all integers through s(n + beta*delta) = s(n) + alpha*delta.
    int shift(int n) const noexcept;
};

/// Throws ParameterError unless gcd(alpha, beta) = 1, 0 < alpha < beta, delta >= 1.
TubeParams make_params(int alpha, int beta, int delta);

/// A tube vertex in slanted coordinates. column = x - s(ring) so that column 0
/// is the boundary column of the half-tube.
struct VertexId {
    int column = 0;
    int ring = 0;

    friend bool operator==(const VertexId&, const VertexId&) = default;
};

/// Lattice point of the unrolled plane represented by v (the representative with 0 <= y < beta*delta).
std::array<int, 2> raw_point(const VertexId& v, const TubeParams& p);

VertexId canonicalize(int m, int n, const TubeParams& p);

struct Neighbors {
    VertexId left;   // h^-1 v
    VertexId right;  // h v
    VertexId down;   // v^-1 v
    VertexId up;     // v v
};

Neighbors neighbors(const VertexId& v, const TubeParams& p);

struct DirectedEdge {
    enum class Orientation { Rightward, Downward };
    VertexId from;
    VertexId to;
    Orientation orientation;
};

/// The (alpha+beta)*delta edges crossing the loop between column -1 and column 0,
/// directed from the column -1 side into the half-tube side.
std::vector<DirectedEdge> crossing_edges(const TubeParams& p);

/// Degree of the boundary vertex on ring n inside the half-tube (2 + chi_n).
int boundary_degree(int ring, const TubeParams& p);

}  // namespace qgtube

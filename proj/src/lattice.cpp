#include "qgtube/lattice.hpp"

#include "qgtube/errors.hpp"

#include <numeric>
#include <sstream>

namespace qgtube {

namespace {

int floor_div(int a, int b) {
    int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

int ceil_div(int a, int b) { return -floor_div(-a, b); }

}  // namespace

int TubeParams::shift(int n) const noexcept {
    const int period = rings();
    const int wraps = floor_div(n, period);
    return shifts[static_cast<std::size_t>(n - wraps * period)] + wraps * alpha * delta;
}

TubeParams make_params(int alpha, int beta, int delta) {
    std::ostringstream os;
    if (alpha <= 0) os << "alpha must be positive (got " << alpha << ")";
    else if (alpha >= beta) os << "alpha must be smaller than beta (got " << alpha << ", " << beta << ")";
    else if (std::gcd(alpha, beta) != 1) os << "gcd(alpha, beta) must be 1 (got " << std::gcd(alpha, beta) << ")";
    else if (delta <= 0) os << "delta must be positive (got " << delta << ")";
    if (!os.str().empty()) throw ParameterError(os.str());

    TubeParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.delta = delta;
    const int rings = beta * delta;
    p.shifts.resize(static_cast<std::size_t>(rings));
    for (int n = 0; n < rings; ++n) p.shifts[static_cast<std::size_t>(n)] = ceil_div(alpha * n, beta);
    p.exponents.resize(static_cast<std::size_t>(rings));
    p.boundary_flags.resize(static_cast<std::size_t>(rings));
    for (int n = 0; n < rings; ++n) {
        const auto i = static_cast<std::size_t>(n);
        p.exponents[i] = p.shifts[i] * beta - n * alpha;
        p.boundary_flags[i] = (p.shift(n + 1) == p.shift(n)) ? 1 : 0;
    }
    return p;
}

std::array<int, 2> raw_point(const VertexId& v, const TubeParams& p) {
    return {v.column + p.shift(v.ring), v.ring};
}

VertexId canonicalize(int m, int n, const TubeParams& p) {
    const int period = p.rings();
    const int wraps = floor_div(n, period);
    const int ring = n - wraps * period;
    const int x = m - wraps * p.alpha * p.delta;
    return {x - p.shift(ring), ring};
}

Neighbors neighbors(const VertexId& v, const TubeParams& p) {
    const auto [x, y] = raw_point(v, p);
    return {canonicalize(x - 1, y, p), canonicalize(x + 1, y, p), canonicalize(x, y - 1, p),
            canonicalize(x, y + 1, p)};
}

std::vector<DirectedEdge> crossing_edges(const TubeParams& p) {
    std::vector<DirectedEdge> edges;
    const int rings = p.rings();
    for (int n = 0; n < rings; ++n)
        edges.push_back({VertexId{-1, n}, VertexId{0, n}, DirectedEdge::Orientation::Rightward});
    for (int n = 0; n < rings; ++n) {
        const VertexId below{0, n};
        const VertexId above = neighbors(below, p).up;
        if (above.column < 0) edges.push_back({above, below, DirectedEdge::Orientation::Downward});
    }
    return edges;
}

int boundary_degree(int ring, const TubeParams& p) {
    return 2 + p.boundary_flags.at(static_cast<std::size_t>(ring));
}

}  // namespace qgtube

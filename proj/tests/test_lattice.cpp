#include <doctest.h>

#include "qgtube/errors.hpp"
#include "qgtube/lattice.hpp"

#include <numeric>

using namespace qgtube;

namespace {

bool same(const VertexId& a, const VertexId& b) { return a.column == b.column && a.ring == b.ring; }

// points strictly right of (or on) the line y = (beta/alpha) x, read off by brute force
std::vector<int> shifts_by_enumeration(int alpha, int beta, int delta) {
    std::vector<int> s;
    for (int n = 0; n < beta * delta; ++n) {
        int m = -100;
        while (static_cast<long>(m) * beta < static_cast<long>(n) * alpha) ++m;
        s.push_back(m);
    }
    return s;
}

}  // namespace

TEST_CASE("make_params") {
    const auto p = make_params(2, 5, 1);
    CHECK(p.shifts == std::vector<int>{0, 1, 1, 2, 2});
    CHECK(p.exponents == std::vector<int>{0, 3, 1, 4, 2});
    CHECK(p.boundary_flags == std::vector<int>{0, 1, 0, 1, 1});

    const auto q = make_params(1, 2, 1);
    CHECK(q.shifts == std::vector<int>{0, 1});
    CHECK(q.exponents == std::vector<int>{0, 1});
    CHECK(q.boundary_flags == std::vector<int>{0, 1});

    CHECK_THROWS_AS(make_params(2, 4, 1), ParameterError);
    CHECK_THROWS_AS(make_params(5, 2, 1), ParameterError);
    CHECK_THROWS_AS(make_params(0, 1, 1), ParameterError);
    CHECK_THROWS_AS(make_params(1, 2, 0), ParameterError);

    for (int b = 2; b <= 7; ++b)
        for (int a = 1; a < b; ++a) {
            if (std::gcd(a, b) != 1) continue;
            for (int d = 1; d <= 3; ++d) {
                const auto pp = make_params(a, b, d);
                CHECK(pp.shifts == shifts_by_enumeration(a, b, d));
                CHECK(std::accumulate(pp.boundary_flags.begin(), pp.boundary_flags.end(), 0) == (b - a) * d);
                for (int n = 0; n < b * d; ++n) CHECK(pp.exponents[n] == pp.shifts[n] * b - n * a);
            }
        }
}

TEST_CASE("canonicalize") {
    const auto p = make_params(2, 5, 1);
    CHECK(raw_point(canonicalize(3, 7, p), p) == std::array<int, 2>{1, 2});
    CHECK(raw_point(canonicalize(0, -1, p), p) == std::array<int, 2>{2, 4});
    const auto z = canonicalize(0, 0, make_params(3, 5, 2));
    CHECK(z.column == 0);
    CHECK(z.ring == 0);
    // exactly beta*delta points of column 0
    const auto q = make_params(3, 5, 2);
    int count = 0;
    for (int m = -20; m <= 20; ++m)
        for (int n = 0; n < 10; ++n) count += canonicalize(m, n, q).column == 0;
    CHECK(count == 10);
}

TEST_CASE("neighbors") {
    const auto p = make_params(2, 5, 1);
    CHECK(same(neighbors({0, 0}, p).down, {0, 4}));
    CHECK(same(neighbors({0, 4}, p).up, {0, 0}));
    for (int n = 0; n < 5; ++n) {
        const auto nb = neighbors({3, n}, p);
        CHECK(same(nb.left, {2, n}));
        CHECK(same(nb.right, {4, n}));
        const auto b = neighbors({0, n}, p);
        const int step = (2 * (n + 1) + 4) / 5 - p.shifts[n];  // ceil(alpha (n+1) / beta) - s(n)
        CHECK(b.up.column == (step == 1 ? -1 : 0));
        CHECK((b.down.column == 0 || b.down.column == 1));
    }
}

TEST_CASE("group relations hold exhaustively for small parameters") {
    for (int b = 2; b <= 7; ++b)
        for (int a = 1; a < b; ++a) {
            if (std::gcd(a, b) != 1) continue;
            for (int d = 1; d <= 2; ++d) {
                const auto p = make_params(a, b, d);
                for (int n = 0; n < b * d; ++n)
                    for (int col = -2; col <= 2; ++col) {
                        const VertexId v{col, n};
                        CHECK(same(neighbors(neighbors(v, p).right, p).up, neighbors(neighbors(v, p).up, p).right));
                        CHECK(same(neighbors(neighbors(v, p).up, p).down, v));
                        CHECK(same(neighbors(neighbors(v, p).right, p).left, v));
                        VertexId w = v;
                        for (int i = 0; i < a * d; ++i) w = neighbors(w, p).right;
                        for (int i = 0; i < b * d; ++i) w = neighbors(w, p).up;
                        CHECK(same(w, v));
                    }
            }
        }
}

TEST_CASE("crossing edges and boundary degree") {
    CHECK(crossing_edges(make_params(2, 5, 1)).size() == 7);
    CHECK(crossing_edges(make_params(1, 2, 1)).size() == 3);
    for (auto [a, b, d] : {std::array{2, 5, 1}, {3, 5, 2}, {1, 2, 3}, {4, 7, 1}}) {
        const auto p = make_params(a, b, d);
        const auto edges = crossing_edges(p);
        CHECK(edges.size() == static_cast<std::size_t>((a + b) * d));
        int vertical = 0;
        for (const auto& e : edges) vertical += e.orientation == DirectedEdge::Orientation::Downward;
        const int chi = std::accumulate(p.boundary_flags.begin(), p.boundary_flags.end(), 0);
        CHECK(vertical == a * d);
        CHECK(vertical == b * d - chi);
        for (int n = 0; n < b * d; ++n) {
            const auto nb = neighbors({0, n}, p);
            int deg = 0;
            for (const auto& w : {nb.left, nb.right, nb.down, nb.up}) deg += w.column >= 0;
            CHECK(boundary_degree(n, p) == deg);
            CHECK(boundary_degree(n, p) == 2 + p.boundary_flags[n]);
        }
    }
}

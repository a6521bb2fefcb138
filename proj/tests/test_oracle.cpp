#include <doctest.h>

#include "qgtube/errors.hpp"
#include "qgtube/oracle.hpp"

#include <cmath>
#include <numbers>

using namespace qgtube;

namespace {

constexpr double pi = std::numbers::pi;

double spread(const std::vector<EigenPair>& pairs, double target) {
    double s = 0;
    for (const auto& e : pairs) s = std::max(s, std::abs(e.value - target));
    return s;
}

}  // namespace

TEST_CASE("single edge converges at second order") {
    const double e1 = std::abs(single_edge_lowest(20) - pi * pi);
    const double e2 = std::abs(single_edge_lowest(40) - pi * pi);
    const double e3 = std::abs(single_edge_lowest(80) - pi * pi);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("star graph with a Kirchhoff centre") {
    MetricGraph g;
    g.vertices = {{{0.0, 1.0}}, {{1.0, 0.0}}, {{1.0, 0.0}}, {{1.0, 0.0}}};
    for (int i = 1; i <= 3; ++i) g.edges.push_back({0, i, 1.0, EdgePotential::zero()});
    const auto m = build_graph_model(g, 64);
    CHECK(m.size() == 3 * 63 + 1);
    CHECK((m.matrix - Eigen::SparseMatrix<double>(m.matrix.transpose())).norm() < 1e-12);
    const auto ev = eigs_near(m, 2.0, 1);
    CHECK(ev.front().value == doctest::Approx(pi * pi / 4).epsilon(1e-3));
}

TEST_CASE("model construction") {
    const auto p = make_params(2, 5, 1);
    const auto cfg = neumann_config(p);
    CHECK_THROWS_AS(build_model(cfg, 9, 20), ParameterError);
    CHECK_THROWS_AS(build_model(cfg, 20, 7), ParameterError);
    CHECK_THROWS_AS(build_model(cfg, 100000, 1000), SizeError);
    for (FarEnd far : {FarEnd::Dirichlet, FarEnd::Neumann}) {
        const auto m = build_model(cfg, 12, 10, far);
        CHECK(m.size() == static_cast<Eigen::Index>(m.edge_count) * 9 + m.vertex_count);
        CHECK(m.size() == static_cast<Eigen::Index>(m.index_map.size()));
        CHECK((m.matrix - Eigen::SparseMatrix<double>(m.matrix.transpose())).norm() < 1e-12);
    }
}

TEST_CASE("designed state is reproduced") {
    const auto p = make_params(2, 5, 1);
    const auto design = design_robin(BoundCase::A, -1.0, p);
    const auto m = build_model(design.config, 20, 20);
    const auto pairs = eigs_near(m, -1.0, 6);
    const auto match = match_by_decay(m, pairs, std::abs(design.z1));
    REQUIRE(match.index >= 0);
    CHECK(std::abs(match.lambda + 1.0) < 1e-2);
    CHECK(std::abs(match.decay_fit - std::abs(design.z1)) < 0.05);
    const auto norms = column_norms(m, pairs[static_cast<std::size_t>(match.index)].vector);
    CHECK(norms.size() == 20);
    CHECK(norms[5] < norms[0]);
}

TEST_CASE("no eigenvalue in a spectral gap, denser bands for longer tubes") {
    const auto p = make_params(2, 5, 1);
    const auto cfg = neumann_config(p);
    const auto below = eigs_near(build_model(cfg, 20, 16), -1.0, 3);
    CHECK(std::abs(below.front().value + 1.0) > 0.1);
    const double s20 = spread(eigs_near(build_model(cfg, 20, 16), 12.3, 20), 12.3);
    const double s40 = spread(eigs_near(build_model(cfg, 40, 16), 12.3, 20), 12.3);
    CHECK(s40 < s20);
}

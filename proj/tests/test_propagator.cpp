#include <doctest.h>

#include "qgtube/errors.hpp"
#include "qgtube/propagator.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace qgtube;

namespace {

constexpr double pi = std::numbers::pi;

Eigen::VectorXcd random_state(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
    return v;
}

}  // namespace

TEST_CASE("propagator eigenvalues match the dispersion multipliers") {
    for (auto [a, b, d] : {std::array{2, 5, 1}, {3, 5, 2}, {1, 2, 3}}) {
        const auto p = make_params(a, b, d);
        for (double l : {-3.3, 0.7, 3.7006, 12.3, 25.0, 39.9}) {
            const auto tc = transfer_constants(l, EdgePotential::zero());
            const auto bundle = build_propagator(l, p, tc);
            CHECK(bundle.dimension() == 2 * b * d);
            CHECK(propagator_dispersion_mismatch(bundle, mode_set(l, p, tc)) < 1e-8);
            // P P^-1 = I and |det P| = 1
            CHECK((bundle.P * bundle.P_inverse - Eigen::MatrixXcd::Identity(2 * b * d, 2 * b * d)).cwiseAbs().maxCoeff() < 1e-9);
            CHECK(std::abs(std::abs(bundle.P.determinant()) - 1) < 1e-9);
            // diagonalizable: eigenvalues are separated
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(bundle.P, false);
            double gap = 1e300;
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
                for (Eigen::Index j = i + 1; j < es.eigenvalues().size(); ++j)
                    gap = std::min(gap, std::abs(es.eigenvalues()(i) - es.eigenvalues()(j)));
            CHECK(gap > 1e-6);
        }
    }
}

TEST_CASE("propagator at a Dirichlet energy") {
    CHECK_THROWS_AS(build_propagator(pi * pi, make_params(2, 5, 1), transfer_constants(pi * pi, EdgePotential::zero())),
                    DirichletSpectrumError);
}

TEST_CASE("flux form signature and invariance") {
    std::mt19937_64 rng(7);
    for (auto [a, b, d] : {std::array{2, 5, 1}, {3, 5, 2}}) {
        const auto p = make_params(a, b, d);
        const int R = b * d;
        for (double l : {-1.0, 3.7006, 25.0}) {
            const auto tc = transfer_constants(l, EdgePotential::zero());
            const auto bundle = build_propagator(l, p, tc);
            CHECK((bundle.J - bundle.J.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
            CHECK(hermitian_signature(bundle.J) == std::pair{R, R});
            CHECK((bundle.P.adjoint() * bundle.J * bundle.P - bundle.J).cwiseAbs().maxCoeff() < 1e-9);

            // independent route: Gram matrix of the flux form in the mode basis
            const auto ms = mode_set(l, p, tc);
            Eigen::MatrixXcd G(2 * R, 2 * R);
            for (int i = 0; i < 2 * R; ++i)
                for (int k = 0; k < 2 * R; ++k) G(i, k) = cross_flux(ms.modes[i], ms.modes[k], p, tc);
            Eigen::MatrixXcd X(2 * R, 2 * R);
            for (int k = 0; k < 2 * R; ++k) X.col(k) = mode_state(ms.modes[k], p);
            const Eigen::MatrixXcd G2 = X.adjoint() * bundle.J * X;
            for (int i = 0; i < 2 * R; ++i)
                for (int k = 0; k < 2 * R; ++k)
                    CHECK(std::abs(G(i, k) - G2(i, k)) < 1e-6 * X.col(i).norm() * X.col(k).norm());
            Eigen::VectorXd w = X.colwise().norm().cwiseInverse().transpose();
            const Eigen::MatrixXcd Gn = w.asDiagonal() * G2 * w.asDiagonal();
            CHECK(hermitian_signature(Gn, 1e-9) == std::pair{R, R});

            for (int t = 0; t < 20; ++t) {
                const auto x = random_state(2 * R, rng), y = random_state(2 * R, rng);
                const cplx fxy = flux(x, y, bundle);
                CHECK(std::abs(fxy - std::conj(flux(y, x, bundle))) < 1e-12 * std::max(1.0, std::abs(fxy)));
                CHECK(std::abs(flux(x, x, bundle).imag()) < 1e-12 * x.squaredNorm());
                const cplx moved = flux(propagate(x, 1, bundle), propagate(y, 1, bundle), bundle);
                CHECK(std::abs(moved - fxy) < 1e-9 * std::max(1.0, std::abs(fxy)));
            }
        }
    }
}

TEST_CASE("propagate") {
    const auto p = make_params(2, 5, 1);
    const double l = 12.3;
    const auto tc = transfer_constants(l, EdgePotential::zero());
    const auto bundle = build_propagator(l, p, tc);
    std::mt19937_64 rng(3);
    const auto x = random_state(10, rng);
    CHECK((propagate(x, 0, bundle) - x).norm() == 0.0);
    CHECK((propagate(propagate(x, 3, bundle), -3, bundle) - x).norm() < 1e-10 * x.norm());
    for (const auto& m : mode_set(l, p, tc).modes) {
        const auto u = mode_state(m, p);
        CHECK((propagate(u, 2, bundle) - m.z1 * m.z1 * u).norm() < 1e-9 * std::max(1.0, std::norm(m.z1)) * u.norm());
        if (m.classification == ModeClass::RightProp) CHECK(flux(u, u, bundle).real() > 0);
        if (m.classification == ModeClass::LeftProp) CHECK(flux(u, u, bundle).real() < 0);
    }
}

TEST_CASE("multiset mismatch") {
    CHECK(multiset_mismatch({1.0, 2.0, cplx(0, 1)}, {cplx(0, 1), 1.0, 2.0}) == 0.0);
    CHECK(multiset_mismatch({1.0, 2.0}, {1.0, 2.5}) == doctest::Approx(0.5));
    // optimal matching, not greedy
    CHECK(multiset_mismatch({0.0, 1.0}, {0.6, 1.7}) == doctest::Approx(0.7));
}

#include <doctest.h>

#include "qgtube/bands.hpp"

#include <cmath>
#include <numbers>

using namespace qgtube;

namespace {

constexpr double pi = std::numbers::pi;

bool inside_bands(double l, const std::vector<Band>& bands) {
    for (const auto& b : bands)
        if (l >= b.lambda_lo && l <= b.lambda_hi) return true;
    return false;
}

}  // namespace

TEST_CASE("band function values") {
    const auto p = make_params(2, 5, 1);
    CHECK(band_function(0, 0, p) == doctest::Approx(2.0));
    CHECK(std::abs(band_function(pi, 0, p)) < 1e-14);
    CHECK(band_function(pi / 5, 0, p) == doctest::Approx(-1 + std::cos(2 * pi / 5)).epsilon(1e-14));
    CHECK(band_function(pi / 5, 0, p) == doctest::Approx(-0.6910).epsilon(1e-4));
    const double h = 1e-6;
    for (double k = -3; k < 3; k += 0.31)
        CHECK(band_function_derivative(k, 0, p) ==
              doctest::Approx((band_function(k + h, 0, p) - band_function(k - h, 0, p)) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("monotonic segments") {
    for (auto [a, b, d] : {std::array{2, 5, 1}, {3, 5, 2}, {1, 2, 3}, {4, 7, 2}}) {
        const auto p = make_params(a, b, d);
        std::size_t total = 0;
        for (int ell = 0; ell < d; ++ell) {
            const auto segs = monotonic_segments(ell, p);
            CHECK(segs.size() == static_cast<std::size_t>(2 * b));
            total += segs.size();
            double covered = 0;
            for (const auto& s : segs) {
                CHECK(std::abs(band_function_derivative(s.k_lo, ell, p)) <= 1e-10);
                CHECK(std::abs(band_function_derivative(s.k_hi, ell, p)) <= 1e-10);
                CHECK(s.g_min < s.g_max);
                const double mid = 0.5 * (s.k_lo + s.k_hi);
                const double g0 = band_function(s.k_lo, ell, p), g1 = band_function(s.k_hi, ell, p);
                CHECK(std::min(g0, g1) == doctest::Approx(s.g_min).epsilon(1e-12));
                CHECK(band_function(mid, ell, p) > s.g_min);
                CHECK(band_function(mid, ell, p) < s.g_max);
                covered += s.k_hi - s.k_lo;
            }
            CHECK(covered == doctest::Approx(2 * pi).epsilon(1e-12));
        }
        CHECK(total == static_cast<std::size_t>(2 * b * d));
    }
}

TEST_CASE("in_spectrum agrees with the band list") {
    for (auto [a, b, d] : {std::array{2, 5, 1}, {3, 5, 2}}) {
        const auto p = make_params(a, b, d);
        const auto bands = spectrum_bands(0.1, 40, p, EdgePotential::zero());
        const auto edges = band_edges(0.1, 40, p, EdgePotential::zero());
        for (const auto& band : bands) CHECK(band.lambda_lo < band.lambda_hi);
        int agree = 0;
        for (int i = 0; i < 500; ++i) {
            const double l = 0.1 + (40 - 0.1) * (i + 0.5) / 500;
            if (std::abs(transfer_constants(l, EdgePotential::zero()).s) < 1e-9) continue;
            const bool ok = in_spectrum(l, p, EdgePotential::zero()).in_spectrum == inside_bands(l, bands);
            if (ok) {
                ++agree;
                continue;
            }
            double dist = 1e300;
            for (double e : edges) dist = std::min(dist, std::abs(e - l));
            CHECK(dist < 1e-4);
        }
        CHECK(agree >= 499);
    }
}

TEST_CASE("band boundaries for q = 0") {
    // below the spectrum: 2 cosh sqrt(-l) > 2
    const auto p = make_params(2, 5, 1);
    CHECK(!in_spectrum(-1.0, p, EdgePotential::zero()).in_spectrum);
    const auto bands = spectrum_bands(-10, 40, p, EdgePotential::zero());
    double lowest = 1e300;
    for (const auto& b : bands) lowest = std::min(lowest, b.lambda_lo);
    CHECK(lowest == doctest::Approx(0.0).epsilon(1e-9));
    for (const auto& b : bands) {
        CHECK(b.lambda_lo >= -1e-12);
        CHECK(b.lambda_hi <= 40);
    }
    CHECK(in_spectrum(0.0, p, EdgePotential::zero()).band_edge);
}

TEST_CASE("dispersion data and band diagram") {
    for (auto [a, b, d] : {std::array{2, 5, 1}, {3, 5, 2}}) {
        const auto p = make_params(a, b, d);
        const auto data = export_dispersion_data(256, p);
        CHECK(data.size() == static_cast<std::size_t>(256 * d));
        for (const auto& pt : data) {
            CHECK(pt.g == doctest::Approx(band_function(pt.k, pt.ell, p)).epsilon(1e-14));
            CHECK(std::cos(pt.k1) + std::cos(pt.k2) == doctest::Approx(pt.g).epsilon(1e-9));
            CHECK(pt.k1 >= 0);
            CHECK(pt.k1 < 2 * pi);
        }
        const auto bands = spectrum_bands(0, 40, p, EdgePotential::zero());
        for (const auto& c : band_diagram(0, 40, 200, p, EdgePotential::zero()))
            for (const auto& [k, l] : c.points) {
                if (!std::isfinite(l)) continue;
                CHECK(2 * transfer_constants(l, EdgePotential::zero()).c ==
                      doctest::Approx(band_function(k, c.ell, p)).epsilon(1e-8));
                CHECK(inside_bands(l, bands));
            }
    }
}

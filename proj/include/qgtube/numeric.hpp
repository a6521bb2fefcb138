#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace qgtube {

/// Integer power by repeated squaring; negative exponents invert.
inline std::complex<double> ipow(std::complex<double> z, int n) {
    const bool invert = n < 0;
    unsigned e = invert ? static_cast<unsigned>(-static_cast<long>(n)) : static_cast<unsigned>(n);
    std::complex<double> result = 1.0;
    while (e != 0) {
        if (e & 1u) result *= z;
        z *= z;
        e >>= 1u;
    }
    return invert ? 1.0 / result : result;
}

/// exp(2 pi i t)
inline std::complex<double> unit_phase(double t) {
    const double a = 2.0 * std::numbers::pi * t;
    return {std::cos(a), std::sin(a)};
}

}  // namespace qgtube

#pragma once

#include <cw/polynomial.hpp>

#include <functional>
#include <random>

namespace cw::testing {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Polynomial random_polynomial(std::mt19937_64& rng, int degree, double coeff_range = 2.0) {
    std::vector<double> c(static_cast<std::size_t>(degree) + 1);
    for (double& v : c) v = uniform(rng, -coeff_range, coeff_range);
    // Keep the leading coefficient away from zero so the degree is as requested.
    if (std::abs(c.back()) < 0.1) c.back() = (c.back() < 0 ? -1.0 : 1.0) * 0.1;
    return Polynomial(std::move(c));
}

// Central-difference derivative, for cross-checking closed-form derivatives.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Simpson quadrature on a fixed fine grid; independent of the GL16 machinery.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 4000) {
    const double h = (b - a) / (2.0 * panels);
    double acc = f(a) + f(b);
    for (int i = 1; i < 2 * panels; ++i) acc += f(a + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace cw::testing

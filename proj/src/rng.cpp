#include "hdrsim/rng.hpp"

#include <cmath>

namespace hdrsim {

namespace {

std::uint64_t poisson_mult(RandomStream& rs, double mean) {
    // Knuth: count uniforms until their product drops below exp(-mean).
    const double enr = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = rs.next_double();
    while (prod > enr) {
        ++k;
        prod *= rs.next_double();
    }
    return k;
}

std::uint64_t poisson_ptrs(RandomStream& rs, double mean) {
    // Hoermann (1993), transformed rejection with squeeze; valid for mean >= 10.
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rs.next_double() - 0.5;
        const double v = rs.next_double_open();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const double lhs = std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b);
        const double rhs = kf * loglam - mean - std::lgamma(kf + 1.0);
        if (lhs <= rhs) return static_cast<std::uint64_t>(kf);
    }
}

}  // namespace

std::uint64_t RandomStream::poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean < 10.0) return poisson_mult(*this, mean);
    return poisson_ptrs(*this, mean);
}

}  // namespace hdrsim

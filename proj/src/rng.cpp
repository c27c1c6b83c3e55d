#include "edgemeta/rng.hpp"

#include <cmath>

#include "edgemeta/math.hpp"

namespace edgemeta {

double RngStream::next_normal() {
    // Inverse transform keeps the draw count per variate fixed at one,
    // unlike rejection-based normal generators.
    return math::normal_quantile(next_u01());
}

double RngStream::next_gamma(double shape) {
    if (shape < 1.0) {
        const double u = next_u01();
        return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze method.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = next_normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = next_u01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double RngStream::next_chi2(double df) {
    return 2.0 * next_gamma(0.5 * df);
}

}  // namespace edgemeta

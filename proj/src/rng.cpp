#include "clic/rng.hpp"

#include <cmath>
#include <numbers>

namespace clic {

double Rng::gaussian() {
    // Box-Muller; u1 nudged away from zero so log() stays finite.
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) {
        u1 = 0x1.0p-53;
    }
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace clic

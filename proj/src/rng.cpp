#include "annosim/rng.hpp"

#include <cmath>
#include <numbers>

namespace annosim {

// Box-Muller; the sine branch is discarded so each call consumes exactly
// two uniforms regardless of call history.
double SplitMix64::next_gaussian() {
    const double u1 = next_double_open();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace annosim

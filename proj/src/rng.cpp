// SPDX-License-Identifier: Apache-2.0
#include "erddci/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "erddci/errors.hpp"

namespace erddci {

double Rng::uniform() {
    // (k + 1) / 2^53 for k in [0, 2^53) lies in (0, 1], so log() below is finite.
    const std::uint64_t k = engine_() >> 11;
    return (static_cast<double>(k) + 1.0) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * (1.0 - uniform());
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw ParameterError("Rng::below: empty range");
    // Rejection sampling keeps the result unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

Tensor sample_standard_normal(Rng& rng, const Shape& shape) {
    Tensor out(shape);
    for (double& v : out.mutable_values()) v = rng.normal();
    return out;
}

}  // namespace erddci

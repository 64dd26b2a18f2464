// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "erddci/tensor.hpp"

namespace erddci {

/// Deterministic random source.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. Uniforms use the top 53 bits mapped to (0, 1]; normals use
/// the Box-Muller transform, consuming two uniforms per pair and returning
/// the cosine branch first. The standard library's distributions are not
/// used because their algorithms vary between implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on (0, 1].
    double uniform();

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    double normal();

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// I.i.d. standard-normal tensor. Throws ShapeError for zero or overflowing extents.
Tensor sample_standard_normal(Rng& rng, const Shape& shape);

}  // namespace erddci

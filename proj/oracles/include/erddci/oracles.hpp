// SPDX-License-Identifier: Apache-2.0
//
// Brute-force and closed-form reference computations used by the test
// suites. Nothing here calls the library's step functions; each formula is
// transcribed on its own so that a shared bug cannot hide in both places.
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "erddci/gmm.hpp"
#include "erddci/rng.hpp"
#include "erddci/schedule.hpp"
#include "erddci/tensor.hpp"

namespace erddci::oracle {

struct OracleReport {
    std::string name;
    std::string inputs_digest;
    std::vector<double> reference;
    double tolerance = 0.0;
    bool pass = false;
    std::string provenance = "oracle";
};

/// CSV columns: name,inputs_digest,reference,tolerance,pass,provenance
/// (reference values joined by ';').
void write_reports_csv(const std::filesystem::path& path, std::span<const OracleReport> reports);

/// FNV-1a digest of a tensor's shape and bytes, hex encoded.
std::string digest(const Tensor& t);

struct PosteriorEstimate {
    std::vector<double> mean;
    std::vector<double> standard_error;
    double effective_sample_size = 0.0;
    bool low_ess = false;  ///< ESS below 100
};

/// Self-normalized importance-sampling estimate of E[eps | z_t = z]: draw
/// (z0, eps) pairs from the conditioned prior, weight each by the Gaussian
/// likelihood of z given z0. Requires n_samples >= 1e5.
PosteriorEstimate posterior_eps(const GmmDataModel& model, const std::vector<double>& condition, const Tensor& z,
                                int t, const NoiseSchedule& schedule, std::size_t n_samples, Rng& rng);

using LossFn = std::function<double(std::span<const double>)>;

/// Central differences (f(p + h e_i) - f(p - h e_i)) / 2h for each index in
/// `indices` (all coordinates when empty). h must lie in [1e-6, 1e-3].
std::vector<double> fd_gradient(const LossFn& loss, std::vector<double> params, double h,
                                std::span<const std::size_t> indices = {});

/// max |infer(invert(z, e), e) - z| for a noise-injection step from
/// alpha_bar_prev to alpha_bar_t followed by the matching removal.
double step_inverse_residual(std::span<const double> z, std::span<const double> e, double alpha_bar_prev,
                             double alpha_bar_t);

/// Same with the pair's alpha_bar values read from a schedule.
double step_inverse_residual(const Tensor& z, const Tensor& e, int t_prev, int t, const NoiseSchedule& schedule);

}  // namespace erddci::oracle

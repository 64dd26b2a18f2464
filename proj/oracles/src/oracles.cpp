// SPDX-License-Identifier: Apache-2.0
#include "erddci/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>

#include "erddci/errors.hpp"

namespace erddci::oracle {

void write_reports_csv(const std::filesystem::path& path, std::span<const OracleReport> reports) {
    std::ofstream out(path, std::ios::trunc);
    out << "name,inputs_digest,reference,tolerance,pass,provenance\n";
    char buf[64];
    for (const auto& r : reports) {
        out << r.name << ',' << r.inputs_digest << ',';
        for (std::size_t i = 0; i < r.reference.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", r.reference[i]);
            out << (i ? ";" : "") << buf;
        }
        std::snprintf(buf, sizeof buf, "%.3g", r.tolerance);
        out << ',' << buf << ',' << (r.pass ? "pass" : "fail") << ',' << r.provenance << '\n';
    }
}

std::string digest(const Tensor& t) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (std::size_t e : t.shape()) mix(&e, sizeof e);
    mix(t.data().data(), t.size() * sizeof(double));
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PosteriorEstimate posterior_eps(const GmmDataModel& model, const std::vector<double>& condition, const Tensor& z,
                                int t, const NoiseSchedule& schedule, std::size_t n_samples, Rng& rng) {
    if (n_samples < 100000) throw ParameterError("posterior oracle needs at least 1e5 samples");
    const std::size_t K = model.weights.size();
    if (condition.size() != K) throw ShapeError("condition must have one entry per component");
    const std::size_t D = z.size();

    // Conditioned component probabilities, written out directly.
    std::vector<double> p(K);
    double norm = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        p[k] = model.weights[k] * std::exp(model.condition_gain * condition[k]);
        norm += p[k];
    }
    for (auto& v : p) v /= norm;

    const double ab = schedule.alpha_bar(t);
    const double signal = std::sqrt(ab);
    const double noise = std::sqrt(1.0 - ab);
    const double sd = std::sqrt(model.variance);

    // Two passes: the first finds the largest log-weight for stability.
    std::vector<double> logw(n_samples);
    std::vector<double> eps(n_samples * D);
    std::vector<double> x0(D);
    for (std::size_t s = 0; s < n_samples; ++s) {
        double u = rng.uniform();
        std::size_t k = 0;
        while (k + 1 < K && u > p[k]) {
            u -= p[k];
            ++k;
        }
        double sq = 0.0;
        for (std::size_t i = 0; i < D; ++i) {
            x0[i] = model.means[k][i] + sd * rng.normal();
            const double implied = (z[i] - signal * x0[i]) / noise;
            eps[s * D + i] = implied;
            sq += implied * implied;
        }
        logw[s] = -0.5 * sq;
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    double sw = 0.0, sw2 = 0.0;
    std::vector<double> w(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        w[s] = std::exp(logw[s] - top);
        sw += w[s];
        sw2 += w[s] * w[s];
    }
    PosteriorEstimate est;
    est.mean.assign(D, 0.0);
    est.standard_error.assign(D, 0.0);
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t i = 0; i < D; ++i) est.mean[i] += w[s] * eps[s * D + i];
    }
    for (auto& m : est.mean) m /= sw;
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t i = 0; i < D; ++i) {
            const double d = eps[s * D + i] - est.mean[i];
            est.standard_error[i] += w[s] * w[s] * d * d;
        }
    }
    for (auto& se : est.standard_error) se = std::sqrt(se) / sw;
    est.effective_sample_size = sw * sw / sw2;
    est.low_ess = est.effective_sample_size < 100.0;
    return est;
}

std::vector<double> fd_gradient(const LossFn& loss, std::vector<double> params, double h,
                                std::span<const std::size_t> indices) {
    if (!(h >= 1e-6 && h <= 1e-3)) throw ParameterError("finite-difference step must lie in [1e-6, 1e-3]");
    std::vector<std::size_t> all;
    if (indices.empty()) {
        all.resize(params.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        indices = all;
    }
    std::vector<double> grad;
    grad.reserve(indices.size());
    for (std::size_t i : indices) {
        const double keep = params.at(i);
        params[i] = keep + h;
        const double up = loss(params);
        params[i] = keep - h;
        const double down = loss(params);
        params[i] = keep;
        grad.push_back((up - down) / (2.0 * h));
    }
    return grad;
}

double step_inverse_residual(std::span<const double> z, std::span<const double> e, double alpha_bar_prev,
                             double alpha_bar_t) {
    if (z.size() != e.size()) throw ShapeError("step_inverse_residual: size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        // noise injected into the auxiliary chain
        const double up = std::sqrt(alpha_bar_t) * (z[i] - std::sqrt(1.0 - alpha_bar_prev) * e[i]) /
                              std::sqrt(alpha_bar_prev) +
                          std::sqrt(1.0 - alpha_bar_t) * e[i];
        // the same noise removed during inference
        const double down = std::sqrt(alpha_bar_prev) * (up - std::sqrt(1.0 - alpha_bar_t) * e[i]) /
                                std::sqrt(alpha_bar_t) +
                            std::sqrt(1.0 - alpha_bar_prev) * e[i];
        worst = std::max(worst, std::abs(down - z[i]));
    }
    return worst;
}

double step_inverse_residual(const Tensor& z, const Tensor& e, int t_prev, int t, const NoiseSchedule& schedule) {
    return step_inverse_residual(z.values(), e.values(), schedule.alpha_bar(t_prev), schedule.alpha_bar(t));
}

}  // namespace erddci::oracle

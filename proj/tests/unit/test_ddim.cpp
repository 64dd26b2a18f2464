// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "erddci/ddim.hpp"
#include "erddci/errors.hpp"
#include "erddci/gmm.hpp"
#include "erddci/oracles.hpp"

using namespace erddci;

namespace {

GmmPredictor two_blob_predictor(const NoiseSchedule& s) {
    GmmDataModel m;
    m.weights = {0.5, 0.5};
    m.means = {Tensor::vector({1.0, 1.0, -1.0}), Tensor::vector({-1.0, 0.5, 1.0})};
    m.variance = 0.05;
    return GmmPredictor(m, s);
}

}  // namespace

TEST_CASE("forward step edge cases") {
    const NoiseSchedule unit = make_linear_schedule(3, 0.0, 0.0);
    Rng rng(1);
    const Tensor z = Tensor::vector({1.0, -2.0});
    CHECK(forward_step(z, 2, unit, rng) == z);
    CHECK(forward_jump(z, 3, unit, rng) == z);
    const NoiseSchedule s = make_default_schedule();
    const Tensor zero = Tensor::zeros({2});
    const Tensor jumped = forward_jump(z, 400, s, zero);
    CHECK(jumped[0] == doctest::Approx(std::sqrt(s.alpha_bar(400))).epsilon(1e-15));
    CHECK_THROWS_AS(forward_step(z, 0, s, rng), ParameterError);
}

TEST_CASE("forward step variance") {
    const NoiseSchedule s = make_default_schedule();
    const int t = 700;
    Rng rng(2);
    const Tensor z = Tensor::vector({1.0});
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = forward_step(z, t, s, rng)[0];
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    const double expect_var = 1.0 - s.alpha(t);
    CHECK(std::abs(mean - std::sqrt(s.alpha(t))) < 3.0 * std::sqrt(expect_var / n));
    // Standard error of a normal sample variance is var * sqrt(2 / n).
    CHECK(std::abs(var - expect_var) < 3.0 * expect_var * std::sqrt(2.0 / n));
}

TEST_CASE("jump matches iterated steps in distribution") {
    const NoiseSchedule s = make_linear_schedule(20, 0.01, 0.1);
    const int t = 12;
    Rng a(3), b(4);
    const Tensor z0 = Tensor::vector({0.8});
    const int n = 100000;
    double s1 = 0, q1 = 0, s2 = 0, q2 = 0;
    for (int i = 0; i < n; ++i) {
        Tensor z = z0;
        for (int k = 1; k <= t; ++k) z = forward_step(z, k, s, a);
        const double x = z[0];
        const double y = forward_jump(z0, t, s, b)[0];
        s1 += x; q1 += x * x; s2 += y; q2 += y * y;
    }
    const double m1 = s1 / n, m2 = s2 / n;
    const double v1 = q1 / n - m1 * m1, v2 = q2 / n - m2 * m2;
    const double var = 1.0 - s.alpha_bar(t);
    CHECK(std::abs(m1 - m2) < 3.0 * std::sqrt(2.0 * var / n));
    CHECK(std::abs(v1 - v2) < 3.0 * var * std::sqrt(4.0 / n));
    CHECK(m1 == doctest::Approx(std::sqrt(s.alpha_bar(t)) * 0.8).epsilon(0.01));
}

TEST_CASE("clean estimate inverts the forward jump") {
    const NoiseSchedule s = make_default_schedule();
    Rng rng(5);
    const Tensor z0 = sample_standard_normal(rng, {4, 4});
    const Tensor eps = sample_standard_normal(rng, {4, 4});
    for (int t : {1, 250, 999}) {
        const Tensor zt = forward_jump(z0, t, s, eps);
        CHECK(max_abs_diff(predict_x0(zt, eps, t, s), z0) < 1e-9);
        const Tensor x0 = predict_x0(zt, Tensor::zeros({4, 4}), t, s);
        CHECK(max_abs_diff(x0, (1.0 / std::sqrt(s.alpha_bar(t))) * zt) < 1e-12);
        // Re-substitution of a random guess.
        const Tensor guess = sample_standard_normal(rng, {4, 4});
        const Tensor est = predict_x0(zt, guess, t, s);
        CHECK(max_abs_diff(forward_jump(est, t, s, guess), zt) < 1e-9);
    }
}

TEST_CASE("step edge cases") {
    const NoiseSchedule s = make_default_schedule();
    const Tensor z = Tensor::vector({0.5, -1.5});
    const Tensor zero = Tensor::zeros({2});
    const Tensor up = ddim_invert_step(z, 100, 200, zero, s);
    const double ratio = std::sqrt(s.alpha_bar(200) / s.alpha_bar(100));
    CHECK(up[0] == doctest::Approx(0.5 * ratio).epsilon(1e-14));
    const NoiseSchedule flat = make_linear_schedule(4, 0.0, 0.0);
    CHECK(max_abs_diff(ddim_invert_step(z, 1, 2, Tensor::vector({3.0, 4.0}), flat), z) == 0.0);
    CHECK_THROWS_AS(ddim_invert_step(z, 5, 5, zero, s), ParameterError);
    CHECK_THROWS_AS(ddim_infer_step(z, 3, 7, zero, s), ParameterError);
}

TEST_CASE("step pair is an exact inverse for any noise") {
    const NoiseSchedule s = make_default_schedule();
    Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        const int t_prev = static_cast<int>(rng.below(999));
        const int t = t_prev + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(1000 - t_prev)));
        const Tensor z = sample_standard_normal(rng, {5});
        const Tensor e = sample_standard_normal(rng, {5});
        const Tensor back = ddim_infer_step(ddim_invert_step(z, t_prev, t, e, s), t, t_prev, e, s);
        CHECK(max_abs_diff(back, z) < 1e-9);
        CHECK(oracle::step_inverse_residual(z, e, t_prev, t, s) < 1e-9);
    }
}

TEST_CASE("constant predictor chain by hand") {
    const NoiseSchedule s = make_linear_schedule(10, 0.05, 0.2);
    const TimestepPlan plan({3, 8});
    const ConstantPredictor p(Tensor::vector({0.4}), 1);
    const Tensor z0 = Tensor::vector({1.0, -0.5});
    const Trajectory inv = ddim_invert(z0, p, Condition({1.0}), 1.0, plan, s);
    REQUIRE(inv.size() == 3);
    const double a3 = s.alpha_bar(3), a8 = s.alpha_bar(8), e = 0.4;
    for (std::size_t i = 0; i < 2; ++i) {
        const double z1 = std::sqrt(a3) * z0[i] + std::sqrt(1 - a3) * e;
        const double z2 = std::sqrt(a8) * (z1 - std::sqrt(1 - a3) * e) / std::sqrt(a3) + std::sqrt(1 - a8) * e;
        CHECK(inv[1].latent[i] == doctest::Approx(z1).epsilon(1e-14));
        CHECK(inv[2].latent[i] == doctest::Approx(z2).epsilon(1e-14));
    }
    CHECK(inv[2].timestep == 8);
    CHECK(p.call_count() == 2);

    const Trajectory back = ddim_infer(inv.back().latent, p, Condition({1.0}), 1.0, plan, s);
    CHECK(back.direction() == Direction::inference);
    CHECK(back.back().timestep == 0);
    CHECK(max_abs_diff(back.back().latent, z0) < 1e-9);
}

TEST_CASE("constant predictor round trip is exact for long plans") {
    const NoiseSchedule s = make_default_schedule();
    Rng rng(7);
    const Tensor z0 = sample_standard_normal(rng, {8, 8});
    const ConstantPredictor p(sample_standard_normal(rng, {8, 8}), 2);
    for (int n : {1, 10, 50}) {
        const TimestepPlan plan = make_plan(1000, n);
        const Trajectory inv = ddim_invert(z0, p, Condition({1.0, 0.0}), 2.0, plan, s);
        const Trajectory inf = ddim_infer(inv.back().latent, p, Condition({1.0, 0.0}), 2.0, plan, s);
        CHECK(max_abs_diff(inf.back().latent, z0) < 1e-9);
    }
}

TEST_CASE("mixture predictor round trip accumulates error") {
    const NoiseSchedule s = make_default_schedule();
    GmmPredictor p = two_blob_predictor(s);
    const Tensor z0 = Tensor::vector({0.9, 1.2, -0.8});
    const Condition c = Condition::one_hot(2, 0);
    for (int n : {10, 50}) {
        const TimestepPlan plan = make_plan(1000, n);
        p.reset_call_count();
        const Trajectory inv = ddim_invert(z0, p, c, 1.0, plan, s);
        CHECK(p.call_count() == static_cast<std::uint64_t>(n));
        const Trajectory inf = ddim_infer(inv.back().latent, p, c, 1.0, plan, s);
        CHECK(p.call_count() == static_cast<std::uint64_t>(2 * n));
        CHECK(max_abs_diff(inf.back().latent, z0) > 1e-6);
    }
    p.reset_call_count();
    ddim_invert(z0, p, c, 3.0, make_plan(1000, 10), s);
    CHECK(p.call_count() == 20);
}

TEST_CASE("trajectory invariants") {
    Trajectory inv(Direction::inversion);
    inv.push(0, Tensor::vector({1.0}));
    inv.push(5, Tensor::vector({2.0}));
    CHECK_THROWS_AS(inv.push(5, Tensor::vector({3.0})), ParameterError);
    CHECK_THROWS(inv.push(9, Tensor::vector({3.0, 4.0})));
    Trajectory inf(Direction::inference);
    inf.push(10, Tensor::vector({1.0}));
    CHECK_THROWS_AS(inf.push(12, Tensor::vector({1.0})), ParameterError);
}

TEST_CASE("trajectory save and load") {
    Rng rng(8);
    Trajectory tr(Direction::inference);
    for (int t : {30, 20, 10, 0}) tr.push(t, sample_standard_normal(rng, {2, 3}));
    const auto dir = std::filesystem::temp_directory_path() / "erddci_test_traj";
    std::filesystem::remove_all(dir);
    save_trajectory(dir, tr);
    CHECK(std::filesystem::exists(dir / "index.csv"));
    const Trajectory back = load_trajectory(dir);
    CHECK(back.direction() == Direction::inference);
    REQUIRE(back.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(back[i].timestep == tr[i].timestep);
        CHECK(back[i].latent == tr[i].latent);
    }
    std::filesystem::remove_all(dir);
}

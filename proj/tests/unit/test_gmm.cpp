// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>

#include "erddci/errors.hpp"
#include "erddci/gmm.hpp"
#include "erddci/oracles.hpp"

using namespace erddci;

namespace {

GmmDataModel single(Tensor mean, double variance) {
    GmmDataModel m;
    m.weights = {1.0};
    m.means = {std::move(mean)};
    m.variance = variance;
    return m;
}

// Conjugate posterior of eps for one component, written out on its own:
// z = sqrt(ab) x0 + sqrt(1-ab) eps with x0 ~ N(mu, s2).
double conjugate_eps(double z, double mu, double s2, double ab) {
    const double v = ab * s2 + 1.0 - ab;
    return std::sqrt(1.0 - ab) * (z - std::sqrt(ab) * mu) / v;
}

}  // namespace

TEST_CASE("model validation") {
    GmmDataModel m = single(Tensor::vector({0.0, 1.0}), 0.1);
    CHECK_NOTHROW(m.validate());
    m.weights = {0.5};
    CHECK_THROWS_AS(m.validate(), ParameterError);
    m = single(Tensor::vector({0.0}), -1.0);
    CHECK_THROWS_AS(m.validate(), ParameterError);
    m.variance = 0.0;
    m.weights = {0.5, 0.5};
    m.means.push_back(Tensor::vector({1.0, 2.0}));
    CHECK_THROWS_AS(m.validate(), ShapeError);
}

TEST_CASE("condition reweighting") {
    GmmDataModel m;
    m.weights = {0.5, 0.5};
    m.means = {Tensor::vector({0.0}), Tensor::vector({1.0})};
    m.condition_gain = 2.0;
    const auto prior = m.conditioned_weights(Condition::null(2));
    CHECK(prior[0] == doctest::Approx(0.5));
    const auto boosted = m.conditioned_weights(Condition::one_hot(2, 1));
    CHECK(boosted[1] == doctest::Approx(std::exp(2.0) / (1.0 + std::exp(2.0))).epsilon(1e-14));
    CHECK(boosted[0] + boosted[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("point mass closed form") {
    const NoiseSchedule s = make_default_schedule();
    const Tensor mu = Tensor::vector({0.3, -1.2, 2.0});
    const GmmPredictor p(single(mu, 0.0), s);
    const Tensor z = Tensor::vector({1.0, 0.5, -0.25});
    for (int t : {1, 10, 500, 1000}) {
        const double ab = s.alpha_bar(t);
        const Tensor eps = p.predict(z, Condition::null(1), t);
        for (std::size_t i = 0; i < 3; ++i) {
            const double expect = (z[i] - std::sqrt(ab) * mu[i]) / std::sqrt(1.0 - ab);
            CHECK(eps[i] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    const double ab = s.alpha_bar(300);
    const Tensor on_manifold = std::sqrt(ab) * mu;
    const Tensor zero = p.predict(on_manifold, Condition::null(1), 300);
    for (double v : zero.values()) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("vanishing variance approaches the point mass") {
    const NoiseSchedule s = make_default_schedule();
    const Tensor mu = Tensor::vector({0.7, -0.4});
    const GmmPredictor tiny(single(mu, 1e-8), s);
    const Tensor z = Tensor::vector({-0.3, 1.1});
    // The gap scales like s^2 / (1 - alpha_bar)^1.5, so timesteps start where
    // 1 - alpha_bar is well above s^2 (about 1e-3 at t = 10).
    for (int t : {10, 50, 999}) {
        const double ab = s.alpha_bar(t);
        const Tensor eps = tiny.predict(z, Condition::null(1), t);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(std::abs(eps[i] - (z[i] - std::sqrt(ab) * mu[i]) / std::sqrt(1.0 - ab)) < 1e-3);
        }
    }
}

TEST_CASE("conjugate single Gaussian at alpha_bar 0.5") {
    const NoiseSchedule s = make_linear_schedule(1, 0.5, 0.5);
    REQUIRE(s.alpha_bar(1) == 0.5);
    const GmmDataModel model = single(Tensor::vector({0.0}), 1.0);
    const GmmPredictor p(model, s);
    const Tensor z = Tensor::vector({1.0});
    const double eps = p.predict(z, Condition::null(1), 1)[0];
    CHECK(eps == doctest::Approx(conjugate_eps(1.0, 0.0, 1.0, 0.5)).epsilon(1e-14));
    CHECK(eps == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));

    Rng rng(2024);
    const auto mc = oracle::posterior_eps(model, {0.0}, z, 1, s, 1'000'000, rng);
    CHECK_FALSE(mc.low_ess);
    CHECK(std::abs(mc.mean[0] - eps) <= 3.0 * mc.standard_error[0]);
}

TEST_CASE("agreement with the sampling oracle on random queries") {
    const NoiseSchedule s = make_default_schedule();
    GmmDataModel model;
    model.weights = {0.3, 0.7};
    model.means = {Tensor::vector({1.0, -1.0}), Tensor::vector({-1.5, 0.5})};
    model.variance = 0.2;
    model.condition_gain = 1.5;
    const GmmPredictor p(model, s);
    Rng queries(5);
    Rng sampler(6);
    for (int q = 0; q < 10; ++q) {
        const int t = 100 + static_cast<int>(queries.below(900));
        const Tensor z = sample_standard_normal(queries, {2});
        const std::vector<double> cond = {queries.uniform(), 0.0};
        const Tensor eps = p.predict(z, Condition(cond), t);
        const auto mc = oracle::posterior_eps(model, cond, z, t, s, 200'000, sampler);
        // 20 comparisons; 4 standard errors keeps the family-wise false-alarm rate under 0.2%.
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(std::abs(mc.mean[i] - eps[i]) <= 4.0 * mc.standard_error[i] + 1e-9);
        }
    }
}

TEST_CASE("zero noise level is rejected") {
    const NoiseSchedule s = make_linear_schedule(3, 0.0, 0.0);
    const GmmPredictor p(single(Tensor::vector({0.0}), 1.0), s);
    CHECK_THROWS_AS(p.predict(Tensor::vector({1.0}), Condition::null(1), 2), SingularityError);
}

TEST_CASE("wrong latent size") {
    const GmmPredictor p(single(Tensor::vector({0.0, 0.0}), 1.0), make_default_schedule());
    CHECK_THROWS_AS(p.predict(Tensor::vector({1.0}), Condition::null(1), 2), ShapeError);
}

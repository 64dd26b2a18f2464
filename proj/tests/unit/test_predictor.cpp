// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "erddci/errors.hpp"
#include "erddci/predictor.hpp"
#include "erddci/rng.hpp"

using namespace erddci;

namespace {

// eps(z, c, t) = c0 * z + t, with a configurable wrong output shape.
class ScaledPredictor final : public Predictor {
public:
    explicit ScaledPredictor(bool wrong_shape = false) : wrong_shape_(wrong_shape) {}
    std::size_t condition_dim() const noexcept override { return 1; }

protected:
    Tensor evaluate(const Tensor& z, const Condition& c, int t) const override {
        if (wrong_shape_) return Tensor::zeros({z.size() + 1});
        Tensor out = c[0] * z;
        for (double& v : out.mutable_values()) v += t;
        return out;
    }

private:
    bool wrong_shape_;
};

// eps = c0 for the conditional call, a fixed value for the null condition.
class TwoValuePredictor final : public Predictor {
public:
    std::size_t condition_dim() const noexcept override { return 1; }

protected:
    Tensor evaluate(const Tensor& z, const Condition& c, int) const override {
        return Tensor::full(z.shape(), c[0] == 0.0 ? 0.5 : 1.0);
    }
};

}  // namespace

TEST_CASE("conditions") {
    CHECK(Condition::null(3).values().size() == 3);
    const Condition null = Condition::null(3);
    for (double v : null.values()) CHECK(v == 0.0);
    const Condition c = Condition::one_hot(3, 1);
    CHECK(c[1] == 1.0);
    CHECK(c[0] == 0.0);
    CHECK(c == Condition({0, 1, 0}));
    CHECK_THROWS(Condition::one_hot(3, 3));
    CHECK_THROWS(Condition({std::nan("")}));
}

TEST_CASE("guidance combine at the documented scales") {
    const TwoValuePredictor p;
    const Tensor z = Tensor::vector({0.0});
    const Condition c({1.0});
    CHECK(cfg_combine(p, z, c, 1, 2.0)[0] == 1.5);
    CHECK(cfg_combine(p, z, c, 1, 1.0)[0] == 1.0);
    CHECK(cfg_combine(p, z, c, 1, 0.0)[0] == 0.5);
    CHECK_THROWS_AS(cfg_combine(p, z, c, 1, -0.5), ParameterError);
    CHECK_THROWS_AS(cfg_combine(p, z, c, 1, std::nan("")), ParameterError);
}

TEST_CASE("guidance combine is affine in omega") {
    const ScaledPredictor p;
    Rng rng(4);
    const Tensor z = sample_standard_normal(rng, {6});
    const Condition c({0.7});
    const Tensor e_c = p.predict(z, c, 3);
    const Tensor e_0 = p.predict(z, Condition::null(1), 3);
    for (double w : {0.0, 0.5, 2.0, 3.0, 7.5}) {
        const Tensor got = cfg_combine(p, z, c, 3, w);
        for (std::size_t i = 0; i < z.size(); ++i) {
            CHECK(got[i] == doctest::Approx(e_0[i] + w * (e_c[i] - e_0[i])).epsilon(1e-14));
        }
    }
}

TEST_CASE("call accounting") {
    ScaledPredictor p;
    const Tensor z = Tensor::vector({1.0, 2.0});
    const Condition c({1.0});
    cfg_combine(p, z, c, 1, 1.0);
    CHECK(p.call_count() == 1);
    cfg_combine(p, z, c, 1, 2.0);
    CHECK(p.call_count() == 3);
    cfg_combine(p, z, c, 1, 0.0);
    CHECK(p.call_count() == 5);
    p.reset_call_count();
    CHECK(p.call_count() == 0);

    const CountingPredictor counter(p);
    cfg_combine(counter, z, c, 1, 3.0);
    CHECK(counter.call_count() == 2);
    CHECK(p.call_count() == 2);
}

TEST_CASE("shape and dimension contracts") {
    const ScaledPredictor p;
    CHECK_THROWS_AS(p.predict(Tensor::vector({1.0}), Condition({1.0, 2.0}), 1), ShapeError);
    const ScaledPredictor broken(true);
    CHECK_THROWS(broken.predict(Tensor::vector({1.0}), Condition({1.0}), 1));
}

TEST_CASE("constant predictor") {
    const ConstantPredictor zero(Tensor::vector({0.0}), 2);
    const Tensor out = zero.predict(Tensor::vector({3, 4, 5}), Condition::null(2), 10);
    CHECK(out == Tensor::vector({0, 0, 0}));
    const ConstantPredictor k(Tensor::vector({1.0, 2.0}), 1);
    CHECK(k.predict(Tensor::vector({9, 9}), Condition({1.0}), 1) == k.predict(Tensor::vector({-3, 0}), Condition({0.0}), 5));
    CHECK_THROWS(k.predict(Tensor::vector({1, 2, 3}), Condition({1.0}), 1));
}

TEST_CASE("predictions are pure") {
    const ScaledPredictor p;
    Rng rng(8);
    const Tensor z = sample_standard_normal(rng, {4, 4});
    CHECK(p.predict(z, Condition({0.3}), 7) == p.predict(z, Condition({0.3}), 7));
}

#include <pwlv/model.hpp>

#include <gtest/gtest.h>

#include <random>

namespace {

pwlv::LotkaVolterraParams case1() { return {1.0, 2.0, 1.0, 1.5, 1.0, 0.0, 0.0}; }

}  // namespace

TEST(Drift, WorkedExample) {
    const auto d = pwlv::drift(case1(), {1.0, 2.0});
    EXPECT_DOUBLE_EQ(d.x, -3.0);
    EXPECT_DOUBLE_EQ(d.y, 1.0);
}

TEST(Drift, OriginIsRest) {
    const auto d = pwlv::drift({0.7, 0.3, 1.2, 0.4, 2.0, 0.0, 0.0}, {0.0, 0.0});
    EXPECT_EQ(d, (pwlv::State{0.0, 0.0}));
}

TEST(Drift, PreyOnlyAxisIsLogistic) {
    const pwlv::LotkaVolterraParams p{0.0, 0.2, 0.1, 0.0, 0.0, 0.0, 0.0};
    for (double x : {0.1, 0.5, 2.0}) {
        const auto d = pwlv::drift(p, {x, 0.0});
        EXPECT_DOUBLE_EQ(d.x, -0.2 * x * x);
        EXPECT_DOUBLE_EQ(d.y, 0.0);
    }
}

TEST(Params, RejectsNegativeRatesByName) {
    auto p = case1();
    p.lambda1 = -1.0;
    try {
        p.validate();
        FAIL();
    } catch (const std::domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("lambda1"), std::string::npos);
    }
    p = case1();
    p.sigma2 = -0.1;
    EXPECT_THROW(p.validate(), std::domain_error);
    p = case1();
    p.r = std::nan("");
    EXPECT_THROW(p.validate(), std::domain_error);
}

TEST(Jacobian, AtOrigin) {
    const auto p = case1();
    const auto j = pwlv::jacobian(p, {0.0, 0.0});
    EXPECT_DOUBLE_EQ(j[0][0], p.r);
    EXPECT_DOUBLE_EQ(j[0][1], 0.0);
    EXPECT_DOUBLE_EQ(j[1][0], 0.0);
    EXPECT_DOUBLE_EQ(j[1][1], -p.lambda4);
}

TEST(Jacobian, AtPreyOnlyPoint) {
    const auto p = case1();
    const auto j = pwlv::jacobian(p, {p.r / p.lambda1, 0.0});
    EXPECT_DOUBLE_EQ(j[0][0], -p.r);
    EXPECT_DOUBLE_EQ(j[0][1], -p.r * p.lambda2 / p.lambda1);
    EXPECT_DOUBLE_EQ(j[1][0], 0.0);
    EXPECT_DOUBLE_EQ(j[1][1], p.r * p.lambda3 / p.lambda1 - p.lambda4);
}

TEST(Jacobian, MatchesCentralDifferences) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    const double h = 1e-6;
    for (int k = 0; k < 20; ++k) {
        const pwlv::LotkaVolterraParams p{u(rng), u(rng), u(rng), u(rng), u(rng), 0.0, 0.0};
        const pwlv::State s{u(rng), u(rng)};
        const auto j = pwlv::jacobian(p, s);
        const auto dx = (pwlv::drift(p, {s.x + h, s.y}) - pwlv::drift(p, {s.x - h, s.y})) * (0.5 / h);
        const auto dy = (pwlv::drift(p, {s.x, s.y + h}) - pwlv::drift(p, {s.x, s.y - h})) * (0.5 / h);
        EXPECT_NEAR(j[0][0], dx.x, 1e-5);
        EXPECT_NEAR(j[1][0], dx.y, 1e-5);
        EXPECT_NEAR(j[0][1], dy.x, 1e-5);
        EXPECT_NEAR(j[1][1], dy.y, 1e-5);
    }
}

TEST(Eigenvalues, DiagonalAndRotation) {
    const auto ev = pwlv::eigenvalues({{{2.0, 0.0}, {0.0, -3.0}}});
    EXPECT_DOUBLE_EQ(ev.first.real(), 2.0);
    EXPECT_DOUBLE_EQ(ev.second.real(), -3.0);
    const auto rot = pwlv::eigenvalues({{{0.0, -3.0}, {3.0, 0.0}}});
    EXPECT_DOUBLE_EQ(rot.first.real(), 0.0);
    EXPECT_DOUBLE_EQ(std::abs(rot.first.imag()), 3.0);
    EXPECT_EQ(rot.first, std::conj(rot.second));
}

TEST(Classify, TableOfCases) {
    using C = pwlv::Classification;
    using Z = std::complex<double>;
    EXPECT_EQ(pwlv::classify({Z(1, 0), Z(-1, 0)}), C::Saddle);
    EXPECT_EQ(pwlv::classify({Z(-0.5, 2), Z(-0.5, -2)}), C::StableSpiral);
    EXPECT_EQ(pwlv::classify({Z(0.5, 2), Z(0.5, -2)}), C::UnstableSpiral);
    EXPECT_EQ(pwlv::classify({Z(0, 3), Z(0, -3)}), C::Center);
    EXPECT_EQ(pwlv::classify({Z(-1, 0), Z(-2, 0)}), C::StableNode);
    EXPECT_EQ(pwlv::classify({Z(1, 0), Z(2, 0)}), C::UnstableNode);
    EXPECT_EQ(pwlv::classify({Z(0, 0), Z(-2, 0)}), C::Degenerate);
    EXPECT_THROW(pwlv::classify({Z(std::nan(""), 0), Z(1, 0)}), std::domain_error);
}

TEST(Classify, ConjugationInvariant) {
    using Z = std::complex<double>;
    for (const auto& v : {Z(-0.5, 2), Z(0.3, 1), Z(0, 4), Z(-1, 0)}) {
        EXPECT_EQ(pwlv::classify({v, std::conj(v)}), pwlv::classify({std::conj(v), v}));
    }
}

TEST(Equilibria, CaseOneParameters) {
    const auto res = pwlv::equilibria(case1());
    ASSERT_EQ(res.points.size(), 3u);
    EXPECT_TRUE(res.omitted.empty());
    EXPECT_EQ(res.points[0].point, (pwlv::State{0.0, 0.0}));
    EXPECT_DOUBLE_EQ(res.points[1].point.x, 0.5);
    EXPECT_DOUBLE_EQ(res.points[1].point.y, 0.0);
    EXPECT_NEAR(res.points[2].point.x, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(res.points[2].point.y, -1.0 / 3.0, 1e-15);
    EXPECT_TRUE(res.points[0].feasible);
    EXPECT_TRUE(res.points[1].feasible);
    EXPECT_FALSE(res.points[2].feasible);
    EXPECT_EQ(res.points[0].classification, pwlv::Classification::Saddle);
}

TEST(Equilibria, ZeroSelfLimitationOmitsPreyOnlyPoint) {
    auto p = case1();
    p.lambda1 = 0.0;
    const auto res = pwlv::equilibria(p);
    EXPECT_EQ(res.points.size(), 2u);
    ASSERT_EQ(res.omitted.size(), 1u);
    EXPECT_NE(res.omitted[0].find("lambda1"), std::string::npos);
}

TEST(Equilibria, DriftVanishesAtEveryPoint) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int k = 0; k < 200; ++k) {
        const pwlv::LotkaVolterraParams p{u(rng), u(rng), u(rng), u(rng), u(rng), 0.0, 0.0};
        for (const auto& e : pwlv::equilibria(p).points) {
            const auto d = pwlv::drift(p, e.point);
            EXPECT_LT(std::abs(d.x), 1e-12);
            EXPECT_LT(std::abs(d.y), 1e-12);
        }
    }
}

TEST(Equilibria, OriginSaddleAndBoundaryStabilityRule) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int k = 0; k < 500; ++k) {
        const pwlv::LotkaVolterraParams p{u(rng), u(rng), u(rng), u(rng), u(rng), 0.0, 0.0};
        const auto res = pwlv::equilibria(p);
        EXPECT_EQ(res.points[0].classification, pwlv::Classification::Saddle);
        const bool expect_stable = p.r * p.lambda3 < p.lambda1 * p.lambda4;
        EXPECT_EQ(pwlv::is_stable(res.points[1].classification), expect_stable);
    }
}

TEST(Lipschitz, PredatorConstant) {
    const auto [k1, k2] = pwlv::lipschitz_constants({1.0, 2.0, 1.0, 0.1, 0.11, 0.0, 0.0});
    EXPECT_DOUBLE_EQ(k1, 6.0);
    EXPECT_DOUBLE_EQ(k2, 0.1 + 0.11);
}

TEST(Lipschitz, PreyConstantIsRPlusTwoLambda1PlusLambda2) {
    const auto [k1, k2] = pwlv::lipschitz_constants({0.0, 0.2, 0.1, 0.0, 0.0, 0.0, 0.0});
    EXPECT_DOUBLE_EQ(k1, 0.5);
    EXPECT_DOUBLE_EQ(k2, 0.0);
}

TEST(Lipschitz, AllZero) {
    const auto [k1, k2] = pwlv::lipschitz_constants({0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
    EXPECT_EQ(k1, 0.0);
    EXPECT_EQ(k2, 0.0);
}

TEST(Lipschitz, BoundHoldsOnUnitBox) {
    const pwlv::LotkaVolterraParams p{0.0, 0.2, 0.1, 0.1, 0.11, 0.0, 0.0};
    const auto [k1, k2] = pwlv::lipschitz_constants(p);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double x1 = u(rng), x2 = u(rng), y = u(rng);
        const double lhs = std::abs(pwlv::drift(p, {x1, y}).x - pwlv::drift(p, {x2, y}).x);
        EXPECT_LE(lhs, k1 * std::abs(x1 - x2) + 1e-15);
        const double y1 = u(rng), y2 = u(rng), x = u(rng);
        const double rhs2 = std::abs(pwlv::drift(p, {x, y1}).y - pwlv::drift(p, {x, y2}).y);
        EXPECT_LE(rhs2, k2 * std::abs(y1 - y2) + 1e-15);
    }
}

TEST(Uniqueness, WorkedExamples) {
    const pwlv::FractionalOrder d(0.95);
    const auto a = pwlv::uniqueness_criterion({0.3, d, 1.0, 1.0, 0.0});
    EXPECT_NEAR(a.value, 0.3 / std::tgamma(1.95), 1e-15);
    EXPECT_NEAR(a.value, 0.30616, 1e-5);
    EXPECT_TRUE(a.holds);
    const auto b = pwlv::uniqueness_criterion({0.21, d, 1.0, 1.0, 0.0});
    EXPECT_NEAR(b.value, 0.21431, 1e-5);
    EXPECT_TRUE(b.holds);
}

TEST(Uniqueness, LargeConstantFails) {
    const auto r = pwlv::uniqueness_criterion({2.0, pwlv::FractionalOrder(0.95), 1.0, 1.0, 0.0});
    EXPECT_FALSE(r.holds);
}

TEST(Uniqueness, ZeroConstantHolds) {
    const auto r = pwlv::uniqueness_criterion({0.0, pwlv::FractionalOrder(0.4), 7.0, 1.0, 0.0});
    EXPECT_EQ(r.value, 0.0);
    EXPECT_TRUE(r.holds);
}

TEST(Uniqueness, MonotoneInConstantAndHorizon) {
    const pwlv::FractionalOrder d(0.8);
    double prev = -1.0;
    for (double k = 0.0; k < 2.0; k += 0.1) {
        const double v = pwlv::uniqueness_criterion({k, d, 2.0, 1.0, 0.5}).value;
        EXPECT_GT(v, prev);
        prev = v;
    }
    prev = -1.0;
    for (double t = 0.1; t < 5.0; t += 0.3) {
        const double v = pwlv::uniqueness_criterion({0.4, d, t, 1.0, 0.5}).value;
        EXPECT_GT(v, prev);
        prev = v;
    }
}

TEST(Uniqueness, RejectsDegenerateInputs) {
    const pwlv::FractionalOrder d(0.9);
    EXPECT_THROW(pwlv::uniqueness_criterion({0.3, d, 1.0, 1.0, -1.0}), std::domain_error);
    EXPECT_THROW(pwlv::uniqueness_criterion({0.3, d, 0.0, 1.0, 0.0}), std::domain_error);
    EXPECT_THROW(pwlv::uniqueness_criterion({-0.3, d, 1.0, 1.0, 0.0}), std::domain_error);
}

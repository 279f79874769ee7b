#include <sic/cxnum.hpp>
#include <sic/rng.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace sic;

namespace {

double ulp_of(double v) {
    const double a = std::fabs(v);
    return std::nextafter(a, INFINITY) - a;
}

Cx naive_mul(Cx a, Cx b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

} // namespace

TEST(CxMulReduced, IdentityAndKnownProduct) {
    const Cx z{0.37, -2.5};
    EXPECT_EQ(cx_mul_reduced(Cx{1, 0}, z), z);
    EXPECT_EQ(cx_mul_reduced(Cx{1, 2}, Cx{3, 4}), Cx(-5, 10));
}

// ulp measured at the operand-product scale |a||b|; near-cancelling results
// make a per-component ulp bound meaningless for any 3-multiply scheme.
TEST(CxMulReduced, MatchesFourMultiplyProductOnRandomPairs) {
    Rng rng(20240601, "cxmul");
    double worst = 0.0;
    for (int i = 0; i < 1000000; ++i) {
        const Cx a{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const Cx b{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const Cx r = cx_mul_reduced(a, b);
        const Cx n = naive_mul(a, b);
        const double scale = ulp_of(std::abs(a) * std::abs(b));
        worst = std::max({worst, std::fabs(r.real() - n.real()) / scale, std::fabs(r.imag() - n.imag()) / scale});
        const Cx rc = cx_mul_reduced(b, a);
        worst = std::max({worst, std::fabs(r.real() - rc.real()) / scale, std::fabs(r.imag() - rc.imag()) / scale});
    }
    EXPECT_LE(worst, 4.0);
}

TEST(Crelu, ComponentwiseClamp) {
    EXPECT_EQ(crelu({1, 2}), Cx(1, 2));
    EXPECT_EQ(crelu({-1, -2}), Cx(0, 0));
    EXPECT_EQ(crelu({3, -4}), Cx(3, 0));
}

TEST(Crelu, IdempotentAndPassThroughOnFirstQuadrant) {
    Rng rng(7, "crelu");
    for (int i = 0; i < 10000; ++i) {
        const Cx z{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        EXPECT_EQ(crelu(crelu(z)), crelu(z));
        if (z.real() >= 0 && z.imag() >= 0) EXPECT_EQ(crelu(z), z);
    }
}

TEST(CreluGrad, MasksAndZeroSubgradient) {
    auto g = crelu_grad({1, 2});
    EXPECT_EQ(g.re, 1.0);
    EXPECT_EQ(g.im, 1.0);
    g = crelu_grad({-1, 2});
    EXPECT_EQ(g.re, 0.0);
    EXPECT_EQ(g.im, 1.0);
    g = crelu_grad({0, 0});
    EXPECT_EQ(g.re, 0.0);
    EXPECT_EQ(g.im, 0.0);
}

TEST(Adam, ZeroGradientIsNoOp) {
    ParamVector p{0.5, -1.25, 3.0, 0.0};
    const ParamVector before = p;
    ParamVector g(4, 0.0);
    AdamState st(4);
    adam_step(p, g, st, {0.1});
    EXPECT_EQ(p, before);
    EXPECT_EQ(st.t, 1);
}

TEST(Adam, FirstStepHandEvaluated) {
    ParamVector p{0.0, 0.0};
    ParamVector g{1.0, 0.0};
    AdamState st(2);
    AdamConfig cfg;
    cfg.lr = 0.1;
    adam_step(p, g, st, cfg);
    // m_hat = 1, v_hat = 1  ->  p = -lr / (1 + eps)
    EXPECT_DOUBLE_EQ(p[0], -0.1 / (1.0 + 1e-8));
    EXPECT_EQ(p[1], 0.0);
    EXPECT_GE(st.v[0], 0.0);
}

TEST(Adam, ConstantGradientMovesMonotonically) {
    ParamVector p{1.0, 1.0};
    ParamVector g{0.5, -2.0};
    AdamState st(2);
    AdamConfig cfg;
    cfg.lr = 0.01;
    double prev0 = p[0], prev1 = p[1];
    for (int i = 0; i < 2; ++i) {
        adam_step(p, g, st, cfg);
        EXPECT_LT(p[0], prev0);
        EXPECT_GT(p[1], prev1);
        prev0 = p[0];
        prev1 = p[1];
    }
    EXPECT_EQ(st.t, 2);
}

TEST(Adam, LengthMismatchIsContractViolation) {
    ParamVector p(4, 0.0), g(2, 0.0);
    AdamState st(4);
    EXPECT_THROW(adam_step(p, g, st, {0.1}), ContractError);
}

TEST(FiniteDiff, QuadraticAndConstant) {
    ParamVector p{3.0};
    auto g = finite_diff_grad([](ConstParamView v) { return v[0] * v[0]; }, p, 1e-5);
    EXPECT_NEAR(g[0], 6.0, 1e-6);
    ParamVector q{1.0, -2.0, 5.0};
    auto z = finite_diff_grad([](ConstParamView) { return 4.2; }, q, 1e-5);
    for (double v : z) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(finite_diff_grad([](ConstParamView) { return 0.0; }, q, 0.0), ContractError);
}

TEST(Rng, StreamsAreIndependentAndReproducible) {
    Rng a(42, "alpha"), b(42, "alpha"), c(42, "beta");
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    EXPECT_NE(va, c.next_u64());
    Rng u(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
        EXPECT_LT(u.below(7), 7u);
    }
}

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "usrt/normal.hpp"
#include "usrt/quadrature.hpp"
#include "usrt/score.hpp"

using usrt::ScoreFunction;

TEST(Normal, QuantileMatchesErfBisection) {
    EXPECT_NEAR(usrt::normal_quantile(0.75), 0.6744897501960817, 1e-13);
    for (double p : {1e-300, 1e-20, 1e-8, 0.01, 0.2, 0.5, 0.8, 0.975}) {
        const double ref = oracle::probit(p);
        EXPECT_NEAR(usrt::normal_quantile(p), ref, 1e-12 * std::max(1.0, std::fabs(ref))) << p;
        EXPECT_DOUBLE_EQ(usrt::normal_quantile_upper(p), -usrt::normal_quantile(p));
    }
    EXPECT_NEAR(usrt::normal_quantile(1 - 1e-10), -oracle::probit(1e-10), 1e-5);
}

TEST(Normal, QuantileEndpoints) {
    EXPECT_EQ(usrt::normal_quantile(0.0), -INFINITY);
    EXPECT_EQ(usrt::normal_quantile(1.0), INFINITY);
    EXPECT_THROW(usrt::normal_quantile(1.5), usrt::DomainError);
    EXPECT_THROW(usrt::normal_quantile(NAN), usrt::DomainError);
}

TEST(Score, PointValues) {
    EXPECT_DOUBLE_EQ(ScoreFunction::sign().evaluate(0.3), 1.0);
    EXPECT_DOUBLE_EQ(ScoreFunction::wilcoxon().evaluate(0.3), 0.3);
    EXPECT_NEAR(ScoreFunction::normal().evaluate(0.5), oracle::probit(0.75), 1e-12);
    for (double q : {0.05, 0.3, 0.6, 0.75, 0.95}) {
        EXPECT_NEAR(ScoreFunction::redescending().evaluate(q), oracle::redescending(q, 20, 12, 19), 1e-13);
    }
}

TEST(Score, EvaluateRejectsEndpoints) {
    for (const auto& s : {ScoreFunction::sign(), ScoreFunction::normal()}) {
        EXPECT_THROW(s.evaluate(0.0), usrt::DomainError);
        EXPECT_THROW(s.evaluate(1.0), usrt::DomainError);
        EXPECT_THROW(s.evaluate(-0.1), usrt::DomainError);
    }
}

TEST(Score, NormalScoresGrowInUpperTail) {
    const auto s = ScoreFunction::normal();
    EXPECT_NEAR(s.evaluate_complement(1e-12), -oracle::probit(0.5e-12), 1e-11);
    EXPECT_GT(s.evaluate_complement(1e-300), 37.0);
    EXPECT_TRUE(std::isfinite(s.evaluate_complement(std::numeric_limits<double>::denorm_min())));
}

TEST(Score, UnitIntegrals) {
    EXPECT_DOUBLE_EQ(ScoreFunction::sign().integral(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(ScoreFunction::wilcoxon().integral(0, 1), 0.5);
    EXPECT_NEAR(ScoreFunction::normal().integral(0, 1), std::sqrt(2 / M_PI), 1e-8);
    EXPECT_NEAR(ScoreFunction::redescending().integral(0, 1), 0.4, 1e-8);
    EXPECT_DOUBLE_EQ(ScoreFunction::sign().integral_sq(0, 1), 1.0);
    EXPECT_NEAR(ScoreFunction::wilcoxon().integral_sq(0, 1), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(ScoreFunction::normal().integral_sq(0, 1), 1.0, 1e-8);
    const double ref = oracle::simpson([](double q) {
        const double v = oracle::redescending(q, 20, 12, 19);
        return v * v;
    }, 0, 1, 20000);
    EXPECT_NEAR(ScoreFunction::redescending().integral_sq(0, 1), ref, 1e-10);
}

TEST(Score, PartialIntegralsMatchSimpson) {
    struct Case {
        ScoreFunction s;
        std::function<double(double)> f;
    };
    const std::vector<Case> cases{
        {ScoreFunction::wilcoxon(), [](double q) { return q; }},
        {ScoreFunction::normal(), [](double q) { return oracle::probit(0.5 + 0.5 * q); }},
        {ScoreFunction::redescending({10, 3, 8}), [](double q) { return oracle::redescending(q, 10, 3, 8); }},
    };
    for (const auto& c : cases) {
        for (auto [lo, hi] : {std::pair{0.1, 0.4}, {0.3, 0.9}, {0.5, 0.99}, {0.7, 0.7001}, {0.0, 0.25}}) {
            const double ref = oracle::simpson(c.f, lo, hi, 4000);
            EXPECT_NEAR(c.s.integral(lo, hi), ref, 1e-9) << c.s.name() << " [" << lo << "," << hi << "]";
            const double ref2 = oracle::simpson([&](double q) { return c.f(q) * c.f(q); }, lo, hi, 4000);
            EXPECT_NEAR(c.s.integral_sq(lo, hi), ref2, 1e-9) << c.s.name();
        }
    }
}

TEST(Score, NormalTailIntegral) {
    // int_{1-x}^1 phi for normal scores is 2 pdf(Phi^{-1}(1 - x/2)).
    for (double x : {1e-2, 1e-4, 1e-8}) {
        const double z = oracle::probit(1 - x / 2);
        const double ref = 2 * std::exp(-z * z / 2) / std::sqrt(2 * M_PI);
        EXPECT_NEAR(ScoreFunction::normal().integral(1 - x, 1), ref, 1e-9 * ref + 1e-15);
    }
}

TEST(Score, RedescendingUnitIntegralIsRangeOverM) {
    for (auto p : {usrt::RedescendingParams{20, 12, 19}, {5, 1, 5}, {7, 2, 2}}) {
        const double expect = double(p.m_hi - p.m_lo + 1) / p.m;
        EXPECT_NEAR(ScoreFunction::redescending(p).integral(0, 1), expect, 1e-12);
    }
}

TEST(Score, ParseAndName) {
    EXPECT_EQ(ScoreFunction::parse("sign").name(), "sign");
    EXPECT_EQ(ScoreFunction::parse("wilcoxon").name(), "wilcoxon");
    EXPECT_EQ(ScoreFunction::parse("normal").name(), "normal");
    EXPECT_EQ(ScoreFunction::parse("redescending").name(), "redescending:20,12,19");
    EXPECT_EQ(ScoreFunction::parse("redescending:10,3,8").name(), "redescending:10,3,8");
    EXPECT_THROW(ScoreFunction::parse("foo"), usrt::ConfigError);
    EXPECT_THROW(ScoreFunction::parse("redescending:10,9,8"), usrt::ConfigError);
    EXPECT_THROW(ScoreFunction::parse("redescending:10,0,8"), usrt::ConfigError);
    EXPECT_THROW(ScoreFunction::parse("redescending:10,3"), usrt::ConfigError);
}

TEST(Score, TruncatedScoreZeroesBelowLevel) {
    const usrt::TruncatedScore t(ScoreFunction::wilcoxon(), 0.25);
    EXPECT_EQ(t.evaluate(0.5), 0.0);
    EXPECT_DOUBLE_EQ(t.evaluate(0.8), 0.8);
    EXPECT_NEAR(t.integral(0, 1), 0.5 * (1 - 0.75 * 0.75), 1e-15);
}

TEST(Quadrature, ConvergesAndReportsFailure) {
    EXPECT_NEAR(usrt::integrate([](double x) { return std::sin(x); }, 0, M_PI), 2.0, 1e-10);
    const auto bad = usrt::adaptive_simpson([](double x) { return 1.0 / x; }, 0.0, 1.0, {1e-12, 1e-12, 10});
    EXPECT_FALSE(bad.converged);
}

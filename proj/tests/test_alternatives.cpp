#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "usrt/alternatives.hpp"
#include "usrt/random.hpp"

using namespace usrt;

namespace {

std::vector<AlternativeDist> all_kinds() {
    return {AlternativeDist::normal(0.5, 1), AlternativeDist::laplace(0.5, 1), AlternativeDist::cauchy(0.5, 1),
            AlternativeDist::rare_effects(BaseKind::Normal, 1), AlternativeDist::rare_effects(BaseKind::Cauchy, 1),
            AlternativeDist::rare_effects(BaseKind::Laplace, 2, 0.3, -1)};
}

} // namespace

TEST(Alternatives, DensitiesAtZero) {
    EXPECT_NEAR(AlternativeDist::normal(0, 1).pdf(0), 1 / std::sqrt(2 * M_PI), 1e-15);
    EXPECT_DOUBLE_EQ(AlternativeDist::laplace(0, 1).pdf(0), 0.5);
    EXPECT_NEAR(AlternativeDist::cauchy(0, 1).pdf(0), 1 / M_PI, 1e-15);
}

TEST(Alternatives, CdfAgainstErf) {
    const auto d = AlternativeDist::normal(0.5, 1);
    EXPECT_NEAR(d.sf(0), oracle::phi_cdf(0.5), 1e-15);
    EXPECT_NEAR(d.sf(0), 0.6914625, 1e-7);
    for (double y : {-3.0, -0.2, 1.0, 4.0}) EXPECT_NEAR(d.cdf(y), oracle::phi_cdf(y - 0.5), 1e-15);
}

TEST(Alternatives, PdfIntegratesToOne) {
    for (const auto& d : all_kinds()) {
        // t = atan substitution covers heavy tails
        const double mass = oracle::simpson(
            [&](double t) {
                const double y = std::tan(t);
                return d.pdf(y) / (std::cos(t) * std::cos(t));
            },
            -M_PI / 2 + 1e-9, M_PI / 2 - 1e-9, 200000);
        EXPECT_NEAR(mass, 1.0, 1e-6) << d.name();
    }
}

TEST(Alternatives, LogPdfMatchesPdf) {
    for (const auto& d : all_kinds()) {
        for (double y : {-7.0, -1.0, 0.0, 0.3, 2.0, 6.0}) {
            EXPECT_NEAR(std::exp(d.log_pdf(y)), d.pdf(y), 1e-14 * std::max(1.0, d.pdf(y))) << d.name();
        }
    }
}

TEST(Alternatives, QuantileRoundTrips) {
    for (const auto& d : all_kinds()) {
        for (double p : {1e-6, 1e-3, 0.1, 0.5, 0.77, 0.999, 1 - 1e-6}) {
            EXPECT_NEAR(d.cdf(d.quantile(p)), p, 1e-9) << d.name() << " " << p;
            EXPECT_NEAR(d.sf(d.isf(p)), p, 1e-9 * std::max(p, 1e-3)) << d.name() << " " << p;
        }
        double prev = 0;
        for (double y = -50; y <= 50; y += 0.5) {
            const double c = d.cdf(y);
            EXPECT_GE(c, prev);
            prev = c;
        }
        EXPECT_LT(d.cdf(-1e12), 1e-9);
        EXPECT_GT(d.cdf(1e12), 1 - 1e-9);
    }
}

TEST(Alternatives, AbsoluteValueDistribution) {
    const auto sym = AlternativeDist::laplace(0, 2);
    for (double y : {0.1, 1.0, 5.0}) EXPECT_NEAR(sym.abs_cdf(y), 2 * sym.cdf(y) - 1, 1e-15);
    for (const auto& d : all_kinds()) {
        for (double x : {1e-6, 0.01, 0.5, 0.9, 1 - 1e-4}) {
            const double q = d.abs_quantile(x);
            EXPECT_NEAR(d.abs_cdf(q), x, 1e-9) << d.name() << " " << x;
            EXPECT_NEAR(d.abs_sf(q), 1 - x, 1e-9 * std::max(1 - x, 1e-3));
        }
    }
}

TEST(Alternatives, ParseAndName) {
    for (const auto& d : all_kinds()) EXPECT_EQ(AlternativeDist::parse(d.name()).name(), d.name());
    EXPECT_EQ(AlternativeDist::parse("rare:normal,1,0.1,5").name(), AlternativeDist::parse("rare:normal,1").name());
    EXPECT_EQ(AlternativeDist::parse("normal:0.5,1").name(), "normal:0.5,1");
    EXPECT_THROW(AlternativeDist::parse("normal:0.5"), ConfigError);
    EXPECT_THROW(AlternativeDist::parse("normal:0.5,-1"), ConfigError);
    EXPECT_THROW(AlternativeDist::parse("gumbel:0,1"), ConfigError);
    EXPECT_THROW(AlternativeDist::parse("rare:t,1"), ConfigError);
    EXPECT_THROW(AlternativeDist::parse("rare:normal,1,1.5,5"), ConfigError);
    EXPECT_THROW(AlternativeDist::parse("normal"), ConfigError);
}

TEST(Alternatives, SamplingIsDeterministic) {
    const auto d = AlternativeDist::rare_effects(BaseKind::Cauchy, 1);
    EXPECT_EQ(d.sample(100, 42), d.sample(100, 42));
    EXPECT_NE(d.sample(100, 42), d.sample(100, 43));
    Stream s(9);
    const auto a = s.substream(3).next_u64();
    EXPECT_EQ(Stream(9).substream(3).next_u64(), a);
    EXPECT_NE(Stream(9).substream(4).next_u64(), a);
}

TEST(Alternatives, NormalSampleMean) {
    const std::size_t n = 1000000;
    const auto y = AlternativeDist::normal(0.5, 1).sample(n, 1);
    double m = 0;
    for (double v : y) m += v;
    EXPECT_NEAR(m / n, 0.5, 4 / std::sqrt(double(n)));
}

TEST(Alternatives, RareComponentFrequency) {
    const std::size_t n = 1000000;
    const auto d = AlternativeDist::rare_effects(BaseKind::Cauchy, 1, 0.1, 5);
    Stream s(2);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += d.draw(s).component;
    EXPECT_NEAR(double(hits) / n, 0.1, 4 * std::sqrt(0.09 / n));
}

TEST(Alternatives, EmpiricalCdfWithinDkwBand) {
    const std::size_t n = 100000;
    const double band = std::sqrt(std::log(2 / 0.01) / (2.0 * n));
    std::uint64_t seed = 100;
    for (const auto& d : all_kinds()) {
        auto y = d.sample(n, ++seed);
        std::sort(y.begin(), y.end());
        double worst = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = d.cdf(y[i]);
            worst = std::max({worst, std::fabs(f - double(i) / n), std::fabs(f - double(i + 1) / n)});
        }
        EXPECT_LE(worst, band) << d.name();
    }
}

TEST(TailRatio, LaplaceClosedForm) {
    for (auto [tau, b] : {std::pair{0.5, 1.0}, {1.0, 2.0}, {0.2, 0.5}}) {
        const auto t = tail_ratio_liminf(AlternativeDist::laplace(tau, b));
        EXPECT_FALSE(t.diverges);
        EXPECT_NEAR(t.value, std::exp(2 * tau / b), 1e-9 * std::exp(2 * tau / b));
    }
}

TEST(TailRatio, CauchyTendsToOne) {
    const auto t = tail_ratio_liminf(AlternativeDist::cauchy(0.5, 1));
    EXPECT_FALSE(t.diverges);
    EXPECT_NEAR(t.value, 1.0, 1e-2);
    EXPECT_GT(t.value, 1.0);
}

TEST(TailRatio, NormalDiverges) {
    const auto t = tail_ratio_liminf(AlternativeDist::normal(0.5, 1));
    EXPECT_TRUE(t.diverges);
    EXPECT_TRUE(std::isinf(t.value));
    EXPECT_FALSE(tail_ratio_liminf(AlternativeDist::normal(0.0, 1)).diverges);
}

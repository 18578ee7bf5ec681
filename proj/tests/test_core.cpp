#include <smoothopt/core.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace smoothopt;

TEST(Philox, KnownAnswerVectors)
{
    // Published Random123 test vectors for philox4x32-10.
    auto a = detail::philox4x32_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(a[0], 0x6627e8d5u);
    EXPECT_EQ(a[1], 0xe169c58du);
    EXPECT_EQ(a[2], 0xbc57ac4cu);
    EXPECT_EQ(a[3], 0x9b00dbd8u);

    auto b = detail::philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(b[0], 0x408f276du);
    EXPECT_EQ(b[1], 0x41c83b0eu);
    EXPECT_EQ(b[2], 0xa20bc7c6u);
    EXPECT_EQ(b[3], 0x6d5451fdu);

    auto c = detail::philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(c[0], 0xd16cfe09u);
    EXPECT_EQ(c[1], 0x94fdccebu);
    EXPECT_EQ(c[2], 0x5001e420u);
    EXPECT_EQ(c[3], 0x24126ea1u);
}

TEST(RngStream, NormalsAreRandomAccess)
{
    RngStream rng{7, 3};
    std::vector<double> all(11);
    rng.fill_normal(all);
    for (std::size_t k = 0; k < all.size(); ++k)
        EXPECT_EQ(rng.normal(k), all[k]) << k;
    std::vector<double> tail(6);
    rng.fill_normal(tail, 5);
    for (std::size_t k = 0; k < tail.size(); ++k)
        EXPECT_EQ(tail[k], all[5 + k]);
}

TEST(RngStream, InverseNormalCdfRoundTrip)
{
    // Phi(x) = erfc(-x / sqrt 2) / 2 is an independent oracle for the quantile.
    for (double p : {1e-300, 1e-20, 1e-10, 1e-4, 0.01, 0.07, 0.3, 0.5, 0.6, 0.92, 0.999, 1 - 1e-12}) {
        const double x = detail::inverse_normal_cdf(p);
        const double back = 0.5 * std::erfc(-x / std::sqrt(2.0));
        EXPECT_NEAR(back / p, 1.0, 1e-13) << p;
    }
    EXPECT_EQ(detail::inverse_normal_cdf(0.5), 0.0);
    EXPECT_NEAR(detail::inverse_normal_cdf(0.975), 1.959963984540054, 1e-14);
}

TEST(RngStream, StreamsDiffer)
{
    RngStream a{1, 0}, b{1, 1}, c{2, 0};
    EXPECT_NE(a.normal(0), b.normal(0));
    EXPECT_NE(a.normal(0), c.normal(0));
    EXPECT_NE(a.substream(1).stream_id, a.substream(2).stream_id);
    EXPECT_EQ(a.substream(5).stream_id, a.substream(5).stream_id);
}

TEST(RngStream, UniformRange)
{
    RngStream rng{3, 4};
    double lo = 1, hi = 0, sum = 0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        const double u = rng.uniform(i);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    EXPECT_GE(lo, 0.0);
    EXPECT_LT(hi, 1.0);
    EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Softmax, EqualCostsUniform)
{
    std::vector<double> c{5, 5, 5};
    auto w = softmax_weights(c, 1.0);
    for (double x : w)
        EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, TwoToOneRatio)
{
    const double lam = 2.0;
    std::vector<double> c{0.0, lam * std::log(2.0)};
    auto w = softmax_weights(c, lam);
    EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-15);
    std::vector<double> big{1000.0, 1000.0 + lam * std::log(2.0)};
    auto wb = softmax_weights(big, lam);
    EXPECT_NEAR(wb[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(wb[1], 1.0 / 3.0, 1e-15);
}

TEST(Softmax, Errors)
{
    std::vector<double> empty;
    EXPECT_THROW(softmax_weights(empty, 1.0), ContractViolation);
    std::vector<double> bad{1.0, std::nan("")};
    EXPECT_THROW(softmax_weights(bad, 1.0), ContractViolation);
    std::vector<double> inf{1.0, INFINITY};
    EXPECT_THROW(softmax_weights(inf, 1.0), ContractViolation);
    std::vector<double> ok{1.0};
    EXPECT_THROW(softmax_weights(ok, 0.0), ContractViolation);
}

TEST(Softmax, ShiftInvarianceAndSum)
{
    RngStream rng{11, 0};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> c(40);
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] = 10.0 * rng.normal(trial * 40 + i);
        const double lam = 0.1 + rng.uniform(trial);
        auto w = softmax_weights(c, lam);
        std::vector<double> shifted = c;
        for (double& x : shifted)
            x += 1234.5;
        auto ws = softmax_weights(shifted, lam);
        double s = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            EXPECT_NEAR(w[i], ws[i], 1e-12);
            s += w[i];
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Softmax, PermutationRoundTrip)
{
    std::vector<double> c{3.0, -1.0, 2.5, 0.0, 7.0};
    std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    std::vector<double> pc(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        pc[i] = c[perm[i]];
    auto w = softmax_weights(c, 1.3);
    auto pw = softmax_weights(pc, 1.3);
    std::vector<double> back(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        back[perm[i]] = pw[i];
    for (std::size_t i = 0; i < c.size(); ++i)
        EXPECT_NEAR(back[i], w[i], 1e-15);
}

TEST(Softmax, TemperatureLimits)
{
    // The cold limit needs margin/lambda > log(1e9), i.e. a margin above ~0.41 range
    // at lambda = range/50; a margin of range/10 leaves the runner-up at e^-5.
    std::vector<double> c{0.0, 5.0, 7.0, 10.0};
    const double range = 10.0;
    auto hot = softmax_weights(c, 1e9 * range);
    for (double x : hot)
        EXPECT_LT(std::abs(x - 0.25), 1e-6);
    auto cold = softmax_weights(c, range / 50.0);
    EXPECT_GT(cold[0], 1.0 - 1e-9);
    auto inf = softmax_weights(c, INFINITY);
    for (double x : inf)
        EXPECT_EQ(x, 0.25);
}

TEST(Softmax, EffectiveSampleSize)
{
    std::vector<double> c{1, 1, 1, 1};
    EXPECT_NEAR(softmax_weights_full(c, 1.0).ess, 4.0, 1e-12);
    std::vector<double> w{1.0, 0.0, 0.0};
    EXPECT_EQ(effective_sample_size(w), 1.0);
}

TEST(Softmax, LogSumMatchesDirect)
{
    std::vector<double> c{0.3, 1.1, -0.4};
    auto r = softmax_weights_full(c, 0.7);
    double direct = 0;
    for (double x : c)
        direct += std::exp(-x / 0.7);
    EXPECT_NEAR(r.log_sum, std::log(direct), 1e-14);
}

TEST(SampleGaussian, MomentsAndDeterminism)
{
    Vector mean = Vector::Zero(2);
    auto y = sample_gaussian(mean, 1.0, 100000, RngStream{42, 0});
    for (int j = 0; j < 2; ++j) {
        const double m = y.row(j).mean();
        const double v = (y.row(j).array() - m).square().sum() / (y.cols() - 1);
        EXPECT_NEAR(m, 0.0, 0.02);
        EXPECT_NEAR(v, 1.0, 0.05);
    }
    auto y2 = sample_gaussian(mean, 1.0, 100000, RngStream{42, 0});
    EXPECT_TRUE((y.array() == y2.array()).all());

    Vector m2(2);
    m2 << 3.0, -1.0;
    auto z = sample_gaussian(m2, 4.0, 100000, RngStream{42, 1});
    for (int j = 0; j < 2; ++j) {
        const double m = z.row(j).mean();
        const double v = (z.row(j).array() - m).square().sum() / (z.cols() - 1);
        EXPECT_NEAR(m, m2[j], 0.04);
        EXPECT_NEAR(v, 4.0, 0.2);
    }
}

TEST(SampleGaussian, RejectsNonpositiveVariance)
{
    Vector mean = Vector::Zero(2);
    EXPECT_THROW(sample_gaussian(mean, 0.0, 5, RngStream{}), ContractViolation);
    EXPECT_THROW(sample_gaussian(mean, -1.0, 5, RngStream{}), ContractViolation);
}

TEST(KSmallest, TiesGoToLowestIndex)
{
    std::vector<double> c{2.0, 1.0, 1.0, 0.5, 1.0};
    auto idx = k_smallest(c, 3);
    ASSERT_EQ(idx.size(), 3u);
    EXPECT_EQ(idx[0], 3u);
    EXPECT_EQ(idx[1], 1u);
    EXPECT_EQ(idx[2], 2u);
    EXPECT_THROW(k_smallest(c, 0), ContractViolation);
}

TEST(LogSumExp, Stable)
{
    std::vector<double> v{1000.0, 1000.0};
    EXPECT_NEAR(log_sum_exp(v), 1000.0 + std::log(2.0), 1e-12);
}

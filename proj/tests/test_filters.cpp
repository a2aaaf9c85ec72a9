#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "nucleograde/filters.hpp"
#include "oracles.hpp"

using namespace nucleograde;
using namespace nucleograde::filters;

namespace {

double max_abs_diff(const GrayImage& a, const GrayImage& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

double sum(const GrayImage& g) { return std::accumulate(g.values().begin(), g.values().end(), 0.0); }

}  // namespace

TEST(Diffusion, ConstantImageAndZeroIterationsAreIdentity) {
    const GrayImage c(9, 7, 42.0);
    EXPECT_EQ(anisotropic_diffusion(c, {}), c);
    std::mt19937 rng(1);
    const auto img = oracle::random_image(8, 8, rng);
    DiffusionParams p;
    p.iterations = 0;
    EXPECT_EQ(anisotropic_diffusion(img, p), img);
}

TEST(Diffusion, ThreeByThreeImpulseMatchesCellOracle) {
    GrayImage img(3, 3, 0.0);
    img(1, 1) = 100.0;
    DiffusionParams p;
    p.iterations = 1;
    p.kappa = 50.0;
    p.rate = 0.2;
    const auto got = anisotropic_diffusion(img, p);
    // Hand rule: the centre loses rate * 4 * c(100) * 100, each edge
    // neighbour gains rate * c(100) * 100, corners are untouched.
    const double flux = 0.2 * std::exp(-4.0) * 100.0;
    EXPECT_NEAR(got(1, 1), 100.0 - 4.0 * flux, 1e-9);
    EXPECT_NEAR(got(0, 1), flux, 1e-9);
    EXPECT_NEAR(got(1, 0), flux, 1e-9);
    EXPECT_NEAR(got(0, 0), 0.0, 1e-9);
    EXPECT_LT(max_abs_diff(got, oracle::diffusion_direct(img, 1, 50.0, 0.2)), 1e-9);
}

TEST(Diffusion, RandomImagesMatchOracleAndConserveSum) {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto img = oracle::random_image(16, 16, rng);
        DiffusionParams p;
        p.iterations = 5;
        EXPECT_LT(max_abs_diff(anisotropic_diffusion(img, p), oracle::diffusion_direct(img, 5, 15.0, 0.2)), 1e-9);
        p.iterations = 50;
        const double s0 = sum(img);
        EXPECT_NEAR(sum(anisotropic_diffusion(img, p)), s0, 1e-6 * s0);
    }
}

TEST(Diffusion, UnitConductanceIsLinearHeatStep) {
    std::mt19937 rng(12);
    const auto img = oracle::random_image(16, 16, rng);
    DiffusionParams p;
    p.iterations = 3;
    p.rate = 0.25;
    p.conductance = Conductance::Unit;
    EXPECT_LT(max_abs_diff(anisotropic_diffusion(img, p), oracle::diffusion_direct(img, 3, 1.0, 0.25, true)), 1e-9);
}

TEST(Diffusion, InvalidParametersAreRejected) {
    const GrayImage img(4, 4);
    DiffusionParams p;
    p.rate = 0.3;
    EXPECT_THROW(anisotropic_diffusion(img, p), Error);
    p = {};
    p.kappa = 0.0;
    EXPECT_THROW(anisotropic_diffusion(img, p), Error);
    p = {};
    p.iterations = -1;
    EXPECT_THROW(anisotropic_diffusion(img, p), Error);
}

TEST(Gaussian, KernelIsNormalizedWithRadiusCeil3Sigma) {
    for (double s : {0.5, 1.0, 1.7, 4.0, 10.0}) {
        const auto k = gaussian_kernel(s);
        EXPECT_EQ(k.size(), static_cast<std::size_t>(2 * std::ceil(3.0 * s) + 1));
        EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-9);
    }
    EXPECT_THROW(gaussian_kernel(0.0), Error);
}

TEST(Gaussian, ConstantImageUnchanged) {
    const GrayImage c(12, 9, 77.0);
    const auto b = gaussian_blur(c, 2.0);
    for (double v : b.values()) EXPECT_NEAR(v, 77.0, 1e-9);
}

TEST(Gaussian, ImpulseReproducesKernel) {
    GrayImage img(21, 21, 0.0);
    img(10, 10) = 1.0;
    const auto k = gaussian_kernel(1.5);
    const int r = static_cast<int>(k.size() / 2);
    const auto b = gaussian_blur(img, 1.5);
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            EXPECT_NEAR(b(10 + dx, 10 + dy), k[std::size_t(dx + r)] * k[std::size_t(dy + r)], 1e-12);
}

TEST(Gaussian, RandomImagesMatchDirectConvolution) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto img = oracle::random_image(16, 16, rng);
        for (double s : {0.8, 2.0, 4.0}) EXPECT_LT(max_abs_diff(gaussian_blur(img, s), oracle::gaussian_direct(img, s)), 1e-9);
    }
}

TEST(LoG, ConstantAndAffineInputsGiveZero) {
    const auto flat = log_filter(GrayImage(10, 10, 5.0), 2.0);
    for (double v : flat.values()) EXPECT_NEAR(v, 0.0, 1e-9);
    GrayImage ramp(40, 40);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) ramp(x, y) = 3.0 * x + 2.0 * y;
    const auto l = log_filter(ramp, 1.0);
    for (int y = 5; y < 35; ++y)
        for (int x = 5; x < 35; ++x) EXPECT_NEAR(l(x, y), 0.0, 1e-9);
}

TEST(LoG, StepEdgeHasOneSignChangePerRow) {
    GrayImage step(30, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 30; ++x) step(x, y) = x < 15 ? 50.0 : 200.0;
    const auto l = log_filter(step, 2.0);
    // Brute-force stencil on the direct blur.
    const auto blurred = oracle::gaussian_direct(step, 2.0);
    for (int y = 0; y < 6; ++y) {
        int changes = 0;
        for (int x = 0; x < 30; ++x) {
            const double want = blurred(oracle::clampi(x + 1, 0, 29), y) + blurred(oracle::clampi(x - 1, 0, 29), y) +
                                blurred(x, oracle::clampi(y + 1, 0, 5)) + blurred(x, oracle::clampi(y - 1, 0, 5)) -
                                4.0 * blurred(x, y);
            EXPECT_NEAR(l(x, y), want, 1e-9);
        }
        double prev = 0.0;
        for (int x = 0; x < 30; ++x) {
            const double v = std::abs(l(x, y)) < 1e-9 ? 0.0 : l(x, y);
            if (v != 0.0) {
                if (prev != 0.0 && (v > 0) != (prev > 0)) ++changes;
                prev = v;
            }
        }
        EXPECT_EQ(changes, 1) << "row " << y;
    }
}

TEST(DoG, EqualSigmasGiveZeroAndImpulseCentreMatchesKernels) {
    std::mt19937 rng(5);
    const auto img = oracle::random_image(16, 16, rng);
    const auto zero = dog_filter(img, {3.0, 3.0});
    for (double v : zero.values()) EXPECT_DOUBLE_EQ(v, 0.0);

    GrayImage impulse(81, 81, 0.0);
    impulse(40, 40) = 1.0;
    const auto d = dog_filter(impulse, {4.0, 10.0});
    const auto k1 = gaussian_kernel(4.0);
    const auto k2 = gaussian_kernel(10.0);
    const double want = k1[k1.size() / 2] * k1[k1.size() / 2] - k2[k2.size() / 2] * k2[k2.size() / 2];
    EXPECT_NEAR(d(40, 40), want, 1e-12);
    // Close to the continuous 1/(2 pi s1^2) - 1/(2 pi s2^2).
    const double analytic = 1.0 / (2 * std::numbers::pi * 16.0) - 1.0 / (2 * std::numbers::pi * 100.0);
    EXPECT_NEAR(d(40, 40), analytic, 0.01 * analytic);
}

TEST(DoG, IsDifferenceOfBlursAndLinear) {
    std::mt19937 rng(6);
    const auto a = oracle::random_image(16, 16, rng);
    const auto b = oracle::random_image(16, 16, rng);
    const DoGParams p{1.0, 2.5};
    const auto d = dog_filter(a, p);
    const auto g1 = gaussian_blur(a, 1.0);
    const auto g2 = gaussian_blur(a, 2.5);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(d.values()[i], g1.values()[i] - g2.values()[i], 1e-12);

    GrayImage mix(16, 16);
    for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = 2.0 * a.values()[i] - 0.5 * b.values()[i];
    const auto dm = dog_filter(mix, p);
    const auto db = dog_filter(b, p);
    for (std::size_t i = 0; i < dm.size(); ++i)
        EXPECT_NEAR(dm.values()[i], 2.0 * d.values()[i] - 0.5 * db.values()[i], 1e-9);
    EXPECT_THROW(DoGParams({10.0, 4.0}).validate(), Error);
}

TEST(Bilateral, ConstantUnchangedAndLargeRangeIsGaussian) {
    const auto flat = bilateral_filter(GrayImage(9, 9, 31.0), 2.0, 10.0);
    for (double v : flat.values()) EXPECT_NEAR(v, 31.0, 1e-9);
    std::mt19937 rng(8);
    const auto img = oracle::random_image(16, 16, rng);
    EXPECT_LT(max_abs_diff(bilateral_filter(img, 1.5, 1e6), gaussian_blur(img, 1.5)), 1e-6);
}

TEST(Bilateral, MatchesDoubleLoopOracle) {
    std::mt19937 rng(9);
    const auto patch = oracle::random_image(5, 5, rng);
    EXPECT_LT(max_abs_diff(bilateral_filter(patch, 1.0, 30.0), oracle::bilateral_direct(patch, 1.0, 30.0)), 1e-9);
    EXPECT_THROW(bilateral_filter(patch, 0.0, 1.0), Error);
}

TEST(Gamma, SpecValues) {
    GrayImage img(4, 1);
    img(0, 0) = 0.0;
    img(1, 0) = 255.0;
    img(2, 0) = 127.5;
    img(3, 0) = 60.0;
    const auto g2 = gamma_correct(img, 2.0);
    EXPECT_DOUBLE_EQ(g2(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(g2(1, 0), 255.0);
    EXPECT_NEAR(g2(2, 0), 63.75, 1e-12);
    const auto g1 = gamma_correct(img, 1.0);
    for (int x = 0; x < 4; ++x) EXPECT_NEAR(g1(x, 0), img(x, 0), 1e-12);
    EXPECT_THROW(gamma_correct(img, 0.0), Error);
}

TEST(Threshold, IsStrict) {
    EXPECT_EQ(count_true(threshold(GrayImage(5, 5, 0.0), 200.0)), 0u);
    EXPECT_EQ(count_true(threshold(GrayImage(5, 5, 255.0), 200.0)), 25u);
    GrayImage img(5, 5, 200.0);
    img(3, 2) = 201.0;
    const auto m = threshold(img, 200.0);
    EXPECT_EQ(count_true(m), 1u);
    EXPECT_TRUE(m(3, 2));
    EXPECT_EQ(count_true(threshold_below(img, 200.5)), 24u);
}

TEST(Filters, PreserveDimensionsAndFiniteness) {
    std::mt19937 rng(10);
    const auto img = oracle::random_image(13, 7, rng);
    for (const auto& out : {anisotropic_diffusion(img, {}), gaussian_blur(img, 1.0), log_filter(img, 1.0),
                            dog_filter(img, {}), bilateral_filter(img, 1.0, 10.0), gamma_correct(img, 1.5)}) {
        EXPECT_EQ(out.width(), 13);
        EXPECT_EQ(out.height(), 7);
        EXPECT_TRUE(all_finite(out));
    }
}

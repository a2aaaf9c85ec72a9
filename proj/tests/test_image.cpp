#include <gtest/gtest.h>

#include "nucleograde/image.hpp"

using namespace nucleograde;

TEST(Grid, StoresRowMajorAndReplicatesBorders) {
    GrayImage g(3, 2);
    g(2, 1) = 7.0;
    EXPECT_EQ(g.size(), 6u);
    EXPECT_DOUBLE_EQ(g.values()[5], 7.0);
    EXPECT_DOUBLE_EQ(g.clamped(10, 10), 7.0);
    EXPECT_DOUBLE_EQ(g.clamped(-1, -1), 0.0);
    EXPECT_TRUE(g.contains(2, 1));
    EXPECT_FALSE(g.contains(3, 1));
}

TEST(Grid, NegativeDimensionsAreRejected) {
    EXPECT_THROW(GrayImage(-1, 2), Error);
    try {
        GrayImage bad(2, -3);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidImage);
    }
}

TEST(MaskOps, AndOrComplementSubset) {
    BinaryMask a(2, 2), b(2, 2);
    a(0, 0) = a(1, 0) = 1;
    b(1, 0) = b(1, 1) = 1;
    EXPECT_EQ(count_true(mask_and(a, b)), 1u);
    EXPECT_EQ(count_true(mask_or(a, b)), 3u);
    EXPECT_EQ(count_true(complement(a)), 2u);
    EXPECT_TRUE(is_subset(mask_and(a, b), a));
    EXPECT_FALSE(is_subset(a, b));
    EXPECT_THROW(mask_and(a, BinaryMask(3, 2)), Error);
}

TEST(Rescale, MapsRangeAndFlatImages) {
    GrayImage g(3, 1);
    g(0, 0) = -2.0;
    g(1, 0) = 0.0;
    g(2, 0) = 2.0;
    const auto r = rescale(g);
    EXPECT_DOUBLE_EQ(r(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(r(1, 0), 127.5);
    EXPECT_DOUBLE_EQ(r(2, 0), 255.0);
    const auto flat = rescale(GrayImage(4, 4, 9.0));
    for (double v : flat.values()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Region, CropAndFullImageAgree) {
    GrayImage g(5, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) g(x, y) = x + 10 * y;
    const auto c = crop(g, Box{1, 1, 3, 2});
    EXPECT_EQ(c.width(), 3);
    EXPECT_EQ(c.height(), 2);
    EXPECT_DOUBLE_EQ(c(0, 0), 11.0);
    EXPECT_DOUBLE_EQ(c(2, 1), 23.0);

    Region r{2, 1, BinaryMask(2, 2, 1)};
    const auto full = r.to_full(5, 4);
    EXPECT_EQ(count_true(full), 4u);
    EXPECT_TRUE(full(3, 2));
    EXPECT_TRUE(r.at(2, 1));
    EXPECT_FALSE(r.at(1, 1));
}

TEST(ErrorCode, MessageCarriesCodeName) {
    const Error e(ErrorCode::EmptyRegion, "nothing here");
    EXPECT_EQ(e.code(), ErrorCode::EmptyRegion);
    EXPECT_NE(std::string(e.what()).find("EmptyRegion"), std::string::npos);
}

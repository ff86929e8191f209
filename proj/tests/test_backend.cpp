#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "difreg/backend/provider.hpp"
#include "difreg/backend/rft.hpp"
#include "difreg/backend/synthetic_descriptor.hpp"
#include "difreg/core/error.hpp"
#include "support.hpp"

using namespace difreg;
using difreg::testing::TempDir;

namespace {

FeatureMap random_tensor(Rng& rng, int h, int w, int c, int layer) {
    FeatureMap fm(h, w, c, layer);
    for (auto& x : fm.data) x = static_cast<float>(rng.normal() * 3.0);
    return fm;
}

ErrorCode decode_error(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_rft(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "decode succeeded";
    return ErrorCode::InvalidInput;
}

void put_u32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
}

DepthMap surface(int w, int h, double shift_u = 0.0) {
    CameraIntrinsics k{585.0, 585.0, w / 2.0 - 0.5, h / 2.0 - 0.5, w, h};
    DepthMap d(k, RigidTransform::identity());
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            const double x = u - shift_u;
            d.at(u, v) = 2.0 + 0.3 * std::sin(x * 0.031) + 0.2 * std::cos(v * 0.047) + 0.1 * std::sin((x + v) * 0.013);
        }
    return d;
}

}  // namespace

TEST(Rft, SingleValueLayout) {
    FeatureMap fm(1, 1, 1, 6);
    fm.data[0] = 3.5f;
    const auto bytes = encode_rft(fm);
    ASSERT_EQ(bytes.size(), 24u);
    EXPECT_EQ(std::memcmp(bytes.data(), "RFT1", 4), 0);
    EXPECT_EQ(bytes[4], 1);  // version, little-endian u16
    EXPECT_EQ(bytes[5], 0);
    EXPECT_EQ(bytes[6], 6);  // layer id
    EXPECT_EQ(bytes[8], 1);  // H
    EXPECT_EQ(bytes[12], 1);  // W
    EXPECT_EQ(bytes[16], 1);  // C
    // 3.5f = 0x40600000
    EXPECT_EQ(bytes[20], 0x00);
    EXPECT_EQ(bytes[21], 0x00);
    EXPECT_EQ(bytes[22], 0x60);
    EXPECT_EQ(bytes[23], 0x40);
    const auto back = decode_rft(bytes);
    EXPECT_EQ(back.data[0], 3.5f);
    EXPECT_EQ(back.layer_id, 6);
}

TEST(Rft, TableFiveSizesRoundTrip) {
    TempDir dir("rft");
    Rng rng(1);
    const int sizes[][3] = {{8, 11, 0}, {16, 22, 3}, {32, 44, 6}};
    for (const auto& s : sizes) {
        const auto fm = random_tensor(rng, s[0], s[1], 4, s[2]);
        const auto path = dir / feature_file_name("pair", s[2]);
        write_feature_file(fm, path);
        const auto back = load_feature_file(path);
        EXPECT_EQ(back.height, s[0]);
        EXPECT_EQ(back.width, s[1]);
        EXPECT_EQ(back.layer_id, s[2]);
    }
}

TEST(Rft, LargeRandomTensorIsBitIdentical) {
    TempDir dir("rftbig");
    Rng rng(2);
    const auto fm = random_tensor(rng, 64, 88, 320, 9);
    write_feature_file(fm, dir / "big.rft");
    const auto back = load_feature_file(dir / "big.rft");
    ASSERT_EQ(back.data.size(), fm.data.size());
    EXPECT_EQ(std::memcmp(back.data.data(), fm.data.data(), fm.data.size() * sizeof(float)), 0);
    EXPECT_EQ(std::filesystem::file_size(dir / "big.rft"), kRftHeaderBytes + 64u * 88u * 320u * 4u);
}

TEST(Rft, CorruptionIsReportedByKind) {
    Rng rng(3);
    const auto good = encode_rft(random_tensor(rng, 2, 3, 4, 0));

    auto truncated = good;
    truncated.resize(truncated.size() - 3);
    EXPECT_EQ(decode_error(truncated), ErrorCode::FormatPayloadLength);
    EXPECT_EQ(decode_error({good.begin(), good.begin() + 12}), ErrorCode::FormatPayloadLength);

    auto magic = good;
    magic[3] = '2';
    EXPECT_EQ(decode_error(magic), ErrorCode::FormatMagic);

    auto huge = good;
    put_u32(huge, 8, 0xffffffffu);
    EXPECT_EQ(decode_error(huge), ErrorCode::FormatDimensionOverflow);
    auto overflow = good;
    put_u32(overflow, 8, 0x7fffffffu);
    put_u32(overflow, 12, 0x7fffffffu);
    put_u32(overflow, 16, 0x7fffffffu);
    EXPECT_EQ(decode_error(overflow), ErrorCode::FormatDimensionOverflow);
    auto zero = good;
    put_u32(zero, 16, 0);
    EXPECT_EQ(decode_error(zero), ErrorCode::FormatDimensionOverflow);

    auto nan = good;
    put_u32(nan, 20, 0x7fc00000u);
    EXPECT_EQ(decode_error(nan), ErrorCode::InvalidInput);
}

TEST(Rft, MissingFile) {
    TempDir dir("rftmissing");
    try {
        load_feature_file(dir / "nope.rft");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FileMissing);
    }
}

TEST(Rft, NamingConvention) {
    EXPECT_EQ(feature_file_name("scene7.ref.p", 3), "scene7.ref.p.layer3.rft");
}

TEST(Provider, NoneGivesNothing) {
    const auto p = make_provider(ProviderKind::None);
    EXPECT_TRUE(provide_features(*p, FeatureRequest{"x.ref.p"}, surface(64, 64)).empty());
}

TEST(Provider, SyntheticLayersFollowRequest) {
    const auto p = make_provider(ProviderKind::Synthetic);
    const auto d = surface(704, 512);
    const auto maps = provide_features(*p, FeatureRequest{"x.ref.p", {0, 3, 6}}, d);
    ASSERT_EQ(maps.size(), 3u);
    const int expected[][2] = {{8, 11}, {16, 22}, {32, 44}};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(maps[i].layer_id, std::vector<int>({0, 3, 6})[i]);
        EXPECT_EQ(maps[i].height, expected[i][0]);
        EXPECT_EQ(maps[i].width, expected[i][1]);
        EXPECT_EQ(maps[i].channels, kSyntheticChannels);
        EXPECT_EQ(maps[i].source_width, 704);
    }
}

TEST(Provider, FilesLoadByNamingConvention) {
    TempDir dir("provider");
    Rng rng(4);
    const auto l0 = random_tensor(rng, 8, 10, 5, 0), l3 = random_tensor(rng, 15, 20, 5, 3);
    write_feature_file(l0, dir / feature_file_name("p.src.q", 0));
    write_feature_file(l3, dir / feature_file_name("p.src.q", 3));
    const auto p = make_provider(ProviderKind::Files, dir.path());
    const auto d = surface(640, 480);
    const auto maps = provide_features(*p, FeatureRequest{"p.src.q", {0, 3}}, d);
    ASSERT_EQ(maps.size(), 2u);
    EXPECT_EQ(maps[0].data, l0.data);
    EXPECT_EQ(maps[1].data, l3.data);
    EXPECT_EQ(maps[1].source_height, 480);
    try {
        provide_features(*p, FeatureRequest{"p.src.q", {0, 6}}, d);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FileMissing);
    }
    write_feature_file(l3, dir / feature_file_name("p.src.q", 6));
    EXPECT_THROW(provide_features(*p, FeatureRequest{"p.src.q", {0, 6}}, d), Error);
}

TEST(Provider, RequestValidation) {
    EXPECT_THROW((FeatureRequest{"x", {3, 0}}.validate()), Error);
    EXPECT_THROW((FeatureRequest{"x", {0, 0}}.validate()), Error);
    EXPECT_THROW((FeatureRequest{"x", {13}}.validate()), Error);
    EXPECT_THROW(make_provider(ProviderKind::Files), Error);
    EXPECT_THROW(parse_provider_kind("gpu"), Error);
    EXPECT_EQ(parse_provider_kind("synthetic"), ProviderKind::Synthetic);
}

TEST(Synthetic, LayerStrides) {
    EXPECT_EQ(layer_stride(0), 64);
    EXPECT_EQ(layer_stride(3), 32);
    EXPECT_EQ(layer_stride(6), 16);
    EXPECT_EQ(layer_grid_size(704, 0), 11);
    EXPECT_EQ(layer_grid_size(480, 0), 8);
    EXPECT_EQ(layer_grid_size(640, 6), 40);
}

TEST(Synthetic, ConstantDepthHasZeroSpreadAndGradient) {
    CameraIntrinsics k;
    DepthMap d(k, RigidTransform::identity());
    for (int v = 0; v < k.height; ++v)
        for (int u = 0; u < k.width; ++u) d.at(u, v) = 1.7;
    const std::vector<int> layers{0, 3, 6};
    for (const auto& fm : synthetic_descriptor(d, layers))
        for (std::size_t p = 0; p < fm.pixel_count(); ++p) {
            EXPECT_EQ(fm.data[p * 8 + 0], 1.7f);
            for (int c = 4; c < 8; ++c) EXPECT_EQ(fm.data[p * 8 + static_cast<std::size_t>(c)], 0.0f);
            EXPECT_EQ(fm.data[p * 8 + 1], 0.0f);
        }
}

TEST(Synthetic, Deterministic) {
    const auto d = surface(320, 240);
    const std::vector<int> layers{0, 3, 6};
    const auto a = synthetic_descriptor(d, layers), b = synthetic_descriptor(d, layers);
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(std::memcmp(a[i].data.data(), b[i].data.data(), a[i].data.size() * sizeof(float)), 0);
}

TEST(Synthetic, EmptyWindowIsZero) {
    DepthMap d(CameraIntrinsics{}, RigidTransform::identity());
    const auto f = synthetic_descriptor_at(d, 6, 100, 100);
    for (float x : f) EXPECT_EQ(x, 0.0f);
}

TEST(SyntheticProperty, ShiftEquivariance) {
    const int w = 640, h = 480, shift = 10;
    const auto d = surface(w, h), moved = surface(w, h, shift);
    for (int layer : {3, 6}) {
        const int s = layer_stride(layer);
        const std::vector<int> one{layer};
        const auto grid = synthetic_descriptor(moved, one).front();
        std::size_t compared = 0;
        for (int i = 0; i < grid.height; ++i) {
            const double cv = (i + 0.5) * h / grid.height - 0.5;
            for (int j = 0; j < grid.width; ++j) {
                const double cu = (j + 0.5) * w / grid.width - 0.5;
                if (cu - shift - s < 2 || cu + s > w - 3 || cv - s < 2 || cv + s > h - 3) continue;
                const auto direct = synthetic_descriptor_at(d, layer, cu - shift, cv);
                for (int c = 0; c < kSyntheticChannels; ++c)
                    EXPECT_NEAR(grid.at(i, j, c), direct[static_cast<std::size_t>(c)], 1e-5) << layer << " " << i << " " << j;
                ++compared;
            }
        }
        EXPECT_GT(compared, 20u);
    }
    // A shift by exactly one stride moves the stride-16 grid by one cell.
    const auto one_cell = surface(w, h, 16);
    const std::vector<int> l6{6};
    const auto a = synthetic_descriptor(d, l6).front(), b = synthetic_descriptor(one_cell, l6).front();
    for (int i = 2; i < a.height - 2; ++i)
        for (int j = 2; j < a.width - 3; ++j)
            for (int c = 0; c < kSyntheticChannels; ++c) EXPECT_NEAR(b.at(i, j + 1, c), a.at(i, j, c), 1e-5);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "difreg/core/error.hpp"
#include "difreg/core/log.hpp"
#include "difreg/features/feature_ops.hpp"
#include "difreg/features/pca.hpp"
#include "difreg/projection/render.hpp"
#include "support.hpp"

using namespace difreg;

namespace {

FeatureMap random_map(Rng& rng, int h, int w, int c, int layer = 0, int src_h = 64, int src_w = 88) {
    FeatureMap fm(h, w, c, layer, src_h, src_w);
    for (auto& x : fm.data) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return fm;
}

double pixel_distance(const FeatureMap& fm, std::size_t a, std::size_t b) {
    const auto c = static_cast<std::size_t>(fm.channels);
    double s = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
        const double d = static_cast<double>(fm.data[a * c + k]) - fm.data[b * c + k];
        s += d * d;
    }
    return std::sqrt(s);
}

std::vector<std::vector<double>> covariance(const FeatureMap& fm) {
    const auto n = fm.pixel_count();
    const auto c = static_cast<std::size_t>(fm.channels);
    std::vector<double> mean(c, 0.0);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t k = 0; k < c; ++k) mean[k] += fm.data[p * c + k];
    for (auto& m : mean) m /= static_cast<double>(n);
    std::vector<std::vector<double>> cov(c, std::vector<double>(c, 0.0));
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t j = 0; j < c; ++j)
                cov[i][j] += (fm.data[p * c + i] - mean[i]) * (fm.data[p * c + j] - mean[j]);
    for (auto& row : cov)
        for (auto& x : row) x /= static_cast<double>(n);
    return cov;
}

// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double top_eigenvalue(const std::vector<std::vector<double>>& m) {
    const std::size_t n = m.size();
    std::vector<double> v(n, 1.0), next(n);
    double lambda = 0.0;
    for (int it = 0; it < 2000; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = 0.0;
            for (std::size_t j = 0; j < n; ++j) next[i] += m[i][j] * v[j];
        }
        double norm = 0.0;
        for (double x : next) norm += x * x;
        norm = std::sqrt(norm);
        lambda = norm;
        for (std::size_t i = 0; i < n; ++i) v[i] = next[i] / norm;
    }
    return lambda;
}

// Bilinear value at fractional (y, x) computed by the textbook four-weight formula.
double bilinear_oracle(const FeatureMap& fm, double y, double x, int c) {
    y = std::clamp(y, 0.0, fm.height - 1.0);
    x = std::clamp(x, 0.0, fm.width - 1.0);
    const int y0 = std::min(static_cast<int>(y), fm.height - 1), x0 = std::min(static_cast<int>(x), fm.width - 1);
    const int y1 = std::min(y0 + 1, fm.height - 1), x1 = std::min(x0 + 1, fm.width - 1);
    const double fy = y - y0, fx = x - x0;
    return (1 - fy) * (1 - fx) * fm.at(y0, x0, c) + (1 - fy) * fx * fm.at(y0, x1, c) + fy * (1 - fx) * fm.at(y1, x0, c) +
           fy * fx * fm.at(y1, x1, c);
}

PointFeatures features_of(const std::vector<std::vector<double>>& rows) {
    PointFeatures f;
    for (std::size_t i = 0; i < rows.size(); ++i) f.push_back(i, rows[i]);
    return f;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / std::sqrt(aa * bb);
}

std::vector<double> random_row(Rng& rng, std::size_t d) {
    std::vector<double> v(d);
    for (auto& x : v) x = rng.normal();
    return v;
}

class WarningCapture {
public:
    WarningCapture() {
        log::set_sink([this](log::Level l, const std::string& m) {
            if (l == log::Level::Warn) messages.push_back(m);
        });
    }
    ~WarningCapture() { log::set_sink(nullptr); }
    std::vector<std::string> messages;
};

}  // namespace

TEST(Pca, FullRankReductionIsAnIsometry) {
    Rng rng(1);
    const auto fm = random_map(rng, 10, 12, 6);
    const auto out = pca_reduce(fm, 6);
    ASSERT_EQ(out.channels, 6);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = rng.index(fm.pixel_count()), b = rng.index(fm.pixel_count());
        EXPECT_NEAR(pixel_distance(out, a, b), pixel_distance(fm, a, b), 1e-6);
    }
}

TEST(Pca, RankTwoMapExplainedByTwoComponents) {
    Rng rng(2);
    FeatureMap fm(16, 16, 5);
    const auto u = random_row(rng, 5), v = random_row(rng, 5);
    for (std::size_t p = 0; p < fm.pixel_count(); ++p) {
        const double a = rng.normal(), b = rng.normal();
        for (int k = 0; k < 5; ++k) fm.data[p * 5 + static_cast<std::size_t>(k)] = static_cast<float>(a * u[k] + b * v[k] + 0.5);
    }
    const FeatureMap* maps[] = {&fm};
    const auto basis = fit_pca(maps, 2);
    EXPECT_GE(basis.explained_fraction(), 0.9999);
    const auto cov = covariance(fm);
    EXPECT_NEAR(basis.variances.at(0), top_eigenvalue(cov), 1e-6 * top_eigenvalue(cov));
    double trace = 0.0;
    for (int k = 0; k < 5; ++k) trace += cov[k][k];
    EXPECT_NEAR(basis.variances[0] + basis.variances[1], trace, 1e-5 * trace);
}

TEST(Pca, ConstantMapReducesToZero) {
    FeatureMap fm(4, 4, 3);
    std::fill(fm.data.begin(), fm.data.end(), 2.5f);
    WarningCapture capture;
    const auto out = pca_reduce(fm, 2);
    EXPECT_EQ(out.channels, 2);
    EXPECT_TRUE(std::all_of(out.data.begin(), out.data.end(), [](float x) { return x == 0.0f; }));
}

TEST(Pca, RankDeficientPadsWithZerosAndWarns) {
    Rng rng(3);
    FeatureMap fm(8, 8, 4);
    for (std::size_t p = 0; p < fm.pixel_count(); ++p) {
        const double a = rng.normal();
        for (int k = 0; k < 4; ++k) fm.data[p * 4 + static_cast<std::size_t>(k)] = static_cast<float>(a * (k + 1));
    }
    WarningCapture capture;
    const auto out = pca_reduce(fm, 3);
    EXPECT_EQ(out.channels, 3);
    EXPECT_FALSE(capture.messages.empty());
    for (std::size_t p = 0; p < out.pixel_count(); ++p) {
        EXPECT_EQ(out.data[p * 3 + 1], 0.0f);
        EXPECT_EQ(out.data[p * 3 + 2], 0.0f);
    }
}

TEST(Pca, InvalidRequests) {
    Rng rng(4);
    const auto fm = random_map(rng, 2, 2, 3);
    EXPECT_THROW(pca_reduce(fm, 0), Error);
    FeatureMap bad(2, 2, 1);
    bad.data[0] = std::nanf("");
    EXPECT_THROW(pca_reduce(bad, 1), Error);
}

TEST(PcaProperty, OutputCovarianceIsDiagonalAndOrdered) {
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        auto fm = random_map(rng, 12, 14, 10);
        // Correlate the channels so the basis is non-trivial.
        for (std::size_t p = 0; p < fm.pixel_count(); ++p)
            for (int k = 1; k < 10; ++k) fm.data[p * 10 + k] += 0.7f * fm.data[p * 10 + k - 1];
        const auto out = pca_reduce(fm, 6);
        const auto cov = covariance(out);
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < 6; ++j)
                if (i != j) EXPECT_LT(std::abs(cov[i][j]), 1e-6);
            if (i > 0) EXPECT_GE(cov[i - 1][i - 1], cov[i][i] - 1e-9);
        }
    }
}

TEST(PcaProperty, SignConventionLargestLoadingPositive) {
    Rng rng(6);
    const auto fm = random_map(rng, 9, 9, 7);
    const FeatureMap* maps[] = {&fm};
    const auto basis = fit_pca(maps, 7);
    for (const auto& axis : basis.axes) {
        const auto it = std::max_element(axis.begin(), axis.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
        EXPECT_GT(*it, 0.0);
    }
}

TEST(Pca, JointBasisSharedAcrossMaps) {
    Rng rng(7);
    const auto a = random_map(rng, 6, 6, 5), b = random_map(rng, 6, 6, 5);
    const std::vector<FeatureMap> both{a, a};
    const auto joint = pca_reduce_joint(both, 3);
    EXPECT_EQ(joint[0].data, joint[1].data);
    const std::vector<FeatureMap> mixed{a, b};
    const auto j2 = pca_reduce_joint(mixed, 3);
    const FeatureMap* maps[] = {&a, &b};
    const auto basis = fit_pca(maps, 3);
    EXPECT_EQ(project_pca(b, basis).data, j2[1].data);
}

TEST(Upsample, SameSizeIsIdentity) {
    Rng rng(8);
    const auto fm = random_map(rng, 5, 7, 3);
    EXPECT_EQ(upsample_bilinear(fm, 5, 7).data, fm.data);
}

TEST(Upsample, ConstantStaysConstant) {
    FeatureMap fm(3, 4, 2);
    std::fill(fm.data.begin(), fm.data.end(), -1.25f);
    const auto out = upsample_bilinear(fm, 17, 23);
    EXPECT_TRUE(std::all_of(out.data.begin(), out.data.end(), [](float x) { return x == -1.25f; }));
}

TEST(Upsample, RampCentreIsMeanOfCorners) {
    FeatureMap fm(2, 2, 1);
    fm.data = {1.0f, 2.0f, 5.0f, 10.0f};
    const auto out = upsample_bilinear(fm, 3, 3);
    EXPECT_FLOAT_EQ(out.at(1, 1, 0), (1.0f + 2.0f + 5.0f + 10.0f) / 4.0f);
    EXPECT_EQ(out.at(0, 0, 0), 1.0f);
    EXPECT_EQ(out.at(2, 2, 0), 10.0f);
}

TEST(UpsampleProperty, CornerAlignedAndWithinChannelRange) {
    Rng rng(9);
    const auto fm = random_map(rng, 4, 6, 3);
    const auto out = upsample_bilinear(fm, 13, 21);
    for (int c = 0; c < 3; ++c) {
        float lo = 1e9f, hi = -1e9f;
        for (std::size_t p = 0; p < fm.pixel_count(); ++p) {
            lo = std::min(lo, fm.data[p * 3 + c]);
            hi = std::max(hi, fm.data[p * 3 + c]);
        }
        for (int y = 0; y < 13; ++y)
            for (int x = 0; x < 21; ++x) {
                EXPECT_GE(out.at(y, x, c), lo);
                EXPECT_LE(out.at(y, x, c), hi);
                EXPECT_NEAR(out.at(y, x, c), bilinear_oracle(fm, y * 3.0 / 12.0, x * 5.0 / 20.0, c), 1e-6);
            }
        EXPECT_EQ(out.at(12, 20, c), fm.at(3, 5, c));
    }
    EXPECT_THROW(upsample_bilinear(fm, 3, 6), Error);
}

TEST(Aggregate, TableFiveLayerShapes) {
    Rng rng(10);
    std::vector<FeatureMap> layers{random_map(rng, 8, 11, 160, 0, 512, 704), random_map(rng, 16, 22, 160, 3, 512, 704),
                                   random_map(rng, 32, 44, 160, 6, 512, 704)};
    const auto out = aggregate_layers(layers, 128);
    EXPECT_EQ(out.height, 32);
    EXPECT_EQ(out.width, 44);
    EXPECT_EQ(out.channels, 384);
    EXPECT_EQ(out.source_height, 512);
}

TEST(Aggregate, SingleLayerEqualsPcaReduce) {
    Rng rng(11);
    const std::vector<FeatureMap> one{random_map(rng, 6, 9, 8, 3)};
    EXPECT_EQ(aggregate_layers(one, 4).data, pca_reduce(one[0], 4).data);
}

TEST(Aggregate, DuplicateLayersGiveEqualHalves) {
    Rng rng(12);
    auto a = random_map(rng, 5, 5, 6, 0);
    auto b = a;
    b.layer_id = 3;
    const std::vector<FeatureMap> two{a, b};
    const auto out = aggregate_layers(two, 3);
    ASSERT_EQ(out.channels, 6);
    for (std::size_t p = 0; p < out.pixel_count(); ++p)
        for (int k = 0; k < 3; ++k) EXPECT_EQ(out.data[p * 6 + k], out.data[p * 6 + 3 + k]);
}

TEST(Aggregate, ChannelOrderFollowsAscendingLayer) {
    Rng rng(13);
    const auto l0 = random_map(rng, 4, 4, 3, 0), l6 = random_map(rng, 4, 4, 3, 6);
    const std::vector<FeatureMap> shuffled{l6, l0};
    const auto out = aggregate_layers(shuffled, 2);
    const auto first = pca_reduce(l0, 2);
    for (std::size_t p = 0; p < out.pixel_count(); ++p)
        for (int k = 0; k < 2; ++k) EXPECT_EQ(out.data[p * 4 + k], first.data[p * 2 + k]);
}

TEST(Aggregate, MismatchedSourceResolutionFails) {
    Rng rng(14);
    const std::vector<FeatureMap> maps{random_map(rng, 4, 4, 3, 0, 64, 64), random_map(rng, 8, 8, 3, 3, 128, 128)};
    EXPECT_THROW(aggregate_layers(maps, 2), Error);
}

TEST(AggregateProperty, SizeIsMaxAndChannelsSum) {
    Rng rng(15);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<FeatureMap> maps;
        int hmax = 0, wmax = 0;
        const int count = 1 + static_cast<int>(rng.index(3));
        for (int l = 0; l < count; ++l) {
            const int h = 2 + static_cast<int>(rng.index(10)), w = 2 + static_cast<int>(rng.index(10));
            hmax = std::max(hmax, h);
            wmax = std::max(wmax, w);
            maps.push_back(random_map(rng, h, w, 6, l * 3));
        }
        const auto out = aggregate_layers(maps, 4);
        EXPECT_EQ(out.height, hmax);
        EXPECT_EQ(out.width, wmax);
        EXPECT_EQ(out.channels, 4 * count);
    }
}

TEST(Sampling, ConstantMapGivesConstantFeature) {
    FeatureMap fm(4, 5, 2);
    for (std::size_t p = 0; p < fm.pixel_count(); ++p) {
        fm.data[p * 2] = 3.0f;
        fm.data[p * 2 + 1] = -1.0f;
    }
    PixelPointMap ppm(40, 32, 3);
    ppm.assign(0, 0, 0);
    ppm.assign(39, 31, 2);
    const auto f = sample_point_features(fm, ppm, 32, 40);
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(f.point_ids, (std::vector<std::size_t>{0, 2}));
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(f.vectors.row(i)[0], 3.0);
        EXPECT_EQ(f.vectors.row(i)[1], -1.0);
    }
}

TEST(Sampling, GridNodeReturnsNodeVector) {
    Rng rng(16);
    const auto fm = random_map(rng, 4, 4, 3);
    // Depth 8×8 over a 4×4 grid: node (y, x) has depth-pixel centre at ((2x+0.5), (2y+0.5)),
    // which is never an integer pixel, so use an identical raster size instead.
    const auto v = sample_at_pixel(fm, 4, 4, Pixel{2, 1});
    for (int c = 0; c < 3; ++c) EXPECT_EQ(v[c], fm.at(1, 2, c));
}

TEST(Sampling, MatchesScalarBilinearOracle) {
    Rng rng(17);
    const auto fm = random_map(rng, 8, 11, 5);
    const int dh = 480, dw = 640;
    PixelPointMap ppm(dw, dh, 50);
    for (std::size_t i = 0; i < 50; ++i) ppm.assign(static_cast<int>(rng.index(dw)), static_cast<int>(rng.index(dh)), i);
    const auto f = sample_point_features(fm, ppm, dh, dw);
    for (std::size_t r = 0; r < f.size(); ++r) {
        const auto px = ppm.pixel_coords(ppm.pixel_of(f.point_ids[r]));
        const double y = (px.v + 0.5) * 8.0 / dh - 0.5, x = (px.u + 0.5) * 11.0 / dw - 0.5;
        for (int c = 0; c < 5; ++c) EXPECT_NEAR(f.vectors.row(r)[c], bilinear_oracle(fm, y, x, c), 1e-6);
    }
}

TEST(Sampling, InvisiblePointsExcluded) {
    FeatureMap fm(2, 2, 1);
    PixelPointMap ppm(4, 4, 3);
    ppm.assign(1, 1, 1);
    const std::vector<std::size_t> wanted{0, 1, 2};
    const auto f = sample_point_features(fm, ppm, 4, 4, wanted);
    EXPECT_EQ(f.point_ids, std::vector<std::size_t>{1});
    EXPECT_THROW(sample_point_features(fm, ppm, 8, 8), Error);
}

TEST(Fusion, UnitHalvesGiveRootTwoNorm) {
    const auto geo = features_of({{1, 0, 0}}), diff = features_of({{0, 0.6, 0.8, 0}});
    const auto fused = fuse_features(geo, diff);
    double sq = 0.0;
    for (double x : fused.vectors.row(0)) sq += x * x;
    EXPECT_NEAR(std::sqrt(sq), std::sqrt(2.0), 1e-15);
    EXPECT_EQ(fused.dim(), 7u);
}

TEST(Fusion, ZeroHalfIsGuardedAndFlagged) {
    const auto fused = fuse_features(features_of({{0, 0}, {1, 1}}), features_of({{2, 0}, {0, 3}}));
    EXPECT_EQ(fused.featureless, (std::vector<std::uint8_t>{1, 0}));
    EXPECT_EQ(fused.vectors.row(0)[0], 0.0);
    EXPECT_EQ(fused.vectors.row(0)[2], 1.0);
}

TEST(Fusion, MismatchedPointSetsFail) {
    PointFeatures a = features_of({{1}}), b;
    b.push_back(5, std::vector<double>{1.0});
    EXPECT_THROW(fuse_features(a, b), Error);
}

TEST(FusionProperty, PositiveRescalingInvariance) {
    Rng rng(18);
    for (int trial = 0; trial < 200; ++trial) {
        const auto g = random_row(rng, 16), d = random_row(rng, 24);
        auto gs = g, ds = d;
        const double a = std::exp(rng.uniform(-8, 8)), b = std::exp(rng.uniform(-8, 8));
        for (auto& x : gs) x *= a;
        for (auto& x : ds) x *= b;
        const auto f1 = fuse_features(features_of({g}), features_of({d}));
        const auto f2 = fuse_features(features_of({gs}), features_of({ds}));
        for (std::size_t k = 0; k < f1.dim(); ++k) EXPECT_NEAR(f1.vectors.row(0)[k], f2.vectors.row(0)[k], 1e-12);
    }
}

TEST(FusionProperty, FusedCosineIsMeanOfHalfCosines) {
    Rng rng(19);
    for (int trial = 0; trial < 200; ++trial) {
        const auto ga = random_row(rng, 32), gb = random_row(rng, 32), da = random_row(rng, 48), db = random_row(rng, 48);
        const auto fa = fuse_features(features_of({ga}), features_of({da}));
        const auto fb = fuse_features(features_of({gb}), features_of({db}));
        EXPECT_NEAR(cosine(fa.vectors.row(0), fb.vectors.row(0)), (cosine(ga, gb) + cosine(da, db)) / 2.0, 1e-9);
    }
}

#include <gtest/gtest.h>

#include <charconv>
#include <numbers>
#include <sstream>

#include "nonconf/fractal.hpp"
#include "nonconf/rng.hpp"
#include "nonconf/thermo.hpp"
#include "systems.hpp"

using namespace nonconf;
using namespace nonconf::testing;

namespace {

PointCloud cloud_of(std::vector<PlanarPoint> pts) {
    PointCloud c;
    c.points = std::move(pts);
    return c;
}

void check_report_shape(const BoxCountReport& r) {
    for (std::size_t i = 1; i < r.counts.size(); ++i) EXPECT_GE(r.counts[i], r.counts[i - 1]);
    EXPECT_GE(r.slope, 0.0);
    EXPECT_LE(r.slope, 2.0);
    EXPECT_GE(r.r2, 0.0);
    EXPECT_LE(r.r2, 1.0);
}

} // namespace

TEST(LimitSetCloud, CantorLevelTwo) {
    const auto cloud = limit_set_cloud(cantor(), 2, PlanarPoint(0.0, 0.0));
    ASSERT_EQ(cloud.points.size(), 4u);
    const double expect[] = {0.0, 2.0 / 9.0, 2.0 / 3.0, 8.0 / 9.0};
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(cloud.points[i].x, expect[i], 1e-15);
        EXPECT_EQ(cloud.points[i].y, 0.0);
    }
    EXPECT_EQ(cloud.provenance, CloudProvenance::CylinderCenters);
}

TEST(LimitSetCloud, UnitCircle) {
    const SemigroupSystem sys = quad(0.0, 0.0);
    const auto cloud = limit_set_cloud(sys, 12);
    ASSERT_EQ(cloud.points.size(), 4096u);
    for (const auto& p : cloud.points)
        EXPECT_LE(std::abs(std::abs(p.as_complex()) - 1.0), std::pow(2.0, -12) * sys.region().diameter());
}

TEST(LimitSetCloud, DepthZeroAndCounts) {
    const auto c0 = limit_set_cloud(cantor(), 0, PlanarPoint(0.25, 0.5));
    ASSERT_EQ(c0.points.size(), 1u);
    EXPECT_EQ(c0.points[0].x, 0.25);
    EXPECT_EQ(limit_set_cloud(golden_mean(), 9).points.size(), count_admissible(TransitionMatrix::golden_mean(), 9));
    EXPECT_THROW(limit_set_cloud(cantor(), 30, {}, 1 << 20), Error);
}

TEST(LimitSetCloud, RefinementStaysClose) {
    const SemigroupSystem sys = quad(Complex{0.1, 0.0}, 0.1);
    const double l = global_bounds(sys, 32).l_max;
    const PlanarPoint base(sys.base_point());
    for (int depth = 1; depth <= 6; ++depth) {
        const auto words = admissible_words(sys.transition(), depth);
        const auto coarse = limit_set_cloud(sys, depth, base);
        const auto fine = limit_set_cloud(sys, depth + 1, base);
        for (std::size_t i = 0; i < fine.points.size(); ++i)
            EXPECT_LE(distance(fine.points[i], coarse.points[i / 2]), std::pow(l, depth) * 5.9);
    }
}

TEST(JuliaPreimages, FirstLevelCircle) {
    const auto cloud = julia_preimage_cloud(QuadConjugateFamily{0.0, 0.0}, 4.0, 1, 64);
    ASSERT_EQ(cloud.points.size(), 128u);
    for (const auto& p : cloud.points) EXPECT_NEAR(std::abs(p.as_complex()), 2.0, 1e-12);
    EXPECT_EQ(cloud.provenance, CloudProvenance::CirclePreimages);
}

TEST(JuliaPreimages, ClosedFormRadii) {
    for (int k = 1; k <= 10; ++k) {
        const auto cloud = julia_preimage_cloud(QuadConjugateFamily{0.0, 0.0}, 4.0, k, 16);
        const double r = std::pow(4.0, std::pow(2.0, -k));
        for (const auto& p : cloud.points) EXPECT_NEAR(std::abs(p.as_complex()), r, 1e-9);
    }
}

TEST(JuliaPreimages, CapReducesSeedsFirst) {
    const auto cloud = julia_preimage_cloud(QuadConjugateFamily{0.0, 0.0}, 4.0, 12, 256, 1 << 16);
    EXPECT_EQ(cloud.seeds, 16);
    EXPECT_EQ(cloud.depth, 12);
    EXPECT_EQ(cloud.points.size(), std::size_t{1} << 16);
    EXPECT_THROW(julia_preimage_cloud(QuadConjugateFamily{0.0, 0.0}, 4.0, 20, 1, 1 << 16), Error);
    EXPECT_THROW(julia_preimage_cloud(QuadConjugateFamily{0.0, 0.0}, 4.0, 0), Error);
}

TEST(JuliaPreimages, PerturbedClosedCurve) {
    const auto cloud = julia_preimage_cloud(QuadConjugateFamily{0.2, 0.0}, 4.0, 14, 256);
    const auto img = rasterize(cloud, 512, 512, {-1.6, -1.6, 1.6, 1.6});
    EXPECT_EQ(count_components(img, 255, 4), 1);
    EXPECT_EQ(count_components(img, 0, 8), 2);
}

TEST(BoxDimension, Segment) {
    std::vector<PlanarPoint> pts;
    for (int i = 0; i < 10000; ++i) pts.emplace_back(i / 9999.0, 0.5 * i / 9999.0);
    const auto r = box_dimension(cloud_of(pts), 0, 12);
    check_report_shape(r);
    EXPECT_GE(r.slope, 0.95);
    EXPECT_LE(r.slope, 1.05);
}

TEST(BoxDimension, Square) {
    SplitMix64 rng(8);
    std::vector<PlanarPoint> pts;
    for (int i = 0; i < 10000; ++i) pts.emplace_back(rng.uniform(), rng.uniform());
    // 4^6 boxes keep the expected occupancy of the finest scale above one point
    const auto r = box_dimension(cloud_of(pts), 0, 6);
    check_report_shape(r);
    EXPECT_GE(r.slope, 1.9);
    EXPECT_LE(r.slope, 2.05);
}

TEST(BoxDimension, CantorLevelTwelve) {
    const auto r = box_dimension(limit_set_cloud(cantor(), 12, PlanarPoint(0.0, 0.0)), 0, 16);
    check_report_shape(r);
    EXPECT_GE(r.slope, 0.60);
    EXPECT_LE(r.slope, 0.66);
}

TEST(BoxDimension, CircleAgreesWithBracket) {
    const SemigroupSystem sys = quad(0.0, 0.0);
    const auto db = dimension_bounds(sys, 1e-10, {8});
    const auto r = box_dimension(limit_set_cloud(sys, 14), 0, 12);
    EXPECT_NEAR(r.slope, 0.5 * (db.t_lo + db.t_up), 0.07);
}

TEST(BoxDimension, Errors) {
    EXPECT_THROW(box_dimension(cloud_of(std::vector<PlanarPoint>(10, PlanarPoint(0, 0))), 0, 8), Error);
    std::vector<PlanarPoint> same(2000, PlanarPoint(0.3, 0.3));
    try {
        box_dimension(cloud_of(same), 0, 8);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateFit);
    }
    std::vector<PlanarPoint> pts;
    for (int i = 0; i < 2000; ++i) pts.emplace_back(i, 0);
    EXPECT_THROW(box_dimension(cloud_of(pts), 0, 3), Error);
}

TEST(Rasterize, SinglePoint) {
    const auto img = rasterize(cloud_of({PlanarPoint(0.5, 0.5)}), 3, 3, {0, 0, 1, 1});
    EXPECT_EQ(img.lit(), 1u);
    EXPECT_EQ(img.at(1, 1), 255);
}

TEST(Rasterize, ClippedIsBlack) {
    const auto img = rasterize(cloud_of({PlanarPoint(5, 5), PlanarPoint(-3, 0)}), 16, 16, {0, 0, 1, 1});
    EXPECT_EQ(img.lit(), 0u);
    EXPECT_THROW(rasterize(cloud_of({}), 0, 4, {0, 0, 1, 1}), Error);
    EXPECT_THROW(rasterize(cloud_of({}), 4, 4, {0, 0, 0, 1}), Error);
}

TEST(Rasterize, UnitCircle) {
    std::vector<PlanarPoint> pts;
    for (int i = 0; i < 100000; ++i) pts.emplace_back(std::polar(1.0, 2 * std::numbers::pi * i / 100000));
    const auto img = rasterize(cloud_of(pts), 512, 512, {-2, -2, 2, 2});
    EXPECT_GE(img.lit(), 1000u);
    EXPECT_LE(img.lit(), 5000u);
    EXPECT_EQ(count_components(img, 255, 8), 1);
    EXPECT_EQ(count_components(img, 0, 4), 2);
}

TEST(Output, PgmHeaderAndPayload) {
    const auto img = rasterize(cloud_of({PlanarPoint(0.5, 0.5)}), 3, 2, {0, 0, 1, 1});
    std::ostringstream out;
    write_pgm(out, img);
    const std::string s = out.str();
    ASSERT_EQ(s.size(), std::string("P5\n3 2\n255\n").size() + 6);
    EXPECT_EQ(s.substr(0, 11), "P5\n3 2\n255\n");
}

TEST(Output, CsvSeventeenDigitsRoundTrip) {
    EXPECT_EQ(format_real(0.1), "0.10000000000000001");
    EXPECT_EQ(format_real(2.0), "2");
    const auto cloud = limit_set_cloud(quad(Complex{0.1, 0.0}, 0.1), 6);
    std::ostringstream out;
    write_csv(out, cloud);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,y");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        double x = 0, y = 0;
        std::from_chars(line.data(), line.data() + comma, x);
        std::from_chars(line.data() + comma + 1, line.data() + line.size(), y);
        EXPECT_EQ(x, cloud.points[rows].x);
        EXPECT_EQ(y, cloud.points[rows].y);
        ++rows;
    }
    EXPECT_EQ(rows, cloud.points.size());
    EXPECT_EQ(out.str().find('\r'), std::string::npos);
}

TEST(Output, CantorCsvRowCount) {
    std::ostringstream out;
    write_csv(out, limit_set_cloud(cantor(), 7));
    const std::string text = out.str();
    const auto lines = std::count(text.begin(), text.end(), '\n');
    EXPECT_EQ(lines, 1 + 128);
}

TEST(Output, Deterministic) {
    const auto a = julia_preimage_cloud(QuadConjugateFamily{Complex{0.1, 0.1}, 0.05}, 4.0, 8, 32);
    const auto b = julia_preimage_cloud(QuadConjugateFamily{Complex{0.1, 0.1}, 0.05}, 4.0, 8, 32);
    std::ostringstream sa, sb;
    write_csv(sa, a);
    write_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
}

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "pgeval/roadnet.hpp"

using namespace pgeval;

namespace {

// Exhaustive nearest-cell oracle: minimal squared distance, then smallest (ix, iy).
Cell brute_nearest(const std::vector<Cell>& occupied, const Cell& q) {
    Cell best = occupied.front();
    for (const auto& c : occupied) {
        const auto d = squared_distance(c, q), bd = squared_distance(best, q);
        if (d < bd || (d == bd && c < best)) best = c;
    }
    return best;
}

RoadStructure single_road(std::vector<Point2> pts) {
    RoadStructure m;
    m.name = "t";
    m.roads.push_back(std::move(pts));
    return m;
}

} // namespace

TEST(BoundingBox, Examples) {
    EXPECT_EQ(bounding_box(single_road({{0, 0}, {10, 5}})), (BBox{{0, 0}, {10, 5}}));
    RoadStructure two;
    two.roads = {{{-3, 2}, {1, 4}}, {{7, 9}, {0, 3}}};
    EXPECT_EQ(bounding_box(two), (BBox{{-3, 2}, {7, 9}}));
    EXPECT_THROW((void)bounding_box(RoadStructure{}), EmptyMapError);
}

TEST(Rasterize, FloorDivision) {
    const GridSpec spec{2.0, 2.0, {0, 0}};
    const std::vector<Point2> pts = {{5.3, 7.9}, {-0.1, 0.0}};
    const auto cells = rasterize(pts, spec);
    ASSERT_EQ(cells.size(), 2u);
    EXPECT_EQ(cells[0], (Cell{2, 3}));
    EXPECT_EQ(cells[1], (Cell{-1, 0}));
}

TEST(Rasterize, KeepsRepeatedCells) {
    const GridSpec spec{2.0, 2.0, {0, 0}};
    std::vector<Point2> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({static_cast<double>(i), 0.5});
    const auto cells = rasterize(pts, spec);
    ASSERT_EQ(cells.size(), 10u);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(cells[i], (Cell{i / 2, 0}));
}

TEST(Rasterize, TranslationCovariantOnGridMultiples) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    std::uniform_int_distribution<int> k(-20, 20);
    const GridSpec spec{2.0, 3.0, {0.25, -1.5}};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Point2> pts;
        for (int i = 0; i < 10; ++i) pts.push_back({std::round(u(rng) * 64) / 64, std::round(u(rng) * 64) / 64});
        const int kx = k(rng), ky = k(rng);
        std::vector<Point2> shifted;
        for (const auto& p : pts) shifted.push_back({p.x + kx * spec.lambda_x, p.y + ky * spec.lambda_y});
        const auto a = rasterize(pts, spec), b = rasterize(shifted, spec);
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(b[i], (Cell{a[i].ix + kx, a[i].iy + ky}));
    }
}

TEST(GridFor, OriginHalfCellBelowBox) {
    const auto spec = grid_for(BBox{{10, 20}, {30, 40}}, 2.0, 2.0);
    EXPECT_EQ(spec.origin, (Point2{9, 19}));
    EXPECT_EQ(rasterize_point({10, 20}, spec), (Cell{0, 0}));
    EXPECT_THROW((void)grid_for(BBox{}, 0.0, 2.0), ParameterError);
}

TEST(BuildRoadIndex, HorizontalRoadIsOneRow) {
    std::vector<Point2> road;
    for (int i = 0; i <= 40; ++i) road.push_back({static_cast<double>(i), 0.0});
    const auto map = single_road(road);
    const auto [grid, index] = build_road_index(map, grid_for(bounding_box(map), 2.0, 2.0));
    std::set<std::int64_t> rows;
    for (const auto& c : grid.occupied()) rows.insert(c.iy);
    EXPECT_EQ(rows, std::set<std::int64_t>{0});
    EXPECT_EQ(grid.occupied().size(), 21u);
    for (const auto& c : grid.occupied()) EXPECT_EQ(nearest_road_cell(index, c), c);
    EXPECT_THROW((void)build_road_index(RoadStructure{}, GridSpec{}), EmptyMapError);
}

TEST(NearestRoadCell, Examples) {
    const std::vector<Cell> one = {{0, 0}};
    EXPECT_EQ(NearestRoadIndex(one, 8).nearest({5, 5}), (Cell{0, 0}));
    const std::vector<Cell> two = {{0, 0}, {10, 0}};
    EXPECT_EQ(NearestRoadIndex(two, 8).nearest({4, 0}), (Cell{0, 0}));
    const std::vector<Cell> tie = {{4, 0}, {0, 0}};
    EXPECT_EQ(NearestRoadIndex(tie, 8).nearest({2, 0}), (Cell{0, 0}));
    const std::vector<Cell> vtie = {{0, 4}, {0, 0}};
    EXPECT_EQ(NearestRoadIndex(vtie, 8).nearest({0, 2}), (Cell{0, 0}));
}

TEST(NearestRoadCell, CrossMapMatchesExhaustiveScan) {
    RoadStructure cross;
    std::vector<Point2> h, v;
    for (int i = -50; i <= 50; ++i) {
        h.push_back({static_cast<double>(i), 0.0});
        v.push_back({0.0, static_cast<double>(i)});
    }
    cross.roads = {h, v};
    const auto [grid, index] = build_road_index(cross, grid_for(bounding_box(cross), 2.0, 2.0), 16);
    const std::vector<Cell> occ(grid.occupied().begin(), grid.occupied().end());
    for (std::int64_t x = -30; x < 90; ++x)
        for (std::int64_t y = -30; y < 90; y += 3) {
            const Cell q{x, y};
            const Cell got = index.nearest(q);
            ASSERT_EQ(got, brute_nearest(occ, q)) << x << "," << y;
        }
}

TEST(NearestRoadCell, RandomSetsMatchExhaustiveScan) {
    std::mt19937_64 rng(2024);
    for (int set = 0; set < 20; ++set) {
        std::uniform_int_distribution<int> count(1, 200), coord(-40, 40), q(-120, 120);
        std::vector<Cell> occ;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) occ.push_back({coord(rng), coord(rng)});
        const NearestRoadIndex index(occ, 10);
        std::sort(occ.begin(), occ.end());
        occ.erase(std::unique(occ.begin(), occ.end()), occ.end());
        for (const auto& c : occ) ASSERT_EQ(index.nearest(c), c);
        for (int i = 0; i < 1000; ++i) {
            const Cell query{q(rng), q(rng)};
            const Cell got = index.nearest(query);
            const Cell want = brute_nearest(occ, query);
            ASSERT_EQ(squared_distance(got, query), squared_distance(want, query));
            ASSERT_EQ(got, want);
        }
    }
}

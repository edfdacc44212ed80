#pragma once

// Road network model: polyline roads, their occupancy grid and an exact
// nearest-road-cell index.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgeval/error.hpp"
#include "pgeval/geo.hpp"

namespace pgeval {

using Polyline = std::vector<Point2>;

struct RoadStructure {
    std::vector<Polyline> roads;
    std::string name;
    std::optional<double> area_acres;
    /// Set when the map was projected from GPS; needed to map results back.
    std::optional<double> central_meridian;
};

/// Integer grid cell index. Ordered lexicographically on (ix, iy).
struct Cell {
    std::int64_t ix = 0;
    std::int64_t iy = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

[[nodiscard]] inline std::int64_t squared_distance(const Cell& a, const Cell& b) noexcept {
    const std::int64_t dx = a.ix - b.ix, dy = a.iy - b.iy;
    return dx * dx + dy * dy;
}

[[nodiscard]] inline double distance(const Cell& a, const Cell& b) noexcept {
    return std::sqrt(static_cast<double>(squared_distance(a, b)));
}

struct GridSpec {
    double lambda_x = 2.0;
    double lambda_y = 2.0;
    Point2 origin;

    void validate() const {
        if (!(lambda_x > 0.0) || !(lambda_y > 0.0) || !std::isfinite(lambda_x) || !std::isfinite(lambda_y)) {
            throw ParameterError("grid sizes must be positive");
        }
        if (!origin.finite()) throw ParameterError("grid origin must be finite");
    }

    /// Center of a cell in map meters.
    [[nodiscard]] Point2 cell_center(const Cell& c) const noexcept {
        return {origin.x + (static_cast<double>(c.ix) + 0.5) * lambda_x,
                origin.y + (static_cast<double>(c.iy) + 0.5) * lambda_y};
    }
};

[[nodiscard]] inline BBox bounding_box(const RoadStructure& map) {
    std::optional<BBox> box;
    for (const auto& road : map.roads) {
        for (const auto& p : road) {
            if (box) box->expand(p);
            else box = BBox{p, p};
        }
    }
    if (!box) throw EmptyMapError("road map '" + map.name + "' has no knots");
    return *box;
}

/// Grid registered to a map: the origin sits half a cell below the
/// bounding-box minimum so that axis-aligned roads on the box edge fall on
/// cell centers rather than cell boundaries.
[[nodiscard]] inline GridSpec grid_for(const BBox& bounds, double lambda_x, double lambda_y) {
    GridSpec spec{lambda_x, lambda_y, {bounds.min.x - 0.5 * lambda_x, bounds.min.y - 0.5 * lambda_y}};
    spec.validate();
    return spec;
}

namespace detail {
[[nodiscard]] inline std::int64_t floor_to_index(double v) noexcept {
    constexpr double lim = 4.0e18;
    const double f = std::floor(v);
    if (!(f > -lim)) return static_cast<std::int64_t>(-lim);
    if (!(f < lim)) return static_cast<std::int64_t>(lim);
    return static_cast<std::int64_t>(f);
}
} // namespace detail

[[nodiscard]] inline Cell rasterize_point(const Point2& p, const GridSpec& spec) noexcept {
    return {detail::floor_to_index((p.x - spec.origin.x) / spec.lambda_x),
            detail::floor_to_index((p.y - spec.origin.y) / spec.lambda_y)};
}

/// Maps every point to its grid cell. Output has the input's length;
/// consecutive duplicates are kept.
[[nodiscard]] inline std::vector<Cell> rasterize(std::span<const Point2> points, const GridSpec& spec) {
    std::vector<Cell> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(rasterize_point(p, spec));
    return out;
}

class OccupancyGrid {
public:
    OccupancyGrid() = default;
    OccupancyGrid(GridSpec spec, std::vector<Cell> cells) : spec_(spec), occupied_(std::move(cells)) {
        std::sort(occupied_.begin(), occupied_.end());
        occupied_.erase(std::unique(occupied_.begin(), occupied_.end()), occupied_.end());
    }

    [[nodiscard]] const GridSpec& spec() const noexcept { return spec_; }
    /// Occupied cells in lexicographic order.
    [[nodiscard]] std::span<const Cell> occupied() const noexcept { return occupied_; }
    [[nodiscard]] bool contains(const Cell& c) const noexcept {
        return std::binary_search(occupied_.begin(), occupied_.end(), c);
    }
    [[nodiscard]] bool empty() const noexcept { return occupied_.empty(); }

private:
    GridSpec spec_;
    std::vector<Cell> occupied_;
};

/// Exact Euclidean nearest occupied cell, ties broken by the smallest
/// (ix, iy). A lookup table covers the occupied extent plus a margin; other
/// queries fall back to a linear scan.
class NearestRoadIndex {
public:
    NearestRoadIndex() = default;

    NearestRoadIndex(std::span<const Cell> occupied, std::int64_t margin) {
        if (occupied.empty()) throw EmptyMapError("cannot index an empty occupancy grid");
        if (margin < 0) throw ParameterError("index margin must be non-negative");
        cells_.assign(occupied.begin(), occupied.end());
        std::sort(cells_.begin(), cells_.end());
        cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());

        lo_ = hi_ = cells_.front();
        for (const auto& c : cells_) {
            lo_.ix = std::min(lo_.ix, c.ix);
            lo_.iy = std::min(lo_.iy, c.iy);
            hi_.ix = std::max(hi_.ix, c.ix);
            hi_.iy = std::max(hi_.iy, c.iy);
        }
        lo_.ix -= margin;
        lo_.iy -= margin;
        hi_.ix += margin;
        hi_.iy += margin;
        width_ = hi_.ix - lo_.ix + 1;
        height_ = hi_.iy - lo_.iy + 1;
        build_table();
    }

    [[nodiscard]] Cell nearest(const Cell& q) const noexcept {
        if (in_table(q)) return table_[offset(q.ix - lo_.ix, q.iy - lo_.iy)];
        return scan(q);
    }

    [[nodiscard]] std::span<const Cell> occupied() const noexcept { return cells_; }
    [[nodiscard]] bool in_table(const Cell& q) const noexcept {
        return q.ix >= lo_.ix && q.ix <= hi_.ix && q.iy >= lo_.iy && q.iy <= hi_.iy;
    }

    /// Linear scan over all occupied cells; the reference answer.
    [[nodiscard]] Cell scan(const Cell& q) const noexcept {
        Cell best = cells_.front();
        std::int64_t best_d = squared_distance(q, best);
        for (const auto& c : cells_) {
            const std::int64_t d = squared_distance(q, c);
            if (d < best_d) { // cells_ is sorted, so strict < keeps the lexicographic minimum
                best_d = d;
                best = c;
            }
        }
        return best;
    }

private:
    [[nodiscard]] std::size_t offset(std::int64_t x, std::int64_t y) const noexcept {
        return static_cast<std::size_t>(y * width_ + x);
    }

    void build_table() {
        constexpr std::int64_t none = -1;
        const auto n = static_cast<std::size_t>(width_ * height_);
        std::vector<std::uint8_t> occ(n, 0);
        for (const auto& c : cells_) occ[offset(c.ix - lo_.ix, c.iy - lo_.iy)] = 1;

        // Column pass: nearest occupied row within each column (lower row on ties).
        std::vector<std::int64_t> col(n, none);
        std::vector<std::int64_t> above(static_cast<std::size_t>(height_));
        for (std::int64_t x = 0; x < width_; ++x) {
            std::int64_t next = none;
            for (std::int64_t y = height_ - 1; y >= 0; --y) {
                if (occ[offset(x, y)]) next = y;
                above[static_cast<std::size_t>(y)] = next;
            }
            std::int64_t prev = none;
            for (std::int64_t y = 0; y < height_; ++y) {
                if (occ[offset(x, y)]) prev = y;
                const std::int64_t up = above[static_cast<std::size_t>(y)];
                std::int64_t pick = prev;
                if (pick == none || (up != none && up - y < y - prev)) pick = up;
                col[offset(x, y)] = pick;
            }
        }

        // Row pass: search columns outward until no closer candidate can exist.
        table_.assign(n, Cell{});
        for (std::int64_t y = 0; y < height_; ++y) {
            for (std::int64_t x = 0; x < width_; ++x) {
                std::int64_t best_d = std::numeric_limits<std::int64_t>::max();
                std::int64_t bx = 0, by = 0;
                auto consider = [&](std::int64_t cx) {
                    const std::int64_t cy = col[offset(cx, y)];
                    if (cy == none) return;
                    const std::int64_t d = (cx - x) * (cx - x) + (cy - y) * (cy - y);
                    if (d < best_d || (d == best_d && (cx < bx || (cx == bx && cy < by)))) {
                        best_d = d;
                        bx = cx;
                        by = cy;
                    }
                };
                for (std::int64_t k = 0; k * k <= best_d; ++k) {
                    const bool left_ok = x - k >= 0;
                    const bool right_ok = x + k < width_;
                    if (!left_ok && !right_ok) break;
                    if (left_ok) consider(x - k);
                    if (k > 0 && right_ok) consider(x + k);
                }
                table_[offset(x, y)] = Cell{bx + lo_.ix, by + lo_.iy};
            }
        }
    }

    std::vector<Cell> cells_;
    std::vector<Cell> table_;
    Cell lo_, hi_;
    std::int64_t width_ = 0;
    std::int64_t height_ = 0;
};

[[nodiscard]] inline Cell nearest_road_cell(const NearestRoadIndex& index, const Cell& cell) noexcept {
    return index.nearest(cell);
}

inline constexpr std::int64_t kDefaultIndexMargin = 64;

[[nodiscard]] inline std::pair<OccupancyGrid, NearestRoadIndex>
build_road_index(const RoadStructure& map, const GridSpec& spec, std::int64_t margin = kDefaultIndexMargin) {
    spec.validate();
    std::vector<Cell> cells;
    for (const auto& road : map.roads) {
        auto rc = rasterize(road, spec);
        cells.insert(cells.end(), rc.begin(), rc.end());
    }
    if (cells.empty()) throw EmptyMapError("road map '" + map.name + "' has no roads");
    OccupancyGrid grid(spec, std::move(cells));
    NearestRoadIndex index(grid.occupied(), margin);
    return {std::move(grid), std::move(index)};
}

/// Everything the placement search needs from a map, built once and shared
/// read-only.
struct RoadModel {
    BBox bounds;
    OccupancyGrid grid;
    NearestRoadIndex index;

    [[nodiscard]] const GridSpec& spec() const noexcept { return grid.spec(); }
};

[[nodiscard]] inline RoadModel build_road_model(const RoadStructure& map, double grid_m,
                                                std::int64_t margin = kDefaultIndexMargin) {
    const BBox bounds = bounding_box(map);
    auto [grid, index] = build_road_index(map, grid_for(bounds, grid_m, grid_m), margin);
    return RoadModel{bounds, std::move(grid), std::move(index)};
}

} // namespace pgeval

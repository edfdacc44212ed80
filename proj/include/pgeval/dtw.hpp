#pragma once

// Dynamic time warping over planar point sequences with Euclidean local
// cost and the symmetric three-move step pattern (i+1, j), (i, j+1),
// (i+1, j+1).

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pgeval/error.hpp"
#include "pgeval/geo.hpp"

namespace pgeval {

/// One warp-path step, 0-based: X[i] is aligned with Y[j].
struct WarpStep {
    std::size_t i = 0;
    std::size_t j = 0;

    friend bool operator==(const WarpStep&, const WarpStep&) = default;
};

using WarpPath = std::vector<WarpStep>;

struct DtwResult {
    double distance = 0.0;
    WarpPath path;
};

/// True when the path runs from (0,0) to (nx-1, ny-1) in unit monotone steps.
[[nodiscard]] inline bool is_valid_warp_path(const WarpPath& path, std::size_t nx, std::size_t ny) noexcept {
    if (path.empty() || nx == 0 || ny == 0) return false;
    if (path.front() != WarpStep{0, 0} || path.back() != WarpStep{nx - 1, ny - 1}) return false;
    for (std::size_t k = 1; k < path.size(); ++k) {
        const auto di = path[k].i - path[k - 1].i;
        const auto dj = path[k].j - path[k - 1].j;
        if (path[k].i < path[k - 1].i || path[k].j < path[k - 1].j) return false;
        if (di > 1 || dj > 1 || (di == 0 && dj == 0)) return false;
    }
    return true;
}

/// Sum of local costs along a path.
[[nodiscard]] inline double path_cost(std::span<const Point2> x, std::span<const Point2> y, const WarpPath& path) {
    double sum = 0.0;
    for (const auto& s : path) sum += distance(x[s.i], y[s.j]);
    return sum;
}

namespace detail {

/// Inclusive column range [lo, hi] per row of the cost matrix.
struct RowWindow {
    std::vector<std::size_t> lo;
    std::vector<std::size_t> hi;
};

[[nodiscard]] inline RowWindow full_window(std::size_t nx, std::size_t ny) {
    return {std::vector<std::size_t>(nx, 0), std::vector<std::size_t>(nx, ny - 1)};
}

inline void check_inputs(std::span<const Point2> x, std::span<const Point2> y) {
    if (x.empty() || y.empty()) throw ValidationError("DTW requires non-empty sequences");
}

/// DP restricted to a window; rows must satisfy lo[0] == 0,
/// hi[n-1] == ny-1, both non-decreasing and lo[i+1] <= hi[i] + 1.
[[nodiscard]] inline DtwResult windowed_dtw(std::span<const Point2> x, std::span<const Point2> y, const RowWindow& w) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t nx = x.size();
    std::vector<std::size_t> row_start(nx + 1, 0);
    for (std::size_t i = 0; i < nx; ++i) row_start[i + 1] = row_start[i] + (w.hi[i] - w.lo[i] + 1);
    std::vector<double> cost(row_start[nx], inf);

    auto at = [&](std::size_t i, std::size_t j) -> double {
        if (j < w.lo[i] || j > w.hi[i]) return inf;
        return cost[row_start[i] + (j - w.lo[i])];
    };

    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = w.lo[i]; j <= w.hi[i]; ++j) {
            const double d = distance(x[i], y[j]);
            double prev;
            if (i == 0 && j == 0) {
                prev = 0.0;
            } else {
                prev = inf;
                if (i > 0 && j > 0) prev = std::min(prev, at(i - 1, j - 1));
                if (i > 0) prev = std::min(prev, at(i - 1, j));
                if (j > w.lo[i]) prev = std::min(prev, cost[row_start[i] + (j - 1 - w.lo[i])]);
            }
            cost[row_start[i] + (j - w.lo[i])] = d + prev;
        }
    }

    DtwResult result;
    result.distance = at(nx - 1, y.size() - 1);
    std::size_t i = nx - 1, j = y.size() - 1;
    result.path.push_back({i, j});
    while (i > 0 || j > 0) {
        // Diagonal wins ties, then the vertical move.
        if (i > 0 && j > 0) {
            const double diag = at(i - 1, j - 1), up = at(i - 1, j), left = at(i, j - 1);
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left) {
                --i;
            } else {
                --j;
            }
        } else if (i > 0) {
            --i;
        } else {
            --j;
        }
        result.path.push_back({i, j});
    }
    std::reverse(result.path.begin(), result.path.end());
    return result;
}

[[nodiscard]] inline std::vector<Point2> reduce_by_half(std::span<const Point2> x) {
    std::vector<Point2> out;
    out.reserve(x.size() / 2);
    for (std::size_t i = 0; i + 1 < x.size(); i += 2) out.push_back(0.5 * (x[i] + x[i + 1]));
    return out;
}

/// Projects a low-resolution path onto the full-resolution grid, widened by
/// `radius` coarse cells, then repaired so that a monotone path always exists.
[[nodiscard]] inline RowWindow expand_window(const WarpPath& coarse, std::size_t nx, std::size_t ny,
                                             std::size_t radius) {
    constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
    RowWindow w{std::vector<std::size_t>(nx, unset), std::vector<std::size_t>(nx, 0)};
    auto mark = [&](std::size_t i, std::size_t jlo, std::size_t jhi) {
        if (i >= nx || jlo >= ny) return;
        jhi = std::min(jhi, ny - 1);
        w.lo[i] = std::min(w.lo[i], jlo);
        w.hi[i] = std::max(w.hi[i], jhi);
    };
    for (const auto& s : coarse) {
        const std::size_t ci_lo = s.i >= radius ? s.i - radius : 0;
        const std::size_t cj_lo = s.j >= radius ? s.j - radius : 0;
        for (std::size_t ci = ci_lo; ci <= s.i + radius; ++ci) {
            mark(2 * ci, 2 * cj_lo, 2 * (s.j + radius) + 1);
            mark(2 * ci + 1, 2 * cj_lo, 2 * (s.j + radius) + 1);
        }
    }
    // Rows left untouched by odd-length truncation inherit their neighbour.
    for (std::size_t i = 0; i < nx; ++i) {
        if (w.lo[i] != unset) continue;
        if (i > 0) {
            w.lo[i] = w.lo[i - 1];
            w.hi[i] = w.hi[i - 1];
        } else {
            w.lo[i] = 0;
            w.hi[i] = 0;
        }
    }
    w.lo[0] = 0;
    w.hi[nx - 1] = ny - 1;
    for (std::size_t i = 1; i < nx; ++i) w.hi[i] = std::max(w.hi[i], w.hi[i - 1]);
    for (std::size_t i = nx - 1; i > 0; --i) w.lo[i - 1] = std::min(w.lo[i - 1], w.lo[i]);
    for (std::size_t i = 1; i < nx; ++i) w.lo[i] = std::min(w.lo[i], w.hi[i - 1] + 1);
    return w;
}

[[nodiscard]] inline DtwResult fast_dtw(std::span<const Point2> x, std::span<const Point2> y, std::size_t radius) {
    const std::size_t min_size = radius + 2;
    if (x.size() < min_size || y.size() < min_size) return windowed_dtw(x, y, full_window(x.size(), y.size()));
    const auto xs = reduce_by_half(x);
    const auto ys = reduce_by_half(y);
    const DtwResult coarse = fast_dtw(xs, ys, radius);
    return windowed_dtw(x, y, expand_window(coarse.path, x.size(), y.size(), radius));
}

} // namespace detail

/// Full O(|X||Y|) dynamic program.
[[nodiscard]] inline DtwResult dtw_exact(std::span<const Point2> x, std::span<const Point2> y) {
    detail::check_inputs(x, y);
    return detail::windowed_dtw(x, y, detail::full_window(x.size(), y.size()));
}

/// FastDTW: coarsen, solve recursively, project the path and refine inside a
/// window of `radius` cells. No radius means an unconstrained window, which
/// is the exact DP.
[[nodiscard]] inline DtwResult dtw_fast(std::span<const Point2> x, std::span<const Point2> y,
                                        std::optional<std::size_t> radius = std::nullopt) {
    detail::check_inputs(x, y);
    if (!radius) return detail::windowed_dtw(x, y, detail::full_window(x.size(), y.size()));
    return detail::fast_dtw(x, y, *radius);
}

/// Unconstrained DTW distance without the path, in O(|Y|) memory. Once every
/// partial alignment of a row exceeds `cutoff` the search stops and +inf is
/// returned; any result <= cutoff is exact.
[[nodiscard]] inline double dtw_distance(std::span<const Point2> x, std::span<const Point2> y,
                                         double cutoff = std::numeric_limits<double>::infinity()) {
    detail::check_inputs(x, y);
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t ny = y.size();
    std::vector<double> prev(ny), cur(ny);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double row_min = inf;
        for (std::size_t j = 0; j < ny; ++j) {
            double best;
            if (i == 0) best = j == 0 ? 0.0 : cur[j - 1];
            else if (j == 0) best = prev[0];
            else best = std::min({prev[j - 1], prev[j], cur[j - 1]});
            cur[j] = best + distance(x[i], y[j]);
            row_min = std::min(row_min, cur[j]);
        }
        if (row_min > cutoff) return inf;
        std::swap(prev, cur);
    }
    return prev[ny - 1];
}

} // namespace pgeval

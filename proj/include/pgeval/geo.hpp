#pragma once

// Planar geometry: sinusoidal projection of GPS data, SE(2) placement poses,
// polyline resampling and bounding boxes.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pgeval/error.hpp"

namespace pgeval {

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Point2 {
    double x = 0.0; // meters east
    double y = 0.0; // meters north

    friend bool operator==(const Point2&, const Point2&) = default;

    Point2& operator+=(const Point2& o) noexcept { x += o.x; y += o.y; return *this; }
    Point2& operator-=(const Point2& o) noexcept { x -= o.x; y -= o.y; return *this; }
    friend Point2 operator+(Point2 a, const Point2& b) noexcept { return a += b; }
    friend Point2 operator-(Point2 a, const Point2& b) noexcept { return a -= b; }
    friend Point2 operator*(double s, const Point2& p) noexcept { return {s * p.x, s * p.y}; }

    [[nodiscard]] bool finite() const noexcept { return std::isfinite(x) && std::isfinite(y); }
};

[[nodiscard]] inline double distance(const Point2& a, const Point2& b) noexcept {
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct LatLon {
    double lat = 0.0; // degrees
    double lon = 0.0; // degrees
};

/// Wraps an angle into [0, 2pi).
[[nodiscard]] inline double normalize_angle(double theta) noexcept {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0; // fmod rounding can land exactly on 2pi
    return t;
}

/// Rigid placement hypothesis <tx, ty, theta>. Theta is kept in [0, 2pi).
class Pose {
public:
    Pose() = default;
    Pose(double tx, double ty, double theta) noexcept
        : tx_(tx), ty_(ty), theta_(normalize_angle(theta)) {}

    [[nodiscard]] double tx() const noexcept { return tx_; }
    [[nodiscard]] double ty() const noexcept { return ty_; }
    [[nodiscard]] double theta() const noexcept { return theta_; }

    [[nodiscard]] bool finite() const noexcept {
        return std::isfinite(tx_) && std::isfinite(ty_) && std::isfinite(theta_);
    }

    /// The pose undoing this one: apply_pose(apply_pose(P, x), x.inverse()) == P.
    [[nodiscard]] Pose inverse() const noexcept {
        const double c = std::cos(theta_), s = std::sin(theta_);
        return {-(c * tx_ + s * ty_), -(-s * tx_ + c * ty_), -theta_};
    }

    friend bool operator==(const Pose&, const Pose&) = default;

private:
    double tx_ = 0.0;
    double ty_ = 0.0;
    double theta_ = 0.0;
};

/// Row-major 3x3 homogeneous matrix.
using Matrix3 = std::array<std::array<double, 3>, 3>;

[[nodiscard]] inline Matrix3 make_transform(const Pose& pose) noexcept {
    const double c = std::cos(pose.theta()), s = std::sin(pose.theta());
    return {{{c, -s, pose.tx()}, {s, c, pose.ty()}, {0.0, 0.0, 1.0}}};
}

[[nodiscard]] inline Point2 transform_point(const Matrix3& m, const Point2& p) noexcept {
    return {m[0][0] * p.x + m[0][1] * p.y + m[0][2], m[1][0] * p.x + m[1][1] * p.y + m[1][2]};
}

[[nodiscard]] inline std::vector<Point2> apply_pose(std::span<const Point2> trajectory, const Pose& pose) {
    const Matrix3 m = make_transform(pose);
    std::vector<Point2> out;
    out.reserve(trajectory.size());
    for (const auto& p : trajectory) out.push_back(transform_point(m, p));
    return out;
}

struct BBox {
    Point2 min;
    Point2 max;

    [[nodiscard]] double width() const noexcept { return max.x - min.x; }
    [[nodiscard]] double height() const noexcept { return max.y - min.y; }

    void expand(const Point2& p) noexcept {
        min.x = std::min(min.x, p.x);
        min.y = std::min(min.y, p.y);
        max.x = std::max(max.x, p.x);
        max.y = std::max(max.y, p.y);
    }

    friend bool operator==(const BBox&, const BBox&) = default;
};

[[nodiscard]] inline std::optional<BBox> bounds_of(std::span<const Point2> pts) noexcept {
    if (pts.empty()) return std::nullopt;
    BBox b{pts.front(), pts.front()};
    for (const auto& p : pts) b.expand(p);
    return b;
}

/// Mean longitude of a point set; the default central meridian.
[[nodiscard]] inline double mean_longitude(std::span<const LatLon> pts) noexcept {
    if (pts.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& p : pts) sum += p.lon;
    return sum / static_cast<double>(pts.size());
}

/// Spherical sinusoidal projection about `central_meridian` (degrees).
/// Throws ValidationError naming the first out-of-range coordinate.
[[nodiscard]] inline std::vector<Point2> project_sinusoidal(std::span<const LatLon> pts, double central_meridian) {
    constexpr double deg = std::numbers::pi / 180.0;
    std::vector<Point2> out;
    out.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0)) {
            throw ValidationError("coordinate out of range at index " + std::to_string(i));
        }
        out.push_back({kEarthRadiusM * (p.lon - central_meridian) * deg * std::cos(p.lat * deg),
                       kEarthRadiusM * p.lat * deg});
    }
    return out;
}

[[nodiscard]] inline std::vector<Point2> project_sinusoidal(std::span<const LatLon> pts) {
    return project_sinusoidal(pts, mean_longitude(pts));
}

/// Inverse of project_sinusoidal. Undefined at the poles.
[[nodiscard]] inline LatLon unproject_sinusoidal(const Point2& p, double central_meridian) noexcept {
    constexpr double deg = std::numbers::pi / 180.0;
    const double lat = p.y / kEarthRadiusM / deg;
    const double lon = central_meridian + p.x / (kEarthRadiusM * std::cos(lat * deg)) / deg;
    return {lat, lon};
}

[[nodiscard]] inline double polyline_length(std::span<const Point2> pts) noexcept {
    double len = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
    return len;
}

/// Subdivides each segment uniformly so that consecutive points are at most
/// `spacing` apart. Original vertices are kept.
[[nodiscard]] inline std::vector<Point2> resample_polyline(std::span<const Point2> polyline, double spacing) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw ParameterError("resample spacing must be positive, got " + std::to_string(spacing));
    }
    std::vector<Point2> out;
    if (polyline.empty()) return out;
    out.push_back(polyline.front());
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        const Point2 a = polyline[i - 1];
        const Point2 b = polyline[i];
        const double len = distance(a, b);
        // Slack keeps already-resampled input stable under float noise.
        const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(len / spacing - 1e-9)));
        for (std::size_t k = 1; k < pieces; ++k) {
            const double f = static_cast<double>(k) / static_cast<double>(pieces);
            out.push_back({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
        }
        out.push_back(b);
    }
    return out;
}

} // namespace pgeval

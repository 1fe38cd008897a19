#pragma once

#include "drive/core_model.hpp"

#include <array>
#include <cmath>
#include <span>

namespace drive
{
    struct Vec2
    {
        double x = 0.0;
        double y = 0.0;

        constexpr Vec2 operator+(Vec2 o) const noexcept { return {x + o.x, y + o.y}; }
        constexpr Vec2 operator-(Vec2 o) const noexcept { return {x - o.x, y - o.y}; }
        constexpr Vec2 operator*(double s) const noexcept { return {x * s, y * s}; }
        friend bool operator==(const Vec2 &, const Vec2 &) = default;
    };

    constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
    constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
    inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
    constexpr Vec2 position_of(const Transform &t) noexcept { return {t.x, t.y}; }

    // Rotates a body-frame vector (x forward, y left) into the map frame.
    inline Vec2 rotate(Vec2 v, double yaw) noexcept
    {
        const double c = std::cos(yaw);
        const double s = std::sin(yaw);
        return {c * v.x - s * v.y, s * v.x + c * v.y};
    }

    struct SegmentProjection
    {
        double t = 0.0;        // parameter in [0,1] along the segment
        double distance = 0.0; // point to closest point on the segment
    };

    SegmentProjection project_onto_segment(Vec2 p, Vec2 a, Vec2 b) noexcept;

    // Minimum distance from p to an open polyline. `points` must be non-empty.
    double distance_to_polyline(Vec2 p, std::span<const Vec2> points) noexcept;

    /// Oriented rectangle: centered at `center`, `length` along heading `yaw`, `width` across.
    struct OrientedBox
    {
        Vec2 center;
        double yaw = 0.0;
        double length = 0.0;
        double width = 0.0;

        std::array<Vec2, 4> corners() const noexcept;
        bool contains(Vec2 p) const noexcept;
    };

    /// Largest separation found on the four candidate axes. Positive means a
    /// separating gap of that size exists; non-positive means the boxes overlap and
    /// the magnitude is the smallest penetration depth among the axes.
    double sat_separation(const OrientedBox &a, const OrientedBox &b) noexcept;

    inline bool boxes_overlap(const OrientedBox &a, const OrientedBox &b) noexcept
    {
        return sat_separation(a, b) < 0.0;
    }
}

#include "drive/geometry.hpp"

#include <algorithm>
#include <limits>

namespace drive
{
    SegmentProjection project_onto_segment(Vec2 p, Vec2 a, Vec2 b) noexcept
    {
        const Vec2 ab = b - a;
        const double len2 = dot(ab, ab);
        double t = 0.0;
        if (len2 > 0.0)
        {
            t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
        }
        const Vec2 closest = a + ab * t;
        return {t, norm(p - closest)};
    }

    double distance_to_polyline(Vec2 p, std::span<const Vec2> points) noexcept
    {
        if (points.size() == 1)
        {
            return norm(p - points.front());
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < points.size(); ++i)
        {
            best = std::min(best, project_onto_segment(p, points[i], points[i + 1]).distance);
        }
        return best;
    }

    std::array<Vec2, 4> OrientedBox::corners() const noexcept
    {
        const Vec2 f = rotate({length / 2.0, 0.0}, yaw);
        const Vec2 l = rotate({0.0, width / 2.0}, yaw);
        return {center + f + l, center - f + l, center - f - l, center + f - l};
    }

    bool OrientedBox::contains(Vec2 p) const noexcept
    {
        const Vec2 local = rotate(p - center, -yaw);
        return std::abs(local.x) <= length / 2.0 && std::abs(local.y) <= width / 2.0;
    }

    namespace
    {
        // Half extent of a box projected on a unit axis.
        double projected_radius(const OrientedBox &box, Vec2 axis) noexcept
        {
            const Vec2 f{std::cos(box.yaw), std::sin(box.yaw)};
            const Vec2 l{-f.y, f.x};
            return box.length / 2.0 * std::abs(dot(f, axis)) + box.width / 2.0 * std::abs(dot(l, axis));
        }
    }

    double sat_separation(const OrientedBox &a, const OrientedBox &b) noexcept
    {
        const Vec2 fa{std::cos(a.yaw), std::sin(a.yaw)};
        const Vec2 fb{std::cos(b.yaw), std::sin(b.yaw)};
        const std::array<Vec2, 4> axes{fa, Vec2{-fa.y, fa.x}, fb, Vec2{-fb.y, fb.x}};

        const Vec2 d = b.center - a.center;
        double separation = -std::numeric_limits<double>::infinity();
        for (const Vec2 &axis : axes)
        {
            const double gap = std::abs(dot(d, axis)) - projected_radius(a, axis) - projected_radius(b, axis);
            separation = std::max(separation, gap);
        }
        return separation;
    }
}

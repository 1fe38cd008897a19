#pragma once

#include "drive/geometry.hpp"
#include "drive/route.hpp"
#include "drive/world.hpp"

#include <cmath>
#include <random>

// Independent reference computations the library is checked against.
namespace drive::testing
{
    // Walks the outline of `a` in steps of at most `step` meters and reports
    // whether any outline point lies inside `b`.
    inline bool outline_hits(const OrientedBox &a, const OrientedBox &b, double step)
    {
        const auto c = a.corners();
        for (int k = 0; k < 4; ++k)
        {
            const Vec2 p = c[k];
            const Vec2 q = c[(k + 1) % 4];
            const int n = static_cast<int>(std::ceil(norm(q - p) / step));
            for (int i = 0; i <= n; ++i)
            {
                if (b.contains(p + (q - p) * (static_cast<double>(i) / n)))
                    return true;
            }
        }
        return false;
    }

    // Two convex shapes overlap iff an outline point of one lies in the other
    // (containment puts the whole inner outline inside).
    inline bool sampled_overlap(const OrientedBox &a, const OrientedBox &b, double step = 1e-3)
    {
        return outline_hits(a, b, step) || outline_hits(b, a, step);
    }

    inline OrientedBox random_box(std::mt19937_64 &rng, double spread = 4.0)
    {
        std::uniform_real_distribution<double> pos(-spread, spread);
        std::uniform_real_distribution<double> yaw(-kPi, kPi);
        std::uniform_real_distribution<double> len(0.5, 5.0);
        std::uniform_real_distribution<double> wid(0.5, 2.5);
        return {{pos(rng), pos(rng)}, yaw(rng), len(rng), wid(rng)};
    }

    // Circle through three points; returns the radius.
    inline double circumradius(Vec2 a, Vec2 b, Vec2 c)
    {
        const double ab = norm(b - a), bc = norm(c - b), ca = norm(a - c);
        const double area2 = std::abs(cross(b - a, c - a));
        return ab * bc * ca / (2.0 * area2);
    }

    // Drives one vehicle at constant speed and wheel angle delta for one full
    // revolution and returns the mean distance of the trajectory from its centroid.
    inline double measured_turning_radius(double delta, double speed = 5.0, double dt = 0.05)
    {
        ActorBlueprint bp = ActorBlueprint::sedan();
        bp.drag = 0.0;
        ControlAction c;
        c.steer = delta / bp.max_wheel_angle;
        VehicleState s;
        s.speed = speed;
        const double nominal = bp.wheelbase / std::tan(delta);
        const int steps = static_cast<int>(std::ceil(2.0 * kPi * nominal / (speed * dt)));
        std::vector<Vec2> pts;
        pts.reserve(static_cast<std::size_t>(steps));
        for (int i = 0; i < steps; ++i)
        {
            s = integrate_bicycle(s, bp, c, dt);
            s.speed = speed; // hold speed: no throttle model in the way
            pts.push_back(position_of(s.transform));
        }
        Vec2 centroid;
        for (const Vec2 &p : pts)
            centroid = centroid + p;
        centroid = centroid * (1.0 / static_cast<double>(pts.size()));
        double r = 0.0;
        for (const Vec2 &p : pts)
            r += norm(p - centroid);
        return r / static_cast<double>(pts.size());
    }

    inline double polyline_length(const RouteFile &r)
    {
        double total = 0.0;
        for (std::size_t i = 1; i < r.keypoints.size(); ++i)
            total += std::hypot(r.keypoints[i].x - r.keypoints[i - 1].x, r.keypoints[i].y - r.keypoints[i - 1].y);
        return total;
    }
}

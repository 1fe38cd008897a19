#include "drive/route.hpp"

#include "drive/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drive
{
    std::string_view to_string(RoadOption option) noexcept
    {
        switch (option)
        {
        case RoadOption::LaneFollow: return "LANE_FOLLOW";
        case RoadOption::Left: return "LEFT";
        case RoadOption::Right: return "RIGHT";
        case RoadOption::Straight: return "STRAIGHT";
        }
        return "LANE_FOLLOW";
    }

    std::vector<Vec2> DenseRoute::positions() const
    {
        std::vector<Vec2> out;
        out.reserve(waypoints.size());
        for (const RoutePoint &p : waypoints)
        {
            out.push_back(position_of(p.pose));
        }
        return out;
    }

    DenseRoute interpolate_route(const RouteFile &route, double spacing)
    {
        if (!(spacing > 0.0) || !std::isfinite(spacing))
        {
            throw Error(ErrorCode::InvalidSpacing, "spacing must be a positive finite length");
        }
        validate_route_file(route);

        DenseRoute dense;
        dense.spacing = spacing;
        const auto &keys = route.keypoints;
        double arc_start = 0.0;
        double heading = 0.0;
        for (std::size_t i = 0; i + 1 < keys.size(); ++i)
        {
            const Vec2 a = position_of(keys[i]);
            const Vec2 delta = position_of(keys[i + 1]) - a;
            const double length = norm(delta);
            heading = normalize_yaw(std::atan2(delta.y, delta.x));
            const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(length / spacing)));
            for (std::size_t j = 0; j < pieces; ++j)
            {
                const double f = static_cast<double>(j) / static_cast<double>(pieces);
                RoutePoint p;
                p.pose = j == 0 ? Transform{a.x, a.y, heading} : Transform{a.x + delta.x * f, a.y + delta.y * f, heading};
                p.arc_length = arc_start + length * f;
                p.keypoint = j == 0;
                dense.waypoints.push_back(p);
            }
            arc_start += length;
        }
        RoutePoint last;
        last.pose = Transform{keys.back().x, keys.back().y, heading};
        last.arc_length = arc_start;
        last.keypoint = true;
        dense.waypoints.push_back(last);
        return dense;
    }

    void validate_origin(const GeoOrigin &origin)
    {
        if (!std::isfinite(origin.ref_latitude) || !std::isfinite(origin.ref_longitude) ||
            !std::isfinite(origin.ref_altitude))
        {
            throw Error(ErrorCode::OriginDegenerate, "geo origin is not finite");
        }
        if (std::cos(origin.ref_latitude * kPi / 180.0) < 1e-6 || std::abs(origin.ref_latitude) >= 89.0)
        {
            throw Error(ErrorCode::OriginDegenerate, "geo origin latitude must satisfy |lat| < 89 degrees");
        }
        if (std::abs(origin.ref_longitude) > 180.0)
        {
            throw Error(ErrorCode::OriginDegenerate, "geo origin longitude must satisfy |lon| <= 180 degrees");
        }
    }

    namespace
    {
        constexpr double kRadToDeg = 180.0 / kPi;

        // Wraps a longitude difference into (-180, 180].
        double wrap_degrees(double d)
        {
            double r = std::remainder(d, 360.0);
            if (r <= -180.0)
            {
                r += 360.0;
            }
            return r;
        }

        double longitude_scale(const GeoOrigin &origin) { return kEarthRadius * std::cos(origin.ref_latitude / kRadToDeg); }
    }

    GeoLocation to_geo(Vec2 position, const GeoOrigin &origin)
    {
        validate_origin(origin);
        GeoLocation g;
        g.latitude = origin.ref_latitude + (position.y / kEarthRadius) * kRadToDeg;
        g.longitude = origin.ref_longitude + (position.x / longitude_scale(origin)) * kRadToDeg;
        if (std::abs(g.longitude) > 180.0)
        {
            g.longitude = wrap_degrees(g.longitude);
        }
        g.altitude = origin.ref_altitude;
        return g;
    }

    Transform from_geo(const GeoLocation &point, const GeoOrigin &origin)
    {
        validate_origin(origin);
        Transform t;
        t.y = (point.latitude - origin.ref_latitude) / kRadToDeg * kEarthRadius;
        double dlon = point.longitude - origin.ref_longitude;
        if (std::abs(dlon) > 180.0)
        {
            dlon = wrap_degrees(dlon);
        }
        t.x = dlon / kRadToDeg * longitude_scale(origin);
        return t;
    }

    GeoRoute to_geo(const DenseRoute &route, const GeoOrigin &origin)
    {
        validate_origin(origin);
        GeoRoute geo;
        geo.geopoints.reserve(route.waypoints.size());
        for (std::size_t i = 0; i < route.waypoints.size(); ++i)
        {
            const RoutePoint &p = route.waypoints[i];
            GeoWaypoint gw;
            gw.location = to_geo(position_of(p.pose), origin);
            if (i > 0)
            {
                const double turn = normalize_yaw(p.pose.yaw - route.waypoints[i - 1].pose.yaw);
                if (std::abs(turn) >= kRoadOptionTurnThreshold)
                {
                    gw.road_option = turn > 0.0 ? RoadOption::Left : RoadOption::Right;
                }
                else if (p.keypoint && i + 1 < route.waypoints.size())
                {
                    gw.road_option = RoadOption::Straight;
                }
            }
            geo.geopoints.push_back(gw);
        }
        return geo;
    }

    RouteTracker::RouteTracker(const DenseRoute &route, double window) : m_route(&route), m_window(window) {}

    void RouteTracker::reset() noexcept
    {
        m_segment = 0;
        m_completion = 0.0;
        m_arc = 0.0;
    }

    RouteProgress RouteTracker::update(const Transform &position)
    {
        const auto &wps = m_route->waypoints;
        const double total = m_route->total_length();
        if (wps.size() < 2 || !(total > 0.0))
        {
            return {m_completion, 0.0};
        }

        const Vec2 p = position_of(position);
        const double limit = wps[m_segment].arc_length + m_window;
        std::size_t best_segment = m_segment;
        double best_distance = std::numeric_limits<double>::infinity();
        double best_arc = 0.0;
        for (std::size_t i = m_segment; i + 1 < wps.size() && wps[i].arc_length <= limit; ++i)
        {
            const Vec2 a = position_of(wps[i].pose);
            const Vec2 b = position_of(wps[i + 1].pose);
            const SegmentProjection proj = project_onto_segment(p, a, b);
            if (proj.distance < best_distance)
            {
                best_distance = proj.distance;
                best_segment = i;
                best_arc = wps[i].arc_length + proj.t * (wps[i + 1].arc_length - wps[i].arc_length);
            }
        }
        m_segment = best_segment;
        m_arc = std::max(m_arc, best_arc);
        m_completion = std::clamp(std::max(m_completion, best_arc / total), 0.0, 1.0);
        return {m_completion, best_distance};
    }

    RouteProgress route_progress(const DenseRoute &route, const Transform &position)
    {
        RouteTracker tracker(route, std::numeric_limits<double>::infinity());
        return tracker.update(position);
    }
}

#pragma once

#include "drive/core_model.hpp"
#include "drive/geometry.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace drive
{
    inline constexpr double kDefaultSpacing = 1.0;
    inline constexpr double kEarthRadius = 6371000.0;
    inline constexpr double kRoadOptionTurnThreshold = 0.1;

    struct RouteFile
    {
        std::string route_id;
        std::string town;
        std::vector<Transform> keypoints;
    };

    struct RoutePoint
    {
        Transform pose;
        double arc_length = 0.0;
        bool keypoint = false; // true where the point coincides with a source keypoint
    };

    struct DenseRoute
    {
        std::vector<RoutePoint> waypoints;
        double spacing = kDefaultSpacing;

        double total_length() const noexcept { return waypoints.empty() ? 0.0 : waypoints.back().arc_length; }
        std::vector<Vec2> positions() const;
    };

    enum class RoadOption
    {
        LaneFollow,
        Left,
        Right,
        Straight,
    };

    std::string_view to_string(RoadOption option) noexcept;

    struct GeoWaypoint
    {
        GeoLocation location;
        RoadOption road_option = RoadOption::LaneFollow;
    };

    struct GeoRoute
    {
        std::vector<GeoWaypoint> geopoints;
    };

    struct GeoOrigin
    {
        double ref_latitude = 0.0;
        double ref_longitude = 0.0;
        double ref_altitude = 0.0;

        friend bool operator==(const GeoOrigin &, const GeoOrigin &) = default;
    };

    // Throws OriginDegenerate when the longitude scale would collapse.
    void validate_origin(const GeoOrigin &origin);

    // Route document: <route id=".." town=".."><waypoint x=".." y=".." yaw="deg"/>...</route>
    RouteFile parse_route(std::string_view text);
    RouteFile load_route_file(const std::string &path);
    std::string serialize_route(const RouteFile &route);

    // Checks the keypoint invariants; parse_route already calls this.
    void validate_route_file(const RouteFile &route);

    DenseRoute interpolate_route(const RouteFile &route, double spacing = kDefaultSpacing);

    GeoLocation to_geo(Vec2 position, const GeoOrigin &origin);
    GeoRoute to_geo(const DenseRoute &route, const GeoOrigin &origin);
    Transform from_geo(const GeoLocation &point, const GeoOrigin &origin);

    struct RouteProgress
    {
        double completion = 0.0;  // fraction of total length, [0,1]
        double cross_track = 0.0; // meters from the polyline at the cursor
    };

    /// Progress along a dense route with a cursor that only advances. The search
    /// looks `window` meters of arc past the cursor, so a route that doubles back on
    /// itself cannot make progress jump ahead.
    class RouteTracker
    {
    public:
        static constexpr double kDefaultWindow = 30.0;

        explicit RouteTracker(const DenseRoute &route, double window = kDefaultWindow);

        RouteProgress update(const Transform &position);

        double completion() const noexcept { return m_completion; }
        double arc() const noexcept { return m_arc; } // furthest projected arc length so far
        std::size_t cursor() const noexcept { return m_segment; }
        void reset() noexcept;

    private:
        const DenseRoute *m_route;
        double m_window;
        std::size_t m_segment = 0;
        double m_completion = 0.0;
        double m_arc = 0.0;
    };

    // One-shot query with an unbounded search window.
    RouteProgress route_progress(const DenseRoute &route, const Transform &position);
}

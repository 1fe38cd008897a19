#pragma once

#include "drive/core_model.hpp"
#include "drive/geometry.hpp"
#include "drive/route.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace drive
{
    struct Road
    {
        std::vector<Transform> centerline; // yaw = heading of the outgoing segment
        double width = 0.0;

        std::vector<Vec2> points() const;
    };

    struct WorldMap
    {
        std::string town;
        std::vector<Road> roads;
        std::vector<Transform> spawn_points;
        GeoOrigin geo_origin;
    };

    /*
     * Map documents are JSON:
     *
     *   {
     *     "town": "Straight200",
     *     "geo_origin": {"lat": 0.0, "lon": 0.0, "alt": 0.0},
     *     "roads": [{"points": [[0, 0], [300, 0]], "width": 7.0}],
     *     "spawn_points": [{"x": 0, "y": 0, "yaw": 0}]
     *   }
     *
     * Spawn point yaw is in degrees. Unknown keys are rejected at every level.
     */
    WorldMap parse_map(std::string_view document);
    WorldMap load_map(const std::string &path);
    std::string serialize_map(const WorldMap &map);

    // max(0, min over roads of (distance to centerline - width/2)).
    double off_road_distance(const WorldMap &map, Vec2 position);
}

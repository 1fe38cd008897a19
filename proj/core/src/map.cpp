#include "drive/map.hpp"

#include "drive/errors.hpp"
#include "drive/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>

namespace drive
{
    using nlohmann::json;

    std::vector<Vec2> Road::points() const
    {
        std::vector<Vec2> out;
        out.reserve(centerline.size());
        for (const Transform &t : centerline)
        {
            out.push_back(position_of(t));
        }
        return out;
    }

    namespace
    {
        constexpr double kDegToRad = kPi / 180.0;

        [[noreturn]] void schema_error(const std::string &where, const std::string &reason)
        {
            // Line 0: the error is structural, not tied to one line of the text.
            throw ParseError(0, where + ": " + reason);
        }

        void only_keys(const json &obj, std::initializer_list<const char *> allowed, const std::string &where)
        {
            if (!obj.is_object())
            {
                schema_error(where, "expected an object");
            }
            for (const auto &[key, value] : obj.items())
            {
                if (std::none_of(allowed.begin(), allowed.end(), [&](const char *a) { return key == a; }))
                {
                    schema_error(where, "unknown field '" + key + "'");
                }
            }
        }

        const json &require(const json &obj, const char *key, const std::string &where)
        {
            auto it = obj.find(key);
            if (it == obj.end())
            {
                schema_error(where, std::string("missing field '") + key + "'");
            }
            return *it;
        }

        double number(const json &v, const std::string &where)
        {
            if (!v.is_number())
            {
                schema_error(where, "expected a number");
            }
            const double d = v.get<double>();
            if (!std::isfinite(d))
            {
                schema_error(where, "number is not finite");
            }
            return d;
        }

        int line_of(std::string_view text, std::size_t byte)
        {
            byte = std::min(byte, text.size());
            return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
        }
    }

    WorldMap parse_map(std::string_view document)
    {
        json doc;
        try
        {
            doc = json::parse(document.begin(), document.end());
        }
        catch (const json::parse_error &e)
        {
            throw ParseError(line_of(document, e.byte == 0 ? 0 : e.byte - 1), e.what());
        }

        only_keys(doc, {"town", "geo_origin", "roads", "spawn_points"}, "map");
        WorldMap map;

        const json &town = require(doc, "town", "map");
        if (!town.is_string())
        {
            schema_error("town", "expected a string");
        }
        map.town = town.get<std::string>();

        const json &origin = require(doc, "geo_origin", "map");
        only_keys(origin, {"lat", "lon", "alt"}, "geo_origin");
        map.geo_origin.ref_latitude = number(require(origin, "lat", "geo_origin"), "geo_origin.lat");
        map.geo_origin.ref_longitude = number(require(origin, "lon", "geo_origin"), "geo_origin.lon");
        map.geo_origin.ref_altitude = origin.contains("alt") ? number(origin["alt"], "geo_origin.alt") : 0.0;
        validate_origin(map.geo_origin);

        const json &roads = require(doc, "roads", "map");
        if (!roads.is_array())
        {
            schema_error("roads", "expected an array");
        }
        if (roads.empty())
        {
            throw Error(ErrorCode::NoRoads, "map '" + map.town + "' has no roads");
        }
        for (std::size_t r = 0; r < roads.size(); ++r)
        {
            const std::string where = "roads[" + std::to_string(r) + "]";
            only_keys(roads[r], {"points", "width"}, where);
            Road road;
            road.width = number(require(roads[r], "width", where), where + ".width");
            if (!(road.width > 0.0))
            {
                schema_error(where, "width must be positive");
            }
            const json &pts = require(roads[r], "points", where);
            if (!pts.is_array() || pts.size() < 2)
            {
                schema_error(where, "points must list at least 2 [x, y] pairs");
            }
            for (std::size_t i = 0; i < pts.size(); ++i)
            {
                const std::string pw = where + ".points[" + std::to_string(i) + "]";
                if (!pts[i].is_array() || pts[i].size() != 2)
                {
                    schema_error(pw, "expected [x, y]");
                }
                road.centerline.push_back(Transform{number(pts[i][0], pw), number(pts[i][1], pw), 0.0});
            }
            for (std::size_t i = 0; i < road.centerline.size(); ++i)
            {
                const std::size_t a = i + 1 < road.centerline.size() ? i : i - 1;
                const Vec2 d = position_of(road.centerline[a + 1]) - position_of(road.centerline[a]);
                road.centerline[i].yaw = normalize_yaw(std::atan2(d.y, d.x));
            }
            map.roads.push_back(std::move(road));
        }

        if (doc.contains("spawn_points"))
        {
            const json &spawns = doc["spawn_points"];
            if (!spawns.is_array())
            {
                schema_error("spawn_points", "expected an array");
            }
            for (std::size_t i = 0; i < spawns.size(); ++i)
            {
                const std::string where = "spawn_points[" + std::to_string(i) + "]";
                only_keys(spawns[i], {"x", "y", "yaw"}, where);
                Transform t;
                t.x = number(require(spawns[i], "x", where), where + ".x");
                t.y = number(require(spawns[i], "y", where), where + ".y");
                t.yaw = normalize_yaw(number(require(spawns[i], "yaw", where), where + ".yaw") * kDegToRad);
                map.spawn_points.push_back(t);
            }
        }
        return map;
    }

    WorldMap load_map(const std::string &path) { return parse_map(read_text_file(path)); }

    std::string serialize_map(const WorldMap &map)
    {
        nlohmann::ordered_json doc;
        doc["town"] = map.town;
        doc["geo_origin"] = {{"lat", map.geo_origin.ref_latitude},
                             {"lon", map.geo_origin.ref_longitude},
                             {"alt", map.geo_origin.ref_altitude}};
        auto roads = nlohmann::ordered_json::array();
        for (const Road &road : map.roads)
        {
            auto pts = nlohmann::ordered_json::array();
            for (const Transform &t : road.centerline)
            {
                pts.push_back({t.x, t.y});
            }
            roads.push_back({{"points", pts}, {"width", road.width}});
        }
        doc["roads"] = roads;
        auto spawns = nlohmann::ordered_json::array();
        for (const Transform &t : map.spawn_points)
        {
            spawns.push_back({{"x", t.x}, {"y", t.y}, {"yaw", t.yaw / kDegToRad}});
        }
        doc["spawn_points"] = spawns;
        return doc.dump();
    }

    double off_road_distance(const WorldMap &map, Vec2 position)
    {
        double best = std::numeric_limits<double>::infinity();
        for (const Road &road : map.roads)
        {
            double d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i + 1 < road.centerline.size(); ++i)
            {
                d = std::min(d, project_onto_segment(position, position_of(road.centerline[i]),
                                                     position_of(road.centerline[i + 1]))
                                    .distance);
            }
            best = std::min(best, d - road.width / 2.0);
        }
        return std::max(0.0, best);
    }
}

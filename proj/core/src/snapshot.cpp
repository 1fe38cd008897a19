#include "drive/snapshot.hpp"

#include "drive/errors.hpp"
#include "drive/map.hpp"

namespace drive
{
    using nlohmann::json;

    ojson to_json(const ControlAction &c)
    {
        ojson j;
        j["throttle"] = c.throttle;
        j["steer"] = c.steer;
        j["brake"] = c.brake;
        j["hand_brake"] = c.hand_brake;
        j["reverse"] = c.reverse;
        j["manual_gear_shift"] = c.manual_gear_shift;
        j["gear"] = c.gear;
        return j;
    }

    ControlAction control_from_json(const json &j)
    {
        ControlAction c;
        c.throttle = j.at("throttle").get<double>();
        c.steer = j.at("steer").get<double>();
        c.brake = j.at("brake").get<double>();
        c.hand_brake = j.at("hand_brake").get<bool>();
        c.reverse = j.at("reverse").get<bool>();
        c.manual_gear_shift = j.at("manual_gear_shift").get<bool>();
        c.gear = j.at("gear").get<std::int32_t>();
        return c;
    }

    ojson to_json(const VehicleState &s)
    {
        ojson j;
        j["x"] = s.transform.x;
        j["y"] = s.transform.y;
        j["yaw"] = s.transform.yaw;
        j["speed"] = s.speed;
        j["yaw_rate"] = s.yaw_rate;
        return j;
    }

    namespace
    {
        VehicleState state_from_json(const json &j, std::int64_t frame, double sim_time)
        {
            VehicleState s;
            s.transform.x = j.at("x").get<double>();
            s.transform.y = j.at("y").get<double>();
            s.transform.yaw = j.at("yaw").get<double>();
            s.speed = j.at("speed").get<double>();
            s.yaw_rate = j.at("yaw_rate").get<double>();
            s.frame = frame;
            s.sim_time = sim_time;
            return s;
        }

        ActorKind kind_from_string(const std::string &s)
        {
            for (ActorKind k : {ActorKind::Vehicle, ActorKind::Pedestrian, ActorKind::StaticProp})
            {
                if (to_string(k) == s)
                    return k;
            }
            throw Error(ErrorCode::ParseError, "unknown actor kind '" + s + "'");
        }

        SensorKind sensor_kind_from_string(const std::string &s)
        {
            for (SensorKind k : {SensorKind::Gnss, SensorKind::Imu, SensorKind::Speedometer, SensorKind::BevOccupancy})
            {
                if (to_string(k) == s)
                    return k;
            }
            throw Error(ErrorCode::ParseError, "unknown sensor kind '" + s + "'");
        }
    }

    ojson to_json(const ActorBlueprint &bp)
    {
        ojson j;
        j["kind"] = std::string(to_string(bp.kind));
        j["length"] = bp.length;
        j["width"] = bp.width;
        j["max_wheel_angle"] = bp.max_wheel_angle;
        j["wheelbase"] = bp.wheelbase;
        j["max_accel"] = bp.max_accel;
        j["max_brake_decel"] = bp.max_brake_decel;
        j["drag"] = bp.drag;
        return j;
    }

    ActorBlueprint blueprint_from_json(const json &j)
    {
        ActorBlueprint bp;
        bp.kind = kind_from_string(j.at("kind").get<std::string>());
        bp.length = j.at("length").get<double>();
        bp.width = j.at("width").get<double>();
        bp.max_wheel_angle = j.at("max_wheel_angle").get<double>();
        bp.wheelbase = j.at("wheelbase").get<double>();
        bp.max_accel = j.at("max_accel").get<double>();
        bp.max_brake_decel = j.at("max_brake_decel").get<double>();
        bp.drag = j.at("drag").get<double>();
        return bp;
    }

    ojson to_json(const WeatherParams &w)
    {
        ojson j;
        j["cloudiness"] = w.cloudiness;
        j["precipitation"] = w.precipitation;
        j["fog_density"] = w.fog_density;
        j["sun_altitude"] = w.sun_altitude;
        return j;
    }

    WeatherParams weather_from_json(const json &j)
    {
        WeatherParams w;
        w.cloudiness = j.at("cloudiness").get<double>();
        w.precipitation = j.at("precipitation").get<double>();
        w.fog_density = j.at("fog_density").get<double>();
        w.sun_altitude = j.at("sun_altitude").get<double>();
        return w;
    }

    ojson to_json(const std::vector<SensorSpec> &rig)
    {
        ojson arr = ojson::array();
        for (const SensorSpec &s : rig)
        {
            ojson j;
            j["sensor_id"] = s.sensor_id;
            j["kind"] = std::string(to_string(s.kind));
            j["mount"] = {s.mount.x, s.mount.y, s.mount.yaw};
            j["noise_stddev"] = s.noise_stddev;
            if (s.kind == SensorKind::BevOccupancy)
            {
                j["grid"] = {s.grid.cells_x, s.grid.cells_y, s.grid.meters_per_cell};
            }
            arr.push_back(std::move(j));
        }
        return arr;
    }

    std::vector<SensorSpec> rig_from_json(const json &j)
    {
        std::vector<SensorSpec> rig;
        for (const json &e : j)
        {
            SensorSpec s;
            s.sensor_id = e.at("sensor_id").get<std::string>();
            s.kind = sensor_kind_from_string(e.at("kind").get<std::string>());
            const json &m = e.at("mount");
            s.mount = Transform{m.at(0).get<double>(), m.at(1).get<double>(), m.at(2).get<double>()};
            s.noise_stddev = e.at("noise_stddev").get<double>();
            if (e.contains("grid"))
            {
                const json &g = e["grid"];
                s.grid = GridSpec{g.at(0).get<std::int32_t>(), g.at(1).get<std::int32_t>(), g.at(2).get<double>()};
            }
            rig.push_back(std::move(s));
        }
        return rig;
    }

    ojson to_json(const DenseRoute &route)
    {
        ojson j;
        j["spacing"] = route.spacing;
        ojson pts = ojson::array();
        for (const RoutePoint &p : route.waypoints)
        {
            pts.push_back({p.pose.x, p.pose.y, p.pose.yaw, p.arc_length, p.keypoint});
        }
        j["waypoints"] = std::move(pts);
        return j;
    }

    DenseRoute dense_route_from_json(const json &j)
    {
        DenseRoute r;
        r.spacing = j.at("spacing").get<double>();
        for (const json &p : j.at("waypoints"))
        {
            RoutePoint rp;
            rp.pose = Transform{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
            rp.arc_length = p.at(3).get<double>();
            rp.keypoint = p.at(4).get<bool>();
            r.waypoints.push_back(rp);
        }
        return r;
    }

    ojson world_snapshot_json(const World &world)
    {
        const WorldState &st = world.state();
        ojson j;
        j["map"] = ojson::parse(serialize_map(world.map()));
        j["seed"] = st.seed;
        j["fixed_delta"] = st.fixed_delta;
        j["frame"] = st.frame;
        j["weather"] = to_json(st.weather);
        ojson actors = ojson::array();
        for (const Actor &a : st.actors)
        {
            ojson aj;
            aj["id"] = a.id;
            aj["blueprint"] = to_json(a.blueprint);
            aj["state"] = to_json(a.state);
            aj["previous"] = to_json(a.previous);
            aj["previous_frame"] = a.previous.frame;
            aj["control"] = a.control ? to_json(*a.control) : ojson(nullptr);
            if (a.autopilot)
            {
                ojson ap;
                ap["speed"] = a.autopilot->speed;
                ap["arc"] = a.autopilot->arc;
                ap["route"] = to_json(a.autopilot->route);
                aj["autopilot"] = std::move(ap);
            }
            else
            {
                aj["autopilot"] = nullptr;
            }
            actors.push_back(std::move(aj));
        }
        j["actors"] = std::move(actors);
        return j;
    }

    World world_from_snapshot(const json &snapshot)
    {
        const WorldMap map = parse_map(snapshot.at("map").dump());
        World world(map, snapshot.at("seed").get<std::uint64_t>(), snapshot.at("fixed_delta").get<double>());
        const std::int64_t frame = snapshot.at("frame").get<std::int64_t>();
        const double dt = world.state().fixed_delta;
        std::vector<Actor> actors;
        for (const json &aj : snapshot.at("actors"))
        {
            Actor a;
            a.id = aj.at("id").get<ActorId>();
            a.blueprint = blueprint_from_json(aj.at("blueprint"));
            a.state = state_from_json(aj.at("state"), frame, static_cast<double>(frame) * dt);
            const std::int64_t pf = aj.at("previous_frame").get<std::int64_t>();
            a.previous = state_from_json(aj.at("previous"), pf, static_cast<double>(pf) * dt);
            if (!aj.at("control").is_null())
                a.control = control_from_json(aj["control"]);
            if (!aj.at("autopilot").is_null())
            {
                const json &ap = aj["autopilot"];
                a.autopilot = Autopilot{dense_route_from_json(ap.at("route")), ap.at("speed").get<double>(),
                                        ap.at("arc").get<double>()};
            }
            actors.push_back(std::move(a));
        }
        world.restore(frame, std::move(actors), weather_from_json(snapshot.at("weather")));
        return world;
    }
}

#include "drive/world.hpp"

#include "drive/errors.hpp"

#include <algorithm>
#include <cmath>

namespace drive
{
    std::string_view to_string(ActorKind kind) noexcept
    {
        switch (kind)
        {
        case ActorKind::Vehicle: return "vehicle";
        case ActorKind::Pedestrian: return "pedestrian";
        case ActorKind::StaticProp: return "static_prop";
        }
        return "vehicle";
    }

    void validate_blueprint(const ActorBlueprint &bp)
    {
        if (!(bp.length > 0.0))
            throw OutOfRangeError("length", bp.length);
        if (!(bp.width > 0.0))
            throw OutOfRangeError("width", bp.width);
        if (!(bp.max_accel >= 0.0))
            throw OutOfRangeError("max_accel", bp.max_accel);
        if (!(bp.max_brake_decel >= 0.0))
            throw OutOfRangeError("max_brake_decel", bp.max_brake_decel);
        if (!(bp.drag >= 0.0))
            throw OutOfRangeError("drag", bp.drag);
        if (bp.kind == ActorKind::Vehicle)
        {
            if (!(bp.max_wheel_angle > 0.0 && bp.max_wheel_angle < kPi / 2.0))
                throw OutOfRangeError("max_wheel_angle", bp.max_wheel_angle);
            if (!(bp.wheelbase > 0.0))
                throw OutOfRangeError("wheelbase", bp.wheelbase);
        }
    }

    void validate_weather(const WeatherParams &w)
    {
        auto unit = [](const char *field, double v) {
            if (!(v >= 0.0 && v <= 1.0))
                throw OutOfRangeError(field, v);
        };
        unit("cloudiness", w.cloudiness);
        unit("precipitation", w.precipitation);
        unit("fog_density", w.fog_density);
        if (!(w.sun_altitude >= -90.0 && w.sun_altitude <= 90.0))
            throw OutOfRangeError("sun_altitude", w.sun_altitude);
    }

    const Actor *WorldState::find(ActorId id) const noexcept
    {
        auto it = std::lower_bound(actors.begin(), actors.end(), id, [](const Actor &a, ActorId v) { return a.id < v; });
        return it != actors.end() && it->id == id ? &*it : nullptr;
    }

    std::vector<std::pair<ActorId, ActorId>> detect_collisions(const std::vector<Actor> &actors)
    {
        std::vector<std::pair<ActorId, ActorId>> pairs;
        for (std::size_t i = 0; i < actors.size(); ++i)
        {
            const OrientedBox bi = actors[i].box();
            for (std::size_t j = i + 1; j < actors.size(); ++j)
            {
                if (boxes_overlap(bi, actors[j].box()))
                {
                    pairs.emplace_back(std::min(actors[i].id, actors[j].id), std::max(actors[i].id, actors[j].id));
                }
            }
        }
        std::sort(pairs.begin(), pairs.end());
        return pairs;
    }

    VehicleState integrate_bicycle(const VehicleState &s, const ActorBlueprint &bp, const ControlAction &c, double dt)
    {
        VehicleState n = s;
        const double wheel_angle = c.steer * bp.max_wheel_angle;

        double v = s.speed;
        if (c.hand_brake)
        {
            const double mag = std::max(0.0, std::abs(v) - bp.max_brake_decel * dt);
            v = std::copysign(mag, v);
        }
        else
        {
            const double direction = c.reverse ? -1.0 : 1.0;
            v += (direction * c.throttle * bp.max_accel - bp.drag * s.speed) * dt;
            // Braking only ever removes speed; it never pushes through zero.
            const double braking = c.brake * bp.max_brake_decel * dt;
            if (braking > 0.0)
            {
                v = std::abs(v) <= braking ? 0.0 : v - std::copysign(braking, v);
            }
        }

        n.speed = v;
        n.yaw_rate = v / bp.wheelbase * std::tan(wheel_angle);
        n.transform.yaw = normalize_yaw(s.transform.yaw + n.yaw_rate * dt);
        n.transform.x = s.transform.x + v * std::cos(n.transform.yaw) * dt;
        n.transform.y = s.transform.y + v * std::sin(n.transform.yaw) * dt;
        return n;
    }

    World::World(WorldMap map, std::uint64_t seed, double fixed_delta) : m_map(std::move(map))
    {
        if (!(fixed_delta > 0.0) || !std::isfinite(fixed_delta))
        {
            throw OutOfRangeError("fixed_delta", fixed_delta);
        }
        if (m_map.roads.empty())
        {
            throw Error(ErrorCode::NoRoads, "world needs a map with roads");
        }
        m_state.fixed_delta = fixed_delta;
        m_state.seed = seed;
    }

    Actor &World::actor(ActorId id)
    {
        auto it = std::lower_bound(m_state.actors.begin(), m_state.actors.end(), id,
                                   [](const Actor &a, ActorId v) { return a.id < v; });
        if (it == m_state.actors.end() || it->id != id)
        {
            throw Error(ErrorCode::NoSuchActor, "no actor with id " + std::to_string(id), static_cast<std::int64_t>(id));
        }
        return *it;
    }

    ActorId World::spawn_actor(const ActorBlueprint &blueprint, const Transform &at)
    {
        validate_blueprint(blueprint);
        if (!std::isfinite(at.x) || !std::isfinite(at.y) || !std::isfinite(at.yaw))
        {
            throw Error(ErrorCode::NonFinite, "spawn transform is not finite");
        }
        Actor a;
        a.blueprint = blueprint;
        a.state.transform = Transform{at.x, at.y, normalize_yaw(at.yaw)};
        a.state.frame = m_state.frame;
        a.state.sim_time = m_state.sim_time();
        a.previous = a.state;

        const OrientedBox box = a.box();
        for (const Actor &other : m_state.actors)
        {
            if (boxes_overlap(box, other.box()))
            {
                throw Error(ErrorCode::SpawnCollision, "spawn overlaps actor " + std::to_string(other.id),
                            static_cast<std::int64_t>(other.id));
            }
        }
        a.id = m_next_id++;
        m_state.actors.push_back(std::move(a));
        return m_state.actors.back().id;
    }

    void World::apply_control(ActorId id, const ControlAction &action)
    {
        Actor &a = actor(id);
        if (a.blueprint.kind != ActorKind::Vehicle)
        {
            throw Error(ErrorCode::NotAVehicle, "actor " + std::to_string(id) + " is not a vehicle",
                        static_cast<std::int64_t>(id));
        }
        a.control = validate_control(action);
    }

    void World::set_autopilot(ActorId id, DenseRoute route, double speed)
    {
        Actor &a = actor(id);
        if (a.blueprint.kind == ActorKind::StaticProp)
        {
            throw Error(ErrorCode::NotAVehicle, "static props cannot follow routes", static_cast<std::int64_t>(id));
        }
        if (route.waypoints.empty())
        {
            throw Error(ErrorCode::RouteEmpty, "autopilot route is empty");
        }
        if (!(speed >= 0.0) || !std::isfinite(speed))
        {
            throw OutOfRangeError("speed", speed);
        }
        a.autopilot = Autopilot{std::move(route), speed, 0.0};
    }

    void World::set_speed(ActorId id, double speed)
    {
        if (!std::isfinite(speed))
        {
            throw Error(ErrorCode::NonFinite, "speed is not finite");
        }
        actor(id).state.speed = speed;
    }

    void World::set_weather(const WeatherParams &params)
    {
        validate_weather(params);
        m_state.weather = params;
    }

    void World::advance_autopilot(Actor &a)
    {
        Autopilot &ap = *a.autopilot;
        const auto &wps = ap.route.waypoints;
        const double total = ap.route.total_length();
        ap.arc = std::min(total, ap.arc + ap.speed * m_state.fixed_delta);

        auto it = std::upper_bound(wps.begin(), wps.end(), ap.arc,
                                   [](double arc, const RoutePoint &p) { return arc < p.arc_length; });
        Transform t = wps.back().pose;
        if (it != wps.end() && it != wps.begin())
        {
            const RoutePoint &lo = *(it - 1);
            const RoutePoint &hi = *it;
            const double f = (ap.arc - lo.arc_length) / (hi.arc_length - lo.arc_length);
            t = Transform{lo.pose.x + (hi.pose.x - lo.pose.x) * f, lo.pose.y + (hi.pose.y - lo.pose.y) * f, lo.pose.yaw};
        }
        const double dt = m_state.fixed_delta;
        a.state.yaw_rate = normalize_yaw(t.yaw - a.state.transform.yaw) / dt;
        a.state.transform = t;
        a.state.speed = ap.arc < total ? ap.speed : 0.0;
    }

    const WorldState &World::tick()
    {
        const double dt = m_state.fixed_delta;
        for (Actor &a : m_state.actors)
        {
            a.previous = a.state;
            if (a.autopilot)
            {
                advance_autopilot(a);
            }
            else if (a.blueprint.kind == ActorKind::Vehicle)
            {
                a.state = integrate_bicycle(a.state, a.blueprint, a.control.value_or(neutral_control()), dt);
            }
        }
        ++m_state.frame;
        for (Actor &a : m_state.actors)
        {
            a.state.frame = m_state.frame;
            a.state.sim_time = m_state.sim_time();
        }
        m_state.collisions_this_frame = detect_collisions(m_state.actors);
        return m_state;
    }

    void World::restore(std::int64_t frame, std::vector<Actor> actors, const WeatherParams &weather)
    {
        validate_weather(weather);
        std::sort(actors.begin(), actors.end(), [](const Actor &a, const Actor &b) { return a.id < b.id; });
        m_state.frame = frame;
        m_state.weather = weather;
        m_state.actors = std::move(actors);
        m_state.collisions_this_frame = detect_collisions(m_state.actors);
        m_next_id = m_state.actors.empty() ? 1 : m_state.actors.back().id + 1;
    }
}

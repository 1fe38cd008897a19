#include "drive/agent.hpp"

#include "drive/errors.hpp"
#include "drive/wire/remote_agent.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace drive
{
    namespace
    {
        bool is_token(std::string_view s)
        {
            return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
                return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
            });
        }

        // "s" followed by 1..99 without a leading zero.
        std::optional<int> seed_token(std::string_view s)
        {
            if (s.size() < 2 || s.size() > 3 || s[0] != 's' || s[1] == '0')
            {
                return std::nullopt;
            }
            int n = 0;
            for (char c : s.substr(1))
            {
                if (c < '0' || c > '9')
                {
                    return std::nullopt;
                }
                n = n * 10 + (c - '0');
            }
            return n;
        }

        [[noreturn]] void malformed(std::string_view name, const std::string &why)
        {
            throw Error(ErrorCode::MalformedName, "malformed agent name '" + std::string(name) + "': " + why);
        }
    }

    std::string AgentDescriptor::render() const
    {
        std::string out = family;
        if (!variant.empty())
        {
            out += "_" + variant;
        }
        if (seed)
        {
            out += "_s" + std::to_string(*seed);
        }
        return out;
    }

    AgentDescriptor parse_agent_name(std::string_view name)
    {
        std::vector<std::string_view> tokens;
        std::size_t start = 0;
        for (;;)
        {
            const std::size_t pos = name.find('_', start);
            tokens.push_back(name.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
            if (pos == std::string_view::npos)
            {
                break;
            }
            start = pos + 1;
        }
        for (std::string_view t : tokens)
        {
            if (!is_token(t))
            {
                malformed(name, "tokens must be non-empty lowercase alphanumerics separated by '_'");
            }
        }

        AgentDescriptor d;
        if (tokens.size() >= 2)
        {
            d.seed = seed_token(tokens.back());
            if (d.seed)
            {
                tokens.pop_back();
            }
        }
        if (tokens.size() > 2)
        {
            malformed(name, "expected family(_variant)(_sN)");
        }
        d.family = std::string(tokens[0]);
        if (tokens.size() == 2)
        {
            d.variant = std::string(tokens[1]);
        }
        return d;
    }

    void Agent::setup(const AgentConfig &config)
    {
        if (config.dense_route.waypoints.empty() || config.geo_route.geopoints.empty())
        {
            throw Error(ErrorCode::RouteEmpty, "agent setup needs a non-empty route");
        }
        m_initialized = false;
        on_setup(config);
        m_initialized = true;
    }

    ControlAction Agent::run_step(const SensorFrame &frame)
    {
        if (!m_initialized)
        {
            throw Error(ErrorCode::NotInitialized, "run_step before setup");
        }
        for (const SensorSpec &s : sensors())
        {
            if (!frame.readings.contains(s.sensor_id))
            {
                throw Error(ErrorCode::MissingSensor, "frame lacks sensor '" + s.sensor_id + "'");
            }
        }
        ControlAction action = on_run_step(frame);
        validate_control(action);
        return action;
    }

    void Agent::destroy() noexcept
    {
        if (m_initialized)
        {
            on_destroy();
        }
        m_initialized = false;
    }

    std::vector<SensorSpec> pure_pursuit_rig(bool with_bev)
    {
        std::vector<SensorSpec> rig;
        rig.push_back({sensor_ids::kGnss, SensorKind::Gnss, {}, 0.0, {}});
        rig.push_back({sensor_ids::kSpeed, SensorKind::Speedometer, {}, 0.0, {}});
        rig.push_back({sensor_ids::kImu, SensorKind::Imu, {}, 0.0, {}});
        if (with_bev)
        {
            rig.push_back({sensor_ids::kBev, SensorKind::BevOccupancy, {}, 0.0, GridSpec{40, 40, 0.5}});
        }
        return rig;
    }

    std::vector<SensorSpec> NoopAgent::sensors() const
    {
        return {SensorSpec{sensor_ids::kSpeed, SensorKind::Speedometer, {}, 0.0, {}}};
    }

    PurePursuitParams PurePursuitParams::from(const AgentParameters &p)
    {
        PurePursuitParams out;
        auto get = [&](const char *key, double &field) {
            if (auto it = p.find(key); it != p.end())
                field = it->second;
        };
        get("target_speed", out.target_speed);
        get("lookahead", out.lookahead);
        get("stop_distance", out.stop_distance);
        get("wheelbase", out.wheelbase);
        get("max_wheel_angle", out.max_wheel_angle);
        get("speed_gain", out.speed_gain);
        return out;
    }

    AgentParameters PurePursuitParams::to_parameters() const
    {
        return {{"target_speed", target_speed}, {"lookahead", lookahead},   {"stop_distance", stop_distance},
                {"wheelbase", wheelbase},       {"max_wheel_angle", max_wheel_angle}, {"speed_gain", speed_gain}};
    }

    double pure_pursuit_steer(double alpha, const PurePursuitParams &params)
    {
        const double wheel = std::atan2(2.0 * params.wheelbase * std::sin(alpha), params.lookahead);
        return std::clamp(wheel / params.max_wheel_angle, -1.0, 1.0);
    }

    ControlAction speed_control(double speed, const PurePursuitParams &params)
    {
        ControlAction a = neutral_control();
        const double error = params.target_speed - speed;
        if (error > 0.0)
        {
            a.throttle = std::clamp(params.speed_gain * error, 0.0, 1.0);
        }
        else
        {
            a.brake = std::clamp(-params.speed_gain * error, 0.0, 1.0);
        }
        return a;
    }

    PurePursuitAgent::PurePursuitAgent(PurePursuitParams params, std::vector<SensorSpec> rig)
        : m_params(params), m_rig(std::move(rig))
    {
        if (!(m_params.lookahead > 0.0) || !(m_params.target_speed >= 0.0) || !(m_params.wheelbase > 0.0) ||
            !(m_params.max_wheel_angle > 0.0) || !(m_params.stop_distance >= 0.0))
        {
            throw OutOfRangeError("pure_pursuit.parameters", m_params.lookahead);
        }
    }

    void PurePursuitAgent::on_setup(const AgentConfig &config)
    {
        m_route = config.dense_route;
        m_origin = config.geo_origin;
        m_cursor.emplace(m_route);
    }

    void PurePursuitAgent::on_destroy() noexcept
    {
        m_cursor.reset();
        m_route = DenseRoute{};
    }

    Vec2 PurePursuitAgent::point_at_arc(double arc) const
    {
        const auto &wps = m_route.waypoints;
        auto it = std::upper_bound(wps.begin(), wps.end(), arc,
                                   [](double a, const RoutePoint &p) { return a < p.arc_length; });
        if (it == wps.end())
        {
            return position_of(wps.back().pose);
        }
        if (it == wps.begin())
        {
            return position_of(wps.front().pose);
        }
        const RoutePoint &lo = *(it - 1);
        const RoutePoint &hi = *it;
        const double f = (arc - lo.arc_length) / (hi.arc_length - lo.arc_length);
        return position_of(lo.pose) + (position_of(hi.pose) - position_of(lo.pose)) * f;
    }

    bool PurePursuitAgent::obstacle_ahead(const OccupancyGrid &grid) const
    {
        for (std::int32_t j = 0; j < grid.spec.cells_y; ++j)
        {
            for (std::int32_t i = 0; i < grid.spec.cells_x; ++i)
            {
                if (grid.at(i, j) != CellState::Occupied)
                {
                    continue;
                }
                const Vec2 c = grid.cell_center(i, j);
                if (c.x > 0.0 && norm(c) <= m_params.stop_distance)
                {
                    return true;
                }
            }
        }
        return false;
    }

    ControlAction PurePursuitAgent::on_run_step(const SensorFrame &frame)
    {
        const auto &gnss = std::get<GnssReading>(frame.readings.at(sensor_ids::kGnss));
        const auto &imu = std::get<ImuReading>(frame.readings.at(sensor_ids::kImu));
        const auto &speed = std::get<SpeedReading>(frame.readings.at(sensor_ids::kSpeed));

        Transform ego = from_geo(gnss.location, m_origin);
        ego.yaw = normalize_yaw(kPi / 2.0 - imu.compass);
        m_cursor->update(ego);

        const double total = m_route.total_length();
        const Vec2 target = point_at_arc(std::min(total, m_cursor->arc() + m_params.lookahead));
        const Vec2 to_target = target - position_of(ego);
        double alpha = 0.0;
        if (norm(to_target) > 0.0)
        {
            alpha = normalize_yaw(std::atan2(to_target.y, to_target.x) - ego.yaw);
        }

        ControlAction action = speed_control(speed.speed, m_params);
        action.steer = pure_pursuit_steer(alpha, m_params);

        if (m_params.stop_distance > 0.0)
        {
            if (auto it = frame.readings.find(sensor_ids::kBev); it != frame.readings.end())
            {
                if (obstacle_ahead(std::get<OccupancyGrid>(it->second)))
                {
                    action.throttle = 0.0;
                    action.brake = 1.0;
                }
            }
        }
        return action;
    }

    AgentRegistry AgentRegistry::with_builtins()
    {
        AgentRegistry reg;

        AgentFamily noop;
        noop.family = "noop";
        noop.variants.push_back({"", {}, NoopAgent{}.sensors()});
        noop.make = [](const AgentParameters &, const std::vector<SensorSpec> &) { return std::make_unique<NoopAgent>(); };
        reg.add_family(std::move(noop));

        PurePursuitParams fast;
        fast.target_speed = 8.0;
        fast.lookahead = 6.0;
        PurePursuitParams safe;
        safe.target_speed = 5.0;
        safe.lookahead = 4.0;
        safe.stop_distance = 8.0;

        AgentFamily pp;
        pp.family = "pp";
        pp.variants.push_back({"fast", fast.to_parameters(), pure_pursuit_rig(false)});
        pp.variants.push_back({"safe", safe.to_parameters(), pure_pursuit_rig(true)});
        pp.max_seed = 5;
        pp.perturb = [](const AgentParameters &base, int seed) {
            AgentParameters p = base;
            p["target_speed"] *= 1.0 + 0.02 * seed;
            p["lookahead"] *= 1.0 - 0.01 * seed;
            return p;
        };
        pp.make = [](const AgentParameters &params, const std::vector<SensorSpec> &rig) {
            return std::make_unique<PurePursuitAgent>(PurePursuitParams::from(params), rig);
        };
        reg.add_family(std::move(pp));
        return reg;
    }

    void AgentRegistry::add_family(AgentFamily family)
    {
        if (!is_token(family.family))
        {
            throw Error(ErrorCode::MalformedName, "family name '" + family.family + "' is not lowercase alphanumeric");
        }
        auto it = std::find_if(m_families.begin(), m_families.end(),
                               [&](const AgentFamily &f) { return f.family == family.family; });
        if (it != m_families.end())
        {
            *it = std::move(family);
        }
        else
        {
            m_families.push_back(std::move(family));
        }
    }

    ResolvedAgent AgentRegistry::resolve(std::string_view name) const
    {
        if (name.starts_with("ext:"))
        {
            return wire::resolve_external(name.substr(4));
        }
        const AgentDescriptor d = parse_agent_name(name);
        auto fam = std::find_if(m_families.begin(), m_families.end(), [&](const AgentFamily &f) { return f.family == d.family; });
        if (fam == m_families.end())
        {
            throw Error(ErrorCode::UnknownAgent, "unknown agent family in '" + std::string(name) + "'");
        }
        auto var = std::find_if(fam->variants.begin(), fam->variants.end(),
                                [&](const AgentFamily::Variant &v) { return v.name == d.variant; });
        if (var == fam->variants.end())
        {
            throw Error(ErrorCode::UnknownAgent, "family '" + d.family + "' has no variant '" + d.variant + "'");
        }
        if (d.seed && *d.seed > fam->max_seed)
        {
            throw Error(ErrorCode::UnknownAgent, "family '" + d.family + "' ships seeds s1..s" + std::to_string(fam->max_seed));
        }

        ResolvedAgent r;
        r.descriptor = d;
        r.name = d.render();
        r.parameters = d.seed && fam->perturb ? fam->perturb(var->parameters, *d.seed) : var->parameters;
        r.rig = var->rig;
        auto make = fam->make;
        auto params = r.parameters;
        auto rig = r.rig;
        r.factory = [make, params, rig]() { return make(params, rig); };
        return r;
    }

    std::vector<std::string> AgentRegistry::names() const
    {
        std::vector<std::string> out;
        for (const AgentFamily &f : m_families)
        {
            for (const AgentFamily::Variant &v : f.variants)
            {
                AgentDescriptor d{f.family, v.name, std::nullopt};
                out.push_back(d.render());
                for (int s = 1; s <= f.max_seed; ++s)
                {
                    d.seed = s;
                    out.push_back(d.render());
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    ResolvedAgent resolve_agent(std::string_view name)
    {
        static const AgentRegistry registry = AgentRegistry::with_builtins();
        return registry.resolve(name);
    }

    std::vector<SensorSpec> required_rig_for(std::string_view name) { return resolve_agent(name).rig; }
}

#include "drive/codec.hpp"

#include "drive/errors.hpp"

#include <bit>
#include <cstring>

namespace drive::codec
{
    void ByteWriter::u16(std::uint16_t v)
    {
        u8(static_cast<std::uint8_t>(v >> 8));
        u8(static_cast<std::uint8_t>(v));
    }

    void ByteWriter::u32(std::uint32_t v)
    {
        for (int shift = 24; shift >= 0; shift -= 8)
            u8(static_cast<std::uint8_t>(v >> shift));
    }

    void ByteWriter::u64(std::uint64_t v)
    {
        for (int shift = 56; shift >= 0; shift -= 8)
            u8(static_cast<std::uint8_t>(v >> shift));
    }

    void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void ByteWriter::str(std::string_view s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        m_buf.insert(m_buf.end(), s.begin(), s.end());
    }

    std::span<const std::uint8_t> ByteReader::need(std::size_t n)
    {
        if (m_data.size() - m_pos < n)
        {
            throw Error(ErrorCode::ProtocolError, "payload truncated");
        }
        auto out = m_data.subspan(m_pos, n);
        m_pos += n;
        return out;
    }

    std::uint8_t ByteReader::u8() { return need(1)[0]; }

    std::uint16_t ByteReader::u16()
    {
        auto b = need(2);
        return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
    }

    std::uint32_t ByteReader::u32()
    {
        std::uint32_t v = 0;
        for (std::uint8_t b : need(4))
            v = (v << 8) | b;
        return v;
    }

    std::uint64_t ByteReader::u64()
    {
        std::uint64_t v = 0;
        for (std::uint8_t b : need(8))
            v = (v << 8) | b;
        return v;
    }

    double ByteReader::f64() { return std::bit_cast<double>(u64()); }

    bool ByteReader::boolean()
    {
        const std::uint8_t b = u8();
        if (b > 1)
        {
            throw Error(ErrorCode::ProtocolError, "boolean byte out of range");
        }
        return b == 1;
    }

    std::string ByteReader::str()
    {
        const std::uint32_t n = u32();
        auto b = need(n);
        return std::string(b.begin(), b.end());
    }

    void ByteReader::expect_done() const
    {
        if (!done())
        {
            throw Error(ErrorCode::ProtocolError, "trailing bytes in payload");
        }
    }

    void put(ByteWriter &w, const ControlAction &v)
    {
        w.f64(v.throttle);
        w.f64(v.steer);
        w.f64(v.brake);
        w.boolean(v.hand_brake);
        w.boolean(v.reverse);
        w.boolean(v.manual_gear_shift);
        w.i32(v.gear);
    }

    ControlAction get_control(ByteReader &r)
    {
        ControlAction v;
        v.throttle = r.f64();
        v.steer = r.f64();
        v.brake = r.f64();
        v.hand_brake = r.boolean();
        v.reverse = r.boolean();
        v.manual_gear_shift = r.boolean();
        v.gear = r.i32();
        return v;
    }

    void put(ByteWriter &w, const Transform &v)
    {
        w.f64(v.x);
        w.f64(v.y);
        w.f64(v.yaw);
    }

    Transform get_transform(ByteReader &r)
    {
        Transform v;
        v.x = r.f64();
        v.y = r.f64();
        v.yaw = r.f64();
        return v;
    }

    void put(ByteWriter &w, const VehicleState &v)
    {
        put(w, v.transform);
        w.f64(v.speed);
        w.f64(v.yaw_rate);
        w.i64(v.frame);
        w.f64(v.sim_time);
    }

    VehicleState get_vehicle_state(ByteReader &r)
    {
        VehicleState v;
        v.transform = get_transform(r);
        v.speed = r.f64();
        v.yaw_rate = r.f64();
        v.frame = r.i64();
        v.sim_time = r.f64();
        return v;
    }

    void put(ByteWriter &w, const ActorBlueprint &v)
    {
        w.u8(static_cast<std::uint8_t>(v.kind));
        w.f64(v.length);
        w.f64(v.width);
        w.f64(v.max_wheel_angle);
        w.f64(v.wheelbase);
        w.f64(v.max_accel);
        w.f64(v.max_brake_decel);
        w.f64(v.drag);
    }

    ActorBlueprint get_blueprint(ByteReader &r)
    {
        ActorBlueprint v;
        const std::uint8_t kind = r.u8();
        if (kind > static_cast<std::uint8_t>(ActorKind::StaticProp))
        {
            throw Error(ErrorCode::ProtocolError, "unknown actor kind");
        }
        v.kind = static_cast<ActorKind>(kind);
        v.length = r.f64();
        v.width = r.f64();
        v.max_wheel_angle = r.f64();
        v.wheelbase = r.f64();
        v.max_accel = r.f64();
        v.max_brake_decel = r.f64();
        v.drag = r.f64();
        return v;
    }

    void put(ByteWriter &w, const WeatherParams &v)
    {
        w.f64(v.cloudiness);
        w.f64(v.precipitation);
        w.f64(v.fog_density);
        w.f64(v.sun_altitude);
    }

    WeatherParams get_weather(ByteReader &r)
    {
        WeatherParams v;
        v.cloudiness = r.f64();
        v.precipitation = r.f64();
        v.fog_density = r.f64();
        v.sun_altitude = r.f64();
        return v;
    }

    void put(ByteWriter &w, const Actor &v)
    {
        w.u64(v.id);
        put(w, v.blueprint);
        put(w, v.state);
        put(w, v.previous);
        w.boolean(v.control.has_value());
        if (v.control)
            put(w, *v.control);
        w.boolean(v.autopilot.has_value());
        if (v.autopilot)
        {
            w.f64(v.autopilot->speed);
            w.f64(v.autopilot->arc);
        }
    }

    Actor get_actor(ByteReader &r)
    {
        Actor v;
        v.id = r.u64();
        v.blueprint = get_blueprint(r);
        v.state = get_vehicle_state(r);
        v.previous = get_vehicle_state(r);
        if (r.boolean())
            v.control = get_control(r);
        if (r.boolean())
        {
            Autopilot ap;
            ap.speed = r.f64();
            ap.arc = r.f64();
            v.autopilot = std::move(ap);
        }
        return v;
    }

    void put(ByteWriter &w, const WorldState &v)
    {
        w.i64(v.frame);
        w.f64(v.fixed_delta);
        w.u32(static_cast<std::uint32_t>(v.actors.size()));
        for (const Actor &a : v.actors)
            put(w, a);
        put(w, v.weather);
        w.u32(static_cast<std::uint32_t>(v.collisions_this_frame.size()));
        for (const auto &[a, b] : v.collisions_this_frame)
        {
            w.u64(a);
            w.u64(b);
        }
        w.u64(v.seed);
    }

    WorldState get_world_state(ByteReader &r)
    {
        WorldState v;
        v.frame = r.i64();
        v.fixed_delta = r.f64();
        const std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i)
            v.actors.push_back(get_actor(r));
        v.weather = get_weather(r);
        const std::uint32_t c = r.u32();
        for (std::uint32_t i = 0; i < c; ++i)
        {
            const ActorId a = r.u64();
            const ActorId b = r.u64();
            v.collisions_this_frame.emplace_back(a, b);
        }
        v.seed = r.u64();
        return v;
    }

    void put(ByteWriter &w, const SensorSpec &v)
    {
        w.str(v.sensor_id);
        w.u8(static_cast<std::uint8_t>(v.kind));
        put(w, v.mount);
        w.f64(v.noise_stddev);
        w.i32(v.grid.cells_x);
        w.i32(v.grid.cells_y);
        w.f64(v.grid.meters_per_cell);
    }

    SensorSpec get_sensor_spec(ByteReader &r)
    {
        SensorSpec v;
        v.sensor_id = r.str();
        const std::uint8_t kind = r.u8();
        if (kind > static_cast<std::uint8_t>(SensorKind::BevOccupancy))
        {
            throw Error(ErrorCode::ProtocolError, "unknown sensor kind");
        }
        v.kind = static_cast<SensorKind>(kind);
        v.mount = get_transform(r);
        v.noise_stddev = r.f64();
        v.grid.cells_x = r.i32();
        v.grid.cells_y = r.i32();
        v.grid.meters_per_cell = r.f64();
        return v;
    }

    void put(ByteWriter &w, const std::vector<SensorSpec> &v)
    {
        w.u32(static_cast<std::uint32_t>(v.size()));
        for (const SensorSpec &s : v)
            put(w, s);
    }

    std::vector<SensorSpec> get_sensor_specs(ByteReader &r)
    {
        std::vector<SensorSpec> v;
        const std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i)
            v.push_back(get_sensor_spec(r));
        return v;
    }

    namespace
    {
        struct ReadingWriter
        {
            ByteWriter &w;

            void operator()(const GnssReading &g) const
            {
                w.u8(static_cast<std::uint8_t>(SensorKind::Gnss));
                w.f64(g.location.latitude);
                w.f64(g.location.longitude);
                w.f64(g.location.altitude);
            }
            void operator()(const ImuReading &i) const
            {
                w.u8(static_cast<std::uint8_t>(SensorKind::Imu));
                w.f64(i.accel_x);
                w.f64(i.accel_y);
                w.f64(i.yaw_rate);
                w.f64(i.compass);
            }
            void operator()(const SpeedReading &s) const
            {
                w.u8(static_cast<std::uint8_t>(SensorKind::Speedometer));
                w.f64(s.speed);
            }
            void operator()(const OccupancyGrid &g) const
            {
                w.u8(static_cast<std::uint8_t>(SensorKind::BevOccupancy));
                w.i32(g.spec.cells_x);
                w.i32(g.spec.cells_y);
                w.f64(g.spec.meters_per_cell);
                w.str(g.symbols());
            }
        };
    }

    void put(ByteWriter &w, const SensorFrame &v)
    {
        w.i64(v.frame);
        w.f64(v.sim_time);
        put(w, v.weather);
        w.u32(static_cast<std::uint32_t>(v.readings.size()));
        for (const auto &[id, reading] : v.readings)
        {
            w.str(id);
            std::visit(ReadingWriter{w}, reading);
        }
    }

    SensorFrame get_sensor_frame(ByteReader &r)
    {
        SensorFrame v;
        v.frame = r.i64();
        v.sim_time = r.f64();
        v.weather = get_weather(r);
        const std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i)
        {
            std::string id = r.str();
            Reading reading;
            switch (static_cast<SensorKind>(r.u8()))
            {
            case SensorKind::Gnss:
            {
                GnssReading g;
                g.location.latitude = r.f64();
                g.location.longitude = r.f64();
                g.location.altitude = r.f64();
                reading = g;
                break;
            }
            case SensorKind::Imu:
            {
                ImuReading m;
                m.accel_x = r.f64();
                m.accel_y = r.f64();
                m.yaw_rate = r.f64();
                m.compass = r.f64();
                reading = m;
                break;
            }
            case SensorKind::Speedometer:
                reading = SpeedReading{r.f64()};
                break;
            case SensorKind::BevOccupancy:
            {
                OccupancyGrid g;
                g.spec.cells_x = r.i32();
                g.spec.cells_y = r.i32();
                g.spec.meters_per_cell = r.f64();
                const std::string symbols = r.str();
                if (g.spec.cells_x < 0 || g.spec.cells_y < 0 ||
                    symbols.size() != static_cast<std::size_t>(g.spec.cells_x) * static_cast<std::size_t>(g.spec.cells_y))
                {
                    throw Error(ErrorCode::ProtocolError, "occupancy grid size mismatch");
                }
                for (char c : symbols)
                    g.cells.push_back(cell_from_symbol(c));
                reading = std::move(g);
                break;
            }
            default:
                throw Error(ErrorCode::ProtocolError, "unknown reading kind");
            }
            v.readings.emplace(std::move(id), std::move(reading));
        }
        return v;
    }

    void put(ByteWriter &w, const DenseRoute &v)
    {
        w.f64(v.spacing);
        w.u32(static_cast<std::uint32_t>(v.waypoints.size()));
        for (const RoutePoint &p : v.waypoints)
        {
            put(w, p.pose);
            w.f64(p.arc_length);
            w.boolean(p.keypoint);
        }
    }

    DenseRoute get_dense_route(ByteReader &r)
    {
        DenseRoute v;
        v.spacing = r.f64();
        const std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i)
        {
            RoutePoint p;
            p.pose = get_transform(r);
            p.arc_length = r.f64();
            p.keypoint = r.boolean();
            v.waypoints.push_back(p);
        }
        return v;
    }

    void put(ByteWriter &w, const GeoRoute &v)
    {
        w.u32(static_cast<std::uint32_t>(v.geopoints.size()));
        for (const GeoWaypoint &g : v.geopoints)
        {
            w.f64(g.location.latitude);
            w.f64(g.location.longitude);
            w.f64(g.location.altitude);
            w.u8(static_cast<std::uint8_t>(g.road_option));
        }
    }

    GeoRoute get_geo_route(ByteReader &r)
    {
        GeoRoute v;
        const std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i)
        {
            GeoWaypoint g;
            g.location.latitude = r.f64();
            g.location.longitude = r.f64();
            g.location.altitude = r.f64();
            const std::uint8_t option = r.u8();
            if (option > static_cast<std::uint8_t>(RoadOption::Straight))
            {
                throw Error(ErrorCode::ProtocolError, "unknown road option");
            }
            g.road_option = static_cast<RoadOption>(option);
            v.geopoints.push_back(g);
        }
        return v;
    }

    void put(ByteWriter &w, const AgentParameters &v)
    {
        w.u32(static_cast<std::uint32_t>(v.size()));
        for (const auto &[k, value] : v)
        {
            w.str(k);
            w.f64(value);
        }
    }

    AgentParameters get_agent_parameters(ByteReader &r)
    {
        AgentParameters v;
        const std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i)
        {
            std::string k = r.str();
            v[std::move(k)] = r.f64();
        }
        return v;
    }

    std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::uint8_t b : bytes)
        {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::uint64_t digest(const SensorFrame &frame) { return fnv1a64(encode(frame)); }
    std::uint64_t digest(const WorldState &state) { return fnv1a64(encode(state)); }

    std::string hex64(std::uint64_t v)
    {
        static constexpr char kDigits[] = "0123456789abcdef";
        std::string out(16, '0');
        for (int i = 15; i >= 0; --i)
        {
            out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
            v >>= 4;
        }
        return out;
    }
}

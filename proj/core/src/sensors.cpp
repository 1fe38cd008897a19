#include "drive/sensors.hpp"

#include "drive/errors.hpp"
#include "drive/route.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace drive
{
    std::string_view to_string(SensorKind kind) noexcept
    {
        switch (kind)
        {
        case SensorKind::Gnss: return "gnss";
        case SensorKind::Imu: return "imu";
        case SensorKind::Speedometer: return "speedometer";
        case SensorKind::BevOccupancy: return "bev_occupancy";
        }
        return "gnss";
    }

    char cell_symbol(CellState s) noexcept
    {
        switch (s)
        {
        case CellState::Free: return '.';
        case CellState::Occupied: return '#';
        case CellState::OffRoad: return '~';
        case CellState::Ego: return 'E';
        }
        return '.';
    }

    CellState cell_from_symbol(char c)
    {
        switch (c)
        {
        case '.': return CellState::Free;
        case '#': return CellState::Occupied;
        case '~': return CellState::OffRoad;
        case 'E': return CellState::Ego;
        default: throw Error(ErrorCode::ProtocolError, std::string("bad occupancy symbol '") + c + "'");
        }
    }

    Vec2 OccupancyGrid::cell_center(std::int32_t i, std::int32_t j) const noexcept
    {
        const double m = spec.meters_per_cell;
        return {(i + 0.5) * m - spec.cells_x * m / 2.0, (j + 0.5) * m - spec.cells_y * m / 2.0};
    }

    std::string OccupancyGrid::symbols() const
    {
        std::string out;
        out.reserve(cells.size());
        for (CellState c : cells)
        {
            out.push_back(cell_symbol(c));
        }
        return out;
    }

    std::uint64_t sensor_stream_seed(std::uint64_t world_seed, std::string_view sensor_id) noexcept
    {
        // FNV-1a over the id, then a splitmix64 finalizer mixed with the world seed.
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : sensor_id)
        {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        std::uint64_t z = h ^ (world_seed + 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    SensorRig build_rig(std::vector<SensorSpec> specs, std::uint64_t world_seed)
    {
        if (specs.empty())
        {
            throw Error(ErrorCode::EmptyRig, "sensor rig needs at least one sensor");
        }
        std::set<std::string> ids;
        for (const SensorSpec &s : specs)
        {
            if (!ids.insert(s.sensor_id).second)
            {
                throw Error(ErrorCode::DuplicateSensorId, "duplicate sensor id '" + s.sensor_id + "'");
            }
            if (!(s.noise_stddev >= 0.0) || !std::isfinite(s.noise_stddev))
            {
                throw OutOfRangeError(s.sensor_id + ".noise_stddev", s.noise_stddev);
            }
            if (s.kind == SensorKind::BevOccupancy &&
                (s.grid.cells_x <= 0 || s.grid.cells_y <= 0 || !(s.grid.meters_per_cell > 0.0)))
            {
                throw OutOfRangeError(s.sensor_id + ".grid", s.grid.meters_per_cell);
            }
        }
        SensorRig rig;
        rig.m_specs = specs;
        for (SensorSpec &s : specs)
        {
            const std::uint64_t seed = sensor_stream_seed(world_seed, s.sensor_id);
            rig.m_channels.push_back({std::move(s), std::mt19937_64(seed)});
        }
        return rig;
    }

    double SensorRig::noise(Channel &ch)
    {
        if (ch.spec.noise_stddev == 0.0)
        {
            return 0.0;
        }
        std::normal_distribution<double> dist(0.0, ch.spec.noise_stddev);
        return dist(ch.rng);
    }

    OccupancyGrid rasterize_bev(const GridSpec &grid, const WorldState &world, const WorldMap &map, const Actor &ego)
    {
        OccupancyGrid out;
        out.spec = grid;
        out.cells.resize(static_cast<std::size_t>(grid.cells_x) * static_cast<std::size_t>(grid.cells_y));
        const OrientedBox ego_box = ego.box();
        const Vec2 origin = position_of(ego.state.transform);
        const double yaw = ego.state.transform.yaw;

        std::vector<OrientedBox> others;
        for (const Actor &a : world.actors)
        {
            if (a.id != ego.id)
            {
                others.push_back(a.box());
            }
        }

        for (std::int32_t j = 0; j < grid.cells_y; ++j)
        {
            for (std::int32_t i = 0; i < grid.cells_x; ++i)
            {
                const Vec2 p = origin + rotate(out.cell_center(i, j), yaw);
                CellState state = CellState::Free;
                if (ego_box.contains(p))
                {
                    state = CellState::Ego;
                }
                else if (std::any_of(others.begin(), others.end(), [&](const OrientedBox &b) { return b.contains(p); }))
                {
                    state = CellState::Occupied;
                }
                else if (off_road_distance(map, p) > 0.0)
                {
                    state = CellState::OffRoad;
                }
                out.cells[static_cast<std::size_t>(j * grid.cells_x + i)] = state;
            }
        }
        return out;
    }

    Reading SensorRig::read(Channel &ch, const WorldState &world, const WorldMap &map, const Actor &ego)
    {
        const VehicleState &s = ego.state;
        switch (ch.spec.kind)
        {
        case SensorKind::Gnss:
        {
            Vec2 p = position_of(s.transform) + rotate(position_of(ch.spec.mount), s.transform.yaw);
            p.x += noise(ch);
            p.y += noise(ch);
            return GnssReading{to_geo(p, map.geo_origin)};
        }
        case SensorKind::Imu:
        {
            ImuReading imu;
            const VehicleState &prev = ego.previous;
            if (s.frame > prev.frame)
            {
                const double dt = world.fixed_delta * static_cast<double>(s.frame - prev.frame);
                const Vec2 v_now = rotate({s.speed, 0.0}, s.transform.yaw);
                const Vec2 v_prev = rotate({prev.speed, 0.0}, prev.transform.yaw);
                const Vec2 body = rotate((v_now - v_prev) * (1.0 / dt), -s.transform.yaw);
                imu.accel_x = body.x;
                imu.accel_y = body.y;
                imu.yaw_rate = normalize_yaw(s.transform.yaw - prev.transform.yaw) / dt;
            }
            imu.accel_x += noise(ch);
            imu.accel_y += noise(ch);
            imu.compass = normalize_yaw(kPi / 2.0 - s.transform.yaw);
            return imu;
        }
        case SensorKind::Speedometer:
            return SpeedReading{std::abs(s.speed)};
        case SensorKind::BevOccupancy:
            return rasterize_bev(ch.spec.grid, world, map, ego);
        }
        throw Error(ErrorCode::Internal, "unknown sensor kind");
    }

    SensorFrame SensorRig::sample(const WorldState &world, const WorldMap &map, ActorId ego_id)
    {
        const Actor *ego = world.find(ego_id);
        if (ego == nullptr)
        {
            throw Error(ErrorCode::NoSuchActor, "no actor with id " + std::to_string(ego_id),
                        static_cast<std::int64_t>(ego_id));
        }
        SensorFrame frame;
        frame.frame = world.frame;
        frame.sim_time = world.sim_time();
        frame.weather = world.weather;
        for (Channel &ch : m_channels)
        {
            frame.readings.emplace(ch.spec.sensor_id, read(ch, world, map, *ego));
        }
        return frame;
    }
}

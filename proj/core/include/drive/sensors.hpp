#pragma once

#include "drive/core_model.hpp"
#include "drive/map.hpp"
#include "drive/world.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace drive
{
    enum class SensorKind : std::uint8_t
    {
        Gnss = 0,
        Imu = 1,
        Speedometer = 2,
        BevOccupancy = 3,
    };

    std::string_view to_string(SensorKind kind) noexcept;

    struct GridSpec
    {
        std::int32_t cells_x = 0; // along the ego's forward axis
        std::int32_t cells_y = 0; // along the ego's left axis
        double meters_per_cell = 0.0;

        friend bool operator==(const GridSpec &, const GridSpec &) = default;
    };

    struct SensorSpec
    {
        std::string sensor_id;
        SensorKind kind = SensorKind::Gnss;
        Transform mount;            // relative to the vehicle origin
        double noise_stddev = 0.0;  // meters (gnss), m/s^2 (imu); 0 disables
        GridSpec grid;              // bev_occupancy only

        friend bool operator==(const SensorSpec &, const SensorSpec &) = default;
    };

    struct GnssReading
    {
        GeoLocation location;
        friend bool operator==(const GnssReading &, const GnssReading &) = default;
    };

    struct ImuReading
    {
        double accel_x = 0.0;  // m/s^2, body forward
        double accel_y = 0.0;  // m/s^2, body left
        double yaw_rate = 0.0; // rad/s
        double compass = 0.0;  // rad clockwise from north, (-pi, pi]
        friend bool operator==(const ImuReading &, const ImuReading &) = default;
    };

    struct SpeedReading
    {
        double speed = 0.0;
        friend bool operator==(const SpeedReading &, const SpeedReading &) = default;
    };

    enum class CellState : std::uint8_t
    {
        Free = 0,
        Occupied = 1,
        OffRoad = 2,
        Ego = 3,
    };

    char cell_symbol(CellState s) noexcept;
    CellState cell_from_symbol(char c);

    /// Ego-centred, ego-aligned bird's-eye grid. Row-major: row j runs along the left
    /// axis (j = 0 is the rightmost row), column i along the forward axis (i = 0 is the
    /// rearmost column). Cell (i, j) has its centre at body coordinates
    ///   forward = (i + 0.5) * m - cells_x * m / 2,  left = (j + 0.5) * m - cells_y * m / 2.
    struct OccupancyGrid
    {
        GridSpec spec;
        std::vector<CellState> cells;

        CellState at(std::int32_t i, std::int32_t j) const { return cells[static_cast<std::size_t>(j * spec.cells_x + i)]; }
        Vec2 cell_center(std::int32_t i, std::int32_t j) const noexcept;
        std::string symbols() const;

        friend bool operator==(const OccupancyGrid &, const OccupancyGrid &) = default;
    };

    using Reading = std::variant<GnssReading, ImuReading, SpeedReading, OccupancyGrid>;

    struct SensorFrame
    {
        std::int64_t frame = 0;
        double sim_time = 0.0;
        WeatherParams weather;
        std::map<std::string, Reading> readings;

        friend bool operator==(const SensorFrame &, const SensorFrame &) = default;
    };

    /// Sensors mounted on one vehicle. Holds one noise stream per sensor, seeded
    /// from (world seed, sensor_id), so a rig is single-owner.
    class SensorRig
    {
    public:
        const std::vector<SensorSpec> &specs() const noexcept { return m_specs; }

        SensorFrame sample(const WorldState &world, const WorldMap &map, ActorId ego);

    private:
        friend SensorRig build_rig(std::vector<SensorSpec> specs, std::uint64_t world_seed);

        struct Channel
        {
            SensorSpec spec;
            std::mt19937_64 rng;
        };

        Reading read(Channel &ch, const WorldState &world, const WorldMap &map, const Actor &ego);
        double noise(Channel &ch);

        std::vector<SensorSpec> m_specs;
        std::vector<Channel> m_channels;
    };

    SensorRig build_rig(std::vector<SensorSpec> specs, std::uint64_t world_seed);

    OccupancyGrid rasterize_bev(const GridSpec &grid, const WorldState &world, const WorldMap &map, const Actor &ego);

    // Stable seed for a named noise stream.
    std::uint64_t sensor_stream_seed(std::uint64_t world_seed, std::string_view sensor_id) noexcept;
}

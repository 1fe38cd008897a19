#include "drive/errors.hpp"
#include "drive/sensors.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace drive;
using namespace drive::testing;

namespace
{
    SensorSpec gnss(std::string id = "gnss", double noise = 0.0)
    {
        SensorSpec s;
        s.sensor_id = std::move(id);
        s.kind = SensorKind::Gnss;
        s.noise_stddev = noise;
        return s;
    }

    SensorSpec imu(double noise = 0.0)
    {
        SensorSpec s;
        s.sensor_id = "imu";
        s.kind = SensorKind::Imu;
        s.noise_stddev = noise;
        return s;
    }

    SensorSpec bev(std::int32_t cx, std::int32_t cy, double m)
    {
        SensorSpec s;
        s.sensor_id = "bev";
        s.kind = SensorKind::BevOccupancy;
        s.grid = {cx, cy, m};
        return s;
    }

    ErrorCode code_of(const std::function<void()> &f)
    {
        try
        {
            f();
        }
        catch (const Error &e)
        {
            return e.code();
        }
        return ErrorCode::Internal;
    }
}

TEST(Rig, BuildErrors)
{
    EXPECT_EQ(code_of([] { build_rig({}, 1); }), ErrorCode::EmptyRig);
    EXPECT_EQ(code_of([] { build_rig({gnss("a"), gnss("a")}, 1); }), ErrorCode::DuplicateSensorId);
    EXPECT_THROW(build_rig({gnss("a", -1.0)}, 1), OutOfRangeError);
    EXPECT_THROW(build_rig({bev(0, 10, 1.0)}, 1), OutOfRangeError);
    EXPECT_THROW(build_rig({bev(10, 10, 0.0)}, 1), OutOfRangeError);
}

TEST(Rig, UnknownEgoIsNoSuchActor)
{
    World w(straight_map(), 1);
    SensorRig rig = build_rig({gnss()}, 1);
    EXPECT_EQ(code_of([&] { rig.sample(w.state(), w.map(), 5); }), ErrorCode::NoSuchActor);
}

TEST(Gnss, AtMapOriginReadsGeoOrigin)
{
    World w(straight_map(), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {0, 0, 0});
    SensorRig rig = build_rig({gnss()}, 1);
    const SensorFrame f = rig.sample(w.state(), w.map(), ego);
    const auto &g = std::get<GnssReading>(f.readings.at("gnss"));
    EXPECT_EQ(g.location.latitude, 49.0);
    EXPECT_EQ(g.location.longitude, 8.4);
    EXPECT_EQ(g.location.altitude, 110.0);
}

TEST(Gnss, NoiselessRoundTripRecoversPosition)
{
    World w(straight_map(), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {123.25, -2.5, 0.7});
    SensorRig rig = build_rig({gnss()}, 1);
    const auto g = std::get<GnssReading>(rig.sample(w.state(), w.map(), ego).readings.at("gnss"));
    const Transform back = from_geo(g.location, w.map().geo_origin);
    EXPECT_NEAR(back.x, 123.25, 1e-6);
    EXPECT_NEAR(back.y, -2.5, 1e-6);
}

TEST(Gnss, MountOffsetRotatesWithVehicle)
{
    World w(straight_map(), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {10, 0, kPi / 2});
    SensorSpec s = gnss();
    s.mount = {2.0, 0.0, 0.0};
    SensorRig rig = build_rig({s}, 1);
    const auto g = std::get<GnssReading>(rig.sample(w.state(), w.map(), ego).readings.at("gnss"));
    const Transform back = from_geo(g.location, w.map().geo_origin);
    EXPECT_NEAR(back.x, 10.0, 1e-6);
    EXPECT_NEAR(back.y, 2.0, 1e-6);
}

TEST(Gnss, NoiseHasRequestedSpread)
{
    World w(straight_map(), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {0, 0, 0});
    SensorRig rig = build_rig({gnss("gnss", 2.0)}, 77);
    double sum = 0.0, sq = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i)
    {
        const auto g = std::get<GnssReading>(rig.sample(w.state(), w.map(), ego).readings.at("gnss"));
        const double x = from_geo(g.location, w.map().geo_origin).x;
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    EXPECT_NEAR(mean, 0.0, 0.15);
    EXPECT_NEAR(sd, 2.0, 0.1);
}

TEST(Noise, ReproducibleFromSeedAndIndependentPerSensor)
{
    World w(straight_map(), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {0, 0, 0});
    auto trace = [&](std::uint64_t seed, const std::string &id) {
        SensorRig rig = build_rig({gnss(id, 1.0)}, seed);
        std::vector<double> v;
        for (int i = 0; i < 20; ++i)
            v.push_back(std::get<GnssReading>(rig.sample(w.state(), w.map(), ego).readings.at(id)).location.latitude);
        return v;
    };
    EXPECT_EQ(trace(5, "a"), trace(5, "a"));
    EXPECT_NE(trace(5, "a"), trace(6, "a"));
    EXPECT_NE(trace(5, "a"), trace(5, "b"));
    EXPECT_NE(sensor_stream_seed(1, "a"), sensor_stream_seed(1, "b"));
}

TEST(Imu, AtRestReadsZeroAndCompassFromHeading)
{
    World w(straight_map(), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {0, 0, 0});
    SensorRig rig = build_rig({imu()}, 1);
    w.tick();
    const auto r = std::get<ImuReading>(rig.sample(w.state(), w.map(), ego).readings.at("imu"));
    EXPECT_EQ(r.accel_x, 0.0);
    EXPECT_EQ(r.accel_y, 0.0);
    EXPECT_EQ(r.yaw_rate, 0.0);
    EXPECT_DOUBLE_EQ(r.compass, kPi / 2); // facing east
}

TEST(Imu, LongitudinalAccelerationMatchesModel)
{
    World w(straight_map(), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {0, 0, 0});
    SensorRig rig = build_rig({imu()}, 1);
    ControlAction c;
    c.throttle = 1.0;
    w.apply_control(ego, c);
    for (int i = 0; i < 40; ++i)
    {
        const double v_prev = w.state().find(ego)->state.speed;
        w.tick();
        const auto r = std::get<ImuReading>(rig.sample(w.state(), w.map(), ego).readings.at("imu"));
        const double expected = 3.0 - 0.05 * v_prev;
        ASSERT_NEAR(r.accel_x, expected, 1e-9);
        ASSERT_NEAR(r.accel_y, 0.0, 1e-12);
    }
}

TEST(Imu, CentripetalAccelerationOnSteadyCircle)
{
    World w(straight_map(), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {0, 0, 0});
    const ActorBlueprint bp = ActorBlueprint::sedan();
    const double v = 5.0;
    w.set_speed(ego, v);
    ControlAction c;
    c.throttle = bp.drag * v / bp.max_accel; // cancels drag
    c.steer = 0.5;
    w.apply_control(ego, c);
    SensorRig rig = build_rig({imu()}, 1);
    const double radius = bp.wheelbase / std::tan(0.5 * bp.max_wheel_angle);
    for (int i = 0; i < 60; ++i)
    {
        w.tick();
        const auto r = std::get<ImuReading>(rig.sample(w.state(), w.map(), ego).readings.at("imu"));
        ASSERT_NEAR(r.accel_y, v * v / radius, 0.05 * v * v / radius);
        ASSERT_NEAR(r.yaw_rate, v / radius, 1e-9);
    }
}

TEST(Speedometer, ReportsMagnitude)
{
    World w(straight_map(), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {0, 0, 0});
    w.set_speed(ego, -3.0);
    SensorSpec s;
    s.sensor_id = "speed";
    s.kind = SensorKind::Speedometer;
    s.noise_stddev = 1.0; // ignored: the speedometer is exact
    SensorRig rig = build_rig({s}, 1);
    EXPECT_EQ(std::get<SpeedReading>(rig.sample(w.state(), w.map(), ego).readings.at("speed")).speed, 3.0);
}

TEST(Bev, StraightRoadLayout)
{
    World w(straight_map(), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {100, 0, 0});
    w.spawn_actor(ActorBlueprint::prop(2, 2), {105, 0, 0});
    SensorRig rig = build_rig({bev(20, 20, 1.0)}, 1);
    const auto g = std::get<OccupancyGrid>(rig.sample(w.state(), w.map(), ego).readings.at("bev"));
    ASSERT_EQ(g.cells.size(), 400u);

    int ego_cells = 0, occupied = 0, off_road = 0;
    for (CellState c : g.cells)
    {
        ego_cells += c == CellState::Ego;
        occupied += c == CellState::Occupied;
        off_road += c == CellState::OffRoad;
    }
    EXPECT_EQ(ego_cells, 8);  // 4 columns (|fwd| < 2.25) x 2 rows (|left| < 1)
    EXPECT_EQ(occupied, 4);   // prop spans fwd 4..6, left -1..1
    EXPECT_EQ(off_road, 240); // rows with |left| >= 4.5
    for (std::int32_t i = 0; i < 20; ++i)
    {
        EXPECT_EQ(g.at(i, 0), CellState::OffRoad);
        EXPECT_EQ(g.at(i, 19), CellState::OffRoad);
        EXPECT_NE(g.at(i, 13), CellState::OffRoad); // left = 3.5: on the edge
    }
    EXPECT_EQ(g.at(14, 10), CellState::Occupied); // fwd 4.5, left 0.5
    EXPECT_EQ(g.at(10, 10), CellState::Ego);
}

TEST(Bev, GridTurnsWithEgo)
{
    World w(straight_map(), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {100, 0, kPi / 2});
    SensorRig rig = build_rig({bev(20, 20, 1.0)}, 1);
    const auto g = std::get<OccupancyGrid>(rig.sample(w.state(), w.map(), ego).readings.at("bev"));
    // Facing north across the east-west road: the road now runs along the left axis.
    for (std::int32_t j = 0; j < 20; ++j)
    {
        EXPECT_EQ(g.at(0, j), CellState::OffRoad);
        EXPECT_EQ(g.at(19, j), CellState::OffRoad);
    }
}

TEST(Bev, SymbolsRoundTrip)
{
    for (char c : std::string(".#~E"))
        EXPECT_EQ(cell_symbol(cell_from_symbol(c)), c);
    EXPECT_THROW(cell_from_symbol('x'), Error);
}

TEST(Frame, CarriesFrameTimeAndWeather)
{
    World w(straight_map(), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {0, 0, 0});
    WeatherParams p;
    p.fog_density = 0.4;
    w.set_weather(p);
    w.tick();
    w.tick();
    SensorRig rig = build_rig({gnss(), imu()}, 1);
    const SensorFrame f = rig.sample(w.state(), w.map(), ego);
    EXPECT_EQ(f.frame, 2);
    EXPECT_DOUBLE_EQ(f.sim_time, 0.1);
    EXPECT_EQ(f.weather, p);
    EXPECT_EQ(f.readings.size(), 2u);
}

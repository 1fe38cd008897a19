#include "drive/agent.hpp"
#include "drive/errors.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace drive;
using namespace drive::testing;

namespace
{
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

    AgentConfig straight_config()
    {
        const WorldMap map = straight_map();
        AgentConfig c;
        c.dense_route = interpolate_route(load_route_file(straight_route_path()));
        c.geo_route = to_geo(c.dense_route, map.geo_origin);
        c.geo_origin = map.geo_origin;
        return c;
    }

    // Frame an agent would see standing at `pose` with `speed`.
    SensorFrame frame_at(const Transform &pose, double speed, const GeoOrigin &origin)
    {
        SensorFrame f;
        f.readings[sensor_ids::kGnss] = GnssReading{to_geo(position_of(pose), origin)};
        ImuReading imu;
        imu.compass = normalize_yaw(kPi / 2 - pose.yaw);
        f.readings[sensor_ids::kImu] = imu;
        f.readings[sensor_ids::kSpeed] = SpeedReading{speed};
        return f;
    }
}

TEST(AgentName, Grammar)
{
    EXPECT_EQ(parse_agent_name("noop"), (AgentDescriptor{"noop", "", std::nullopt}));
    EXPECT_EQ(parse_agent_name("pp_fast"), (AgentDescriptor{"pp", "fast", std::nullopt}));
    EXPECT_EQ(parse_agent_name("pp_fast_s3"), (AgentDescriptor{"pp", "fast", 3}));
    EXPECT_EQ(parse_agent_name("pp_s99"), (AgentDescriptor{"pp", "", 99}));
    // "s0" and "s100" are not seeds, so they read as variants.
    EXPECT_EQ(parse_agent_name("pp_s0"), (AgentDescriptor{"pp", "s0", std::nullopt}));
    for (const char *bad : {"", "Neat Neat", "PP", "pp__fast", "_pp", "pp_", "pp_fast_extra", "pp-fast", "pp_fast_s1_s2"})
    {
        EXPECT_EQ(code_of([&] { parse_agent_name(bad); }), ErrorCode::MalformedName) << bad;
    }
}

TEST(AgentName, RenderRoundTrips)
{
    for (const char *name : {"noop", "pp_fast", "pp_safe_s5", "x1_y2_s10", "abc_s1"})
    {
        EXPECT_EQ(parse_agent_name(name).render(), name);
    }
}

TEST(Registry, ResolvesBuiltins)
{
    const ResolvedAgent fast = resolve_agent("pp_fast");
    EXPECT_EQ(fast.name, "pp_fast");
    EXPECT_EQ(fast.parameters.at("target_speed"), 8.0);
    EXPECT_EQ(fast.parameters.at("lookahead"), 6.0);
    EXPECT_EQ(fast.rig.size(), 3u);

    const ResolvedAgent safe = resolve_agent("pp_safe");
    EXPECT_EQ(safe.parameters.at("stop_distance"), 8.0);
    ASSERT_EQ(safe.rig.size(), 4u);
    EXPECT_EQ(safe.rig[3].kind, SensorKind::BevOccupancy);

    const auto agent = fast.factory();
    EXPECT_EQ(agent->sensors(), fast.rig);
    EXPECT_FALSE(agent->initialized());
}

TEST(Registry, SeedPerturbsParameters)
{
    const ResolvedAgent r = resolve_agent("pp_fast_s2");
    EXPECT_DOUBLE_EQ(r.parameters.at("target_speed"), 8.0 * 1.04);
    EXPECT_DOUBLE_EQ(r.parameters.at("lookahead"), 6.0 * 0.98);
    EXPECT_EQ(r.descriptor.seed, 2);
    EXPECT_EQ(r.rig, resolve_agent("pp_fast").rig);
}

TEST(Registry, UnknownAndMalformed)
{
    EXPECT_EQ(code_of([] { resolve_agent("nosuch"); }), ErrorCode::UnknownAgent);
    EXPECT_EQ(code_of([] { resolve_agent("pp_turbo"); }), ErrorCode::UnknownAgent);
    EXPECT_EQ(code_of([] { resolve_agent("pp_fast_s6"); }), ErrorCode::UnknownAgent);
    EXPECT_EQ(code_of([] { resolve_agent("noop_s1"); }), ErrorCode::UnknownAgent);
    EXPECT_EQ(code_of([] { resolve_agent("Neat Neat"); }), ErrorCode::MalformedName);
}

TEST(Registry, NamesSortedAndComplete)
{
    const auto names = AgentRegistry::with_builtins().names();
    EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
    EXPECT_EQ(names.size(), 1u + 2u * 6u);
    EXPECT_EQ(names.front(), "noop");
    EXPECT_NE(std::find(names.begin(), names.end(), "pp_safe_s5"), names.end());
    for (const std::string &n : names)
        EXPECT_NO_THROW(resolve_agent(n)) << n;
}

TEST(Registry, AddFamilyReplacesAndValidates)
{
    AgentRegistry reg = AgentRegistry::with_builtins();
    AgentFamily f;
    f.family = "noop";
    f.variants.push_back({"", {{"k", 1.0}}, NoopAgent{}.sensors()});
    f.make = [](const AgentParameters &, const std::vector<SensorSpec> &) { return std::make_unique<NoopAgent>(); };
    reg.add_family(f);
    EXPECT_EQ(reg.resolve("noop").parameters.at("k"), 1.0);
    f.family = "Bad";
    EXPECT_EQ(code_of([&] { reg.add_family(f); }), ErrorCode::MalformedName);
}

TEST(Lifecycle, SetupRunDestroy)
{
    auto agent = resolve_agent("noop").factory();
    SensorFrame f;
    f.readings[sensor_ids::kSpeed] = SpeedReading{0.0};
    EXPECT_EQ(code_of([&] { agent->run_step(f); }), ErrorCode::NotInitialized);
    EXPECT_EQ(code_of([&] { agent->setup(AgentConfig{}); }), ErrorCode::RouteEmpty);
    EXPECT_FALSE(agent->initialized());
    agent->setup(straight_config());
    EXPECT_TRUE(agent->initialized());
    EXPECT_EQ(agent->run_step(f), neutral_control());
    EXPECT_EQ(code_of([&] { agent->run_step(SensorFrame{}); }), ErrorCode::MissingSensor);
    agent->destroy();
    EXPECT_FALSE(agent->initialized());
    agent->destroy(); // idempotent
    EXPECT_EQ(code_of([&] { agent->run_step(f); }), ErrorCode::NotInitialized);
    agent->setup(straight_config()); // re-setup after destroy is allowed
    EXPECT_TRUE(agent->initialized());
}

TEST(Lifecycle, OutOfRangeOutputIsRejected)
{
    class Wild final : public Agent
    {
    public:
        std::vector<SensorSpec> sensors() const override { return {}; }

    protected:
        void on_setup(const AgentConfig &) override {}
        ControlAction on_run_step(const SensorFrame &) override
        {
            ControlAction a;
            a.steer = 1.5;
            return a;
        }
    };
    Wild w;
    w.setup(straight_config());
    EXPECT_THROW(w.run_step(SensorFrame{}), OutOfRangeError);
}

TEST(PurePursuit, SteerLaw)
{
    const PurePursuitParams p;
    EXPECT_EQ(pure_pursuit_steer(0.0, p), 0.0);
    EXPECT_EQ(pure_pursuit_steer(kPi / 2, p), 1.0);
    EXPECT_EQ(pure_pursuit_steer(-kPi / 2, p), -1.0);
    const double small = 0.1;
    EXPECT_DOUBLE_EQ(pure_pursuit_steer(small, p), std::atan2(2 * 2.9 * std::sin(small), 6.0) / 0.61);
}

TEST(PurePursuit, SpeedLoop)
{
    const PurePursuitParams p; // target 8, gain 0.5
    const ControlAction slow = speed_control(0.0, p);
    EXPECT_EQ(slow.throttle, 1.0);
    EXPECT_EQ(slow.brake, 0.0);
    EXPECT_DOUBLE_EQ(speed_control(7.0, p).throttle, 0.5);
    const ControlAction fast = speed_control(9.0, p);
    EXPECT_EQ(fast.throttle, 0.0);
    EXPECT_DOUBLE_EQ(fast.brake, 0.5);
    EXPECT_EQ(speed_control(8.0, p).brake, 0.0);
}

TEST(PurePursuit, SteersBackTowardsRoute)
{
    const AgentConfig cfg = straight_config();
    auto agent = resolve_agent("pp_fast").factory();
    agent->setup(cfg);
    const ControlAction on = agent->run_step(frame_at({10, 0, 0}, 0.0, cfg.geo_origin));
    EXPECT_NEAR(on.steer, 0.0, 1e-6);
    EXPECT_GT(on.throttle, 0.0);
    const ControlAction right_of = agent->run_step(frame_at({12, -2, 0}, 5.0, cfg.geo_origin));
    EXPECT_GT(right_of.steer, 0.0);
    const ControlAction left_of = agent->run_step(frame_at({14, 2, 0}, 5.0, cfg.geo_origin));
    EXPECT_LT(left_of.steer, 0.0);
}

TEST(PurePursuit, SafeVariantBrakesForObstacleAhead)
{
    const AgentConfig cfg = straight_config();
    auto agent = resolve_agent("pp_safe").factory();
    agent->setup(cfg);
    SensorFrame f = frame_at({10, 0, 0}, 3.0, cfg.geo_origin);
    OccupancyGrid g;
    g.spec = {40, 40, 0.5};
    g.cells.assign(1600, CellState::Free);
    f.readings[sensor_ids::kBev] = g;
    EXPECT_GT(agent->run_step(f).throttle, 0.0);
    // fwd = (i + 0.5) * 0.5 - 10: i = 30 gives 5.25 m ahead; j = 20 gives left 0.25.
    g.cells[20 * 40 + 30] = CellState::Occupied;
    f.readings[sensor_ids::kBev] = g;
    const ControlAction stop = agent->run_step(f);
    EXPECT_EQ(stop.throttle, 0.0);
    EXPECT_EQ(stop.brake, 1.0);
    // Behind the vehicle does not count.
    g.cells[20 * 40 + 30] = CellState::Free;
    g.cells[20 * 40 + 5] = CellState::Occupied;
    f.readings[sensor_ids::kBev] = g;
    EXPECT_GT(agent->run_step(f).throttle, 0.0);
}

TEST(PurePursuit, RejectsBadParameters)
{
    PurePursuitParams p;
    p.lookahead = 0.0;
    EXPECT_THROW(PurePursuitAgent(p, pure_pursuit_rig(false)), OutOfRangeError);
}

TEST(Rigs, RequiredRigMatchesDeclaredSensors)
{
    EXPECT_EQ(required_rig_for("noop").size(), 1u);
    EXPECT_EQ(required_rig_for("pp_safe_s1"), pure_pursuit_rig(true));
    EXPECT_EQ(pure_pursuit_rig(true)[3].grid, (GridSpec{40, 40, 0.5}));
}

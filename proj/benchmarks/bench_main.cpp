#include "drive/codec.hpp"
#include "drive/geometry.hpp"
#include "drive/harness.hpp"
#include "drive/map.hpp"
#include "drive/route.hpp"
#include "drive/sensors.hpp"
#include "drive/world.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>

using namespace drive;

namespace
{
    std::string data(const char *name) { return std::string(DRIVE_DATA_DIR) + "/" + name; }

    RouteFile zigzag(int keypoints)
    {
        RouteFile r;
        for (int i = 0; i < keypoints; ++i)
            r.keypoints.push_back({i * 25.0, (i % 2) * 10.0, 0.0});
        return r;
    }
}

static void BM_InterpolateRoute(benchmark::State &state)
{
    const RouteFile r = zigzag(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(interpolate_route(r, 1.0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_InterpolateRoute)->Arg(2)->Arg(20)->Arg(200);

static void BM_GeoRoundTrip(benchmark::State &state)
{
    const GeoOrigin o{49.0, 8.4, 110.0};
    Vec2 p{1234.5, -678.9};
    for (auto _ : state)
    {
        const Transform t = from_geo(to_geo(p, o), o);
        benchmark::DoNotOptimize(t);
        p.x += 1e-3;
    }
}
BENCHMARK(BM_GeoRoundTrip);

static void BM_SatSeparation(benchmark::State &state)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    std::vector<OrientedBox> boxes;
    for (int i = 0; i < 256; ++i)
        boxes.push_back({{u(rng), u(rng)}, u(rng), 4.5, 2.0});
    std::size_t i = 0;
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(sat_separation(boxes[i & 255], boxes[(i + 7) & 255]));
        ++i;
    }
}
BENCHMARK(BM_SatSeparation);

static void BM_WorldTick(benchmark::State &state)
{
    World w(load_map(data("straight200.json")), 1);
    const int n = static_cast<int>(state.range(0));
    for (int i = 0; i < n; ++i)
    {
        const ActorId id = w.spawn_actor(ActorBlueprint::sedan(), {i * 6.0, 0.0, 0.0});
        ControlAction c;
        c.throttle = 0.3;
        w.apply_control(id, c);
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(w.tick().frame);
}
BENCHMARK(BM_WorldTick)->Arg(1)->Arg(10)->Arg(50);

static void BM_BevRaster(benchmark::State &state)
{
    World w(load_map(data("straight200.json")), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {50.0, 0.0, 0.0});
    w.spawn_actor(ActorBlueprint::prop(1.0, 1.0), {58.0, 0.0, 0.0});
    const GridSpec grid{40, 40, 0.5};
    for (auto _ : state)
        benchmark::DoNotOptimize(rasterize_bev(grid, w.state(), w.map(), *w.state().find(ego)));
}
BENCHMARK(BM_BevRaster);

static void BM_SensorFrameDigest(benchmark::State &state)
{
    World w(load_map(data("straight200.json")), 1);
    const ActorId ego = w.spawn_actor(ActorBlueprint::sedan(), {50.0, 0.0, 0.0});
    SensorRig rig = build_rig({{"gnss", SensorKind::Gnss, {}, 0.0, {}},
                               {"imu", SensorKind::Imu, {}, 0.0, {}},
                               {"bev", SensorKind::BevOccupancy, {}, 0.0, GridSpec{40, 40, 0.5}}},
                              1);
    const SensorFrame f = rig.sample(w.state(), w.map(), ego);
    for (auto _ : state)
        benchmark::DoNotOptimize(codec::digest(f));
}
BENCHMARK(BM_SensorFrameDigest);

static void BM_ScenarioStraight(benchmark::State &state)
{
    const WorldMap map = load_map(data("straight200.json"));
    HarnessConfig c;
    c.agent_name = state.range(0) == 0 ? "pp_fast" : "pp_safe";
    c.route_path = data("straight200.xml");
    std::int64_t frames = 0;
    for (auto _ : state)
    {
        World w(map, 1);
        frames += run_scenario(c, w).frames_executed;
    }
    state.counters["frames/s"] = benchmark::Counter(static_cast<double>(frames), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ScenarioStraight)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

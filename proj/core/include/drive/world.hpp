#pragma once

#include "drive/core_model.hpp"
#include "drive/geometry.hpp"
#include "drive/map.hpp"
#include "drive/route.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace drive
{
    using ActorId = std::uint64_t;

    inline constexpr double kDefaultFixedDelta = 0.05;

    enum class ActorKind : std::uint8_t
    {
        Vehicle = 0,
        Pedestrian = 1,
        StaticProp = 2,
    };

    std::string_view to_string(ActorKind kind) noexcept;

    struct ActorBlueprint
    {
        ActorKind kind = ActorKind::Vehicle;
        double length = 4.5;
        double width = 2.0;
        double max_wheel_angle = 0.61; // rad, vehicles only
        double wheelbase = 2.9;        // m, vehicles only
        double max_accel = 3.0;        // m/s^2
        double max_brake_decel = 8.0;  // m/s^2
        double drag = 0.05;            // 1/s

        friend bool operator==(const ActorBlueprint &, const ActorBlueprint &) = default;

        static ActorBlueprint sedan() { return ActorBlueprint{}; }
        static ActorBlueprint pedestrian() { return {ActorKind::Pedestrian, 0.6, 0.6, 0.0, 0.0, 1.5, 3.0, 0.0}; }
        static ActorBlueprint prop(double length, double width)
        {
            return {ActorKind::StaticProp, length, width, 0.0, 0.0, 0.0, 0.0, 0.0};
        }
    };

    void validate_blueprint(const ActorBlueprint &bp);

    /// Constant-speed motion along a fixed route, used for NPCs and pedestrians.
    struct Autopilot
    {
        DenseRoute route;
        double speed = 0.0;
        double arc = 0.0; // current arc position along `route`
    };

    struct Actor
    {
        ActorId id = 0;
        ActorBlueprint blueprint;
        VehicleState state;
        VehicleState previous;                 // state one frame earlier (equal to state at spawn)
        std::optional<ControlAction> control;  // last applied, persists across ticks
        std::optional<Autopilot> autopilot;

        OrientedBox box() const noexcept
        {
            return {position_of(state.transform), state.transform.yaw, blueprint.length, blueprint.width};
        }
    };

    struct WeatherParams
    {
        double cloudiness = 0.0;
        double precipitation = 0.0;
        double fog_density = 0.0;
        double sun_altitude = 45.0; // degrees

        friend bool operator==(const WeatherParams &, const WeatherParams &) = default;
    };

    void validate_weather(const WeatherParams &w);

    struct WorldState
    {
        std::int64_t frame = 0;
        double fixed_delta = kDefaultFixedDelta;
        std::vector<Actor> actors; // sorted by id
        WeatherParams weather;
        std::vector<std::pair<ActorId, ActorId>> collisions_this_frame; // (lo, hi), sorted
        std::uint64_t seed = 0;

        double sim_time() const noexcept { return static_cast<double>(frame) * fixed_delta; }
        const Actor *find(ActorId id) const noexcept;
    };

    // Every unordered overlapping pair, (lo, hi) sorted by id.
    std::vector<std::pair<ActorId, ActorId>> detect_collisions(const std::vector<Actor> &actors);

    /// One semi-implicit kinematic bicycle step (speed, then heading, then position).
    VehicleState integrate_bicycle(const VehicleState &s, const ActorBlueprint &bp, const ControlAction &c, double dt);

    /// Deterministic fixed-step world. Single-writer: callers serialize mutation.
    class World
    {
    public:
        World(WorldMap map, std::uint64_t seed, double fixed_delta = kDefaultFixedDelta);

        ActorId spawn_actor(const ActorBlueprint &blueprint, const Transform &at);
        void apply_control(ActorId id, const ControlAction &action);
        void set_autopilot(ActorId id, DenseRoute route, double speed);
        // Teleport-style initial condition; does not touch `previous`.
        void set_speed(ActorId id, double speed);
        void set_weather(const WeatherParams &params);

        const WorldState &tick();

        const WorldState &state() const noexcept { return m_state; }
        const WorldMap &map() const noexcept { return m_map; }
        std::uint64_t seed() const noexcept { return m_state.seed; }

        // Replaces frame and actor table wholesale; used to rebuild a logged world.
        void restore(std::int64_t frame, std::vector<Actor> actors, const WeatherParams &weather);

    private:
        Actor &actor(ActorId id);
        void advance_autopilot(Actor &a);

        WorldMap m_map;
        WorldState m_state;
        ActorId m_next_id = 1;
    };
}

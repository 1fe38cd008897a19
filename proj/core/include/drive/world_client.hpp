#pragma once

#include "drive/sensors.hpp"
#include "drive/world.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace drive
{
    /// The operations a harness needs from a world, whether it lives in this
    /// process or behind a server. Each call maps 1:1 onto a World / SensorRig operation.
    class WorldClient
    {
    public:
        virtual ~WorldClient() = default;

        virtual ActorId spawn_actor(const ActorBlueprint &blueprint, const Transform &at) = 0;
        virtual void apply_control(ActorId id, const ControlAction &action) = 0;
        virtual void set_weather(const WeatherParams &params) = 0;
        virtual void set_autopilot(ActorId id, const DenseRoute &route, double speed) = 0;
        virtual WorldState tick() = 0;
        virtual WorldState get_state() = 0;
        // Samples a rig mounted on `ego`. The rig (and its noise streams) is created on
        // first use and reused for later calls with the same ego and specs.
        virtual SensorFrame sample_sensors(ActorId ego, const std::vector<SensorSpec> &rig) = 0;
        virtual const WorldMap &map() = 0;
        // Full world description (map, seed, actors incl. autopilot routes) as JSON.
        virtual std::string snapshot_document() = 0;
    };

    /// Rigs keyed by (ego, encoded specs).
    class RigCache
    {
    public:
        SensorRig &get(ActorId ego, const std::vector<SensorSpec> &specs, std::uint64_t world_seed);

    private:
        std::map<std::pair<ActorId, std::vector<std::uint8_t>>, SensorRig> m_rigs;
    };

    class LocalWorldClient final : public WorldClient
    {
    public:
        explicit LocalWorldClient(World &world) : m_world(&world) {}

        ActorId spawn_actor(const ActorBlueprint &blueprint, const Transform &at) override;
        void apply_control(ActorId id, const ControlAction &action) override;
        void set_weather(const WeatherParams &params) override;
        void set_autopilot(ActorId id, const DenseRoute &route, double speed) override;
        WorldState tick() override;
        WorldState get_state() override;
        SensorFrame sample_sensors(ActorId ego, const std::vector<SensorSpec> &rig) override;
        const WorldMap &map() override;
        std::string snapshot_document() override;

        World &world() noexcept { return *m_world; }

    private:
        World *m_world;
        RigCache m_rigs;
    };
}

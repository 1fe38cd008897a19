#include "drive/world_client.hpp"

#include "drive/codec.hpp"
#include "drive/snapshot.hpp"

namespace drive
{
    SensorRig &RigCache::get(ActorId ego, const std::vector<SensorSpec> &specs, std::uint64_t world_seed)
    {
        auto key = std::make_pair(ego, codec::encode(specs));
        auto it = m_rigs.find(key);
        if (it == m_rigs.end())
        {
            it = m_rigs.emplace(std::move(key), build_rig(specs, world_seed)).first;
        }
        return it->second;
    }

    ActorId LocalWorldClient::spawn_actor(const ActorBlueprint &blueprint, const Transform &at)
    {
        return m_world->spawn_actor(blueprint, at);
    }

    void LocalWorldClient::apply_control(ActorId id, const ControlAction &action) { m_world->apply_control(id, action); }

    void LocalWorldClient::set_weather(const WeatherParams &params) { m_world->set_weather(params); }

    void LocalWorldClient::set_autopilot(ActorId id, const DenseRoute &route, double speed)
    {
        m_world->set_autopilot(id, route, speed);
    }

    WorldState LocalWorldClient::tick() { return m_world->tick(); }

    WorldState LocalWorldClient::get_state() { return m_world->state(); }

    SensorFrame LocalWorldClient::sample_sensors(ActorId ego, const std::vector<SensorSpec> &rig)
    {
        return m_rigs.get(ego, rig, m_world->seed()).sample(m_world->state(), m_world->map(), ego);
    }

    const WorldMap &LocalWorldClient::map() { return m_world->map(); }

    std::string LocalWorldClient::snapshot_document() { return world_snapshot_json(*m_world).dump(); }
}

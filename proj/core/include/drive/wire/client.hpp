#pragma once

#include "drive/wire/protocol.hpp"
#include "drive/world_client.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace drive::wire
{
    struct HelloResult
    {
        Role granted = Role::Observer;
        bool downgraded = false;
        std::uint8_t server_version = kProtocolVersion;
    };

    /// Blocking request/response connection. Single owner, not thread-safe.
    class Client
    {
    public:
        // Throws ConnectionRefused or VersionMismatch (detail = server version).
        static Client connect(const std::string &host, std::uint16_t port, Role requested,
                              std::uint8_t version = kProtocolVersion);

        const HelloResult &hello() const noexcept { return m_hello; }
        Role role() const noexcept { return m_hello.granted; }

        // Sends one request and returns the success payload; error responses are rethrown.
        std::vector<std::uint8_t> call(MsgType type, std::vector<std::uint8_t> payload = {});

        // Raw access for protocol tests: no response-type checking.
        Envelope exchange(const Envelope &request);
        std::uint64_t next_request_id() noexcept { return m_next_id++; }

        void close() noexcept { m_socket.close(); }

    private:
        Client(Socket socket, std::uint8_t version) : m_socket(std::move(socket)), m_version(version) {}

        Socket m_socket;
        std::uint8_t m_version;
        std::uint64_t m_next_id = 1;
        HelloResult m_hello;
    };

    /// WorldClient backed by a server connection.
    class RemoteWorldClient final : public WorldClient
    {
    public:
        explicit RemoteWorldClient(Client client) : m_client(std::move(client)) {}

        ActorId spawn_actor(const ActorBlueprint &blueprint, const Transform &at) override;
        void apply_control(ActorId id, const ControlAction &action) override;
        void set_weather(const WeatherParams &params) override;
        void set_autopilot(ActorId id, const DenseRoute &route, double speed) override;
        WorldState tick() override;
        WorldState get_state() override;
        SensorFrame sample_sensors(ActorId ego, const std::vector<SensorSpec> &rig) override;
        const WorldMap &map() override;
        std::string snapshot_document() override;

        Client &connection() noexcept { return m_client; }
        // Digest the server reported for the last tick.
        std::uint64_t last_tick_digest() const noexcept { return m_last_digest; }

    private:
        Client m_client;
        std::optional<WorldMap> m_map;
        std::uint64_t m_last_digest = 0;
    };
}

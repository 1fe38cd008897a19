#pragma once

#include "drive/agent.hpp"
#include "drive/wire/protocol.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

namespace drive::wire
{
    // Answers to `ext:host:port`: asks the agent process for its name and rig.
    // Throws ConnectionRefused when nothing listens there.
    ResolvedAgent resolve_external(std::string_view endpoint);

    /// Agent whose lifecycle runs in another process, reached over the agent
    /// message range. Each setup opens a fresh connection.
    class RemoteAgent final : public Agent
    {
    public:
        RemoteAgent(std::string host, std::uint16_t port, std::vector<SensorSpec> rig);
        ~RemoteAgent() override;

        std::vector<SensorSpec> sensors() const override { return m_rig; }

        // Upper bound on one blocking read; the harness budget is normally far shorter.
        static constexpr std::chrono::seconds kReadTimeout{30};

    protected:
        void on_setup(const AgentConfig &config) override;
        ControlAction on_run_step(const SensorFrame &frame) override;
        void on_destroy() noexcept override;

    private:
        std::vector<std::uint8_t> call(MsgType type, std::vector<std::uint8_t> payload);

        std::string m_host;
        std::uint16_t m_port;
        std::vector<SensorSpec> m_rig;
        Socket m_socket;
        std::uint64_t m_next_id = 1;
    };

    /// Serves one in-process Agent over the agent message range, one session
    /// at a time. Lets any implementation stand behind an `ext:` name.
    class AgentHost
    {
    public:
        using Factory = std::function<std::unique_ptr<Agent>()>;

        AgentHost(std::string name, Factory factory, std::string bind_address = "127.0.0.1", std::uint16_t port = 0);
        AgentHost(const AgentHost &) = delete;
        AgentHost &operator=(const AgentHost &) = delete;
        ~AgentHost();

        std::uint16_t port() const noexcept { return m_port; }
        std::string endpoint() const;
        void stop() noexcept;

        int sessions_served() const noexcept { return m_sessions.load(); }

    private:
        void loop();
        void serve_session(Socket &socket);

        std::string m_name;
        Factory m_factory;
        std::vector<SensorSpec> m_rig;
        std::string m_bind;
        int m_listen_fd = -1;
        std::uint16_t m_port = 0;
        std::atomic<bool> m_running{false};
        std::atomic<int> m_sessions{0};
        std::atomic<int> m_active_fd{-1};
        std::thread m_thread;
    };

    // Shared by server and agent host.
    int listen_on(const std::string &bind_address, std::uint16_t port, std::uint16_t &bound_port);
}

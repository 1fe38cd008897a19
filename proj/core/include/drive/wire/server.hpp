#pragma once

#include "drive/wire/protocol.hpp"
#include "drive/world.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace drive::wire
{
    struct ServerOptions
    {
        std::string bind_address = "127.0.0.1";
        std::uint16_t port = 0; // 0 picks an ephemeral port
        // Called once per session event ("open", "close", ...). May be empty.
        std::function<void(const std::string &)> log;
    };

    /// Owns one World and serves it to any number of sessions. World operations
    /// from all sessions are serialized through one mutex; only the session
    /// holding the authority role may tick, apply control or change weather.
    class Server
    {
    public:
        Server(WorldMap map, std::uint64_t seed, ServerOptions options = {});
        Server(const Server &) = delete;
        Server &operator=(const Server &) = delete;
        ~Server();

        // Binds and starts accepting. Throws BindFailure.
        void start();
        void stop() noexcept;

        std::uint16_t port() const noexcept { return m_port; }
        bool running() const noexcept { return m_running.load(); }

        // Consistent copy of the world state, for tests and diagnostics.
        WorldState state_copy() const;

    private:
        struct Session;

        void accept_loop();
        void run_session(Session &session);
        Envelope dispatch(Session &session, const Envelope &request);
        void log(const std::string &line) const;

        World m_world;
        mutable std::mutex m_world_mutex;
        ServerOptions m_options;

        int m_listen_fd = -1;
        std::uint16_t m_port = 0;
        std::atomic<bool> m_running{false};
        std::thread m_accept_thread;

        std::mutex m_sessions_mutex;
        std::list<std::unique_ptr<Session>> m_sessions;
        std::uint64_t m_authority_session = 0; // 0: nobody holds it
        std::uint64_t m_next_session = 1;
    };

    // Loads the map first, so a bad map never opens a socket.
    std::unique_ptr<Server> serve(const std::string &bind_address, std::uint16_t port, const std::string &map_path,
                                  std::uint64_t seed, std::function<void(const std::string &)> log = {});
}

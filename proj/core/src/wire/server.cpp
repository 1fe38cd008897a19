#include "drive/wire/server.hpp"

#include "drive/codec.hpp"
#include "drive/map.hpp"
#include "drive/snapshot.hpp"
#include "drive/wire/remote_agent.hpp"
#include "drive/world_client.hpp"

#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <unordered_set>

namespace drive::wire
{
    struct Server::Session
    {
        std::uint64_t id = 0;
        Socket socket;
        std::thread thread;
        std::atomic<bool> done{false};
        bool greeted = false;
        Role role = Role::Observer;
        std::unordered_set<std::uint64_t> seen_ids;
        RigCache rigs;
    };

    namespace
    {
        bool authority_only(MsgType t)
        {
            return t == MsgType::Tick || t == MsgType::ApplyControl || t == MsgType::SetWeather;
        }
    }

    Server::Server(WorldMap map, std::uint64_t seed, ServerOptions options)
        : m_world(std::move(map), seed), m_options(std::move(options))
    {
    }

    Server::~Server() { stop(); }

    void Server::log(const std::string &line) const
    {
        if (m_options.log)
            m_options.log(line);
    }

    void Server::start()
    {
        m_listen_fd = listen_on(m_options.bind_address, m_options.port, m_port);
        m_running = true;
        m_accept_thread = std::thread([this] { accept_loop(); });
        log("listening on " + m_options.bind_address + ":" + std::to_string(m_port));
    }

    void Server::stop() noexcept
    {
        if (!m_running.exchange(false))
            return;
        ::shutdown(m_listen_fd, SHUT_RDWR);
        if (m_accept_thread.joinable())
            m_accept_thread.join();
        ::close(m_listen_fd);
        m_listen_fd = -1;

        std::list<std::unique_ptr<Session>> sessions;
        {
            std::lock_guard lock(m_sessions_mutex);
            sessions.swap(m_sessions);
        }
        for (auto &s : sessions)
            s->socket.shutdown();
        for (auto &s : sessions)
        {
            if (s->thread.joinable())
                s->thread.join();
        }
    }

    WorldState Server::state_copy() const
    {
        std::lock_guard lock(m_world_mutex);
        return m_world.state();
    }

    void Server::accept_loop()
    {
        while (m_running)
        {
            const int fd = ::accept4(m_listen_fd, nullptr, nullptr, SOCK_CLOEXEC);
            if (fd < 0)
            {
                if (errno == EINTR || errno == ECONNABORTED)
                    continue;
                break; // listener shut down
            }
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

            std::lock_guard lock(m_sessions_mutex);
            // Reap finished sessions so long-lived servers do not accumulate threads.
            for (auto it = m_sessions.begin(); it != m_sessions.end();)
            {
                if ((*it)->done)
                {
                    (*it)->thread.join();
                    it = m_sessions.erase(it);
                }
                else
                {
                    ++it;
                }
            }
            if (!m_running)
            {
                ::close(fd);
                break;
            }
            auto session = std::make_unique<Session>();
            session->id = m_next_session++;
            session->socket = Socket(fd);
            Session &ref = *session;
            m_sessions.push_back(std::move(session));
            ref.thread = std::thread([this, &ref] { run_session(ref); });
        }
    }

    void Server::run_session(Session &session)
    {
        log("session " + std::to_string(session.id) + " open");
        try
        {
            while (true)
            {
                std::optional<Envelope> request = session.socket.receive();
                if (!request)
                    break;
                session.socket.send(dispatch(session, *request));
            }
        }
        catch (const std::exception &e)
        {
            log("session " + std::to_string(session.id) + " dropped: " + e.what());
        }
        {
            std::lock_guard lock(m_sessions_mutex);
            if (m_authority_session == session.id)
                m_authority_session = 0;
        }
        log("session " + std::to_string(session.id) + " closed");
        session.done = true;
    }

    Envelope Server::dispatch(Session &session, const Envelope &request)
    {
        const std::uint64_t rid = request.request_id;
        if (request.protocol_version != kProtocolVersion)
        {
            return make_error(rid, ErrorCode::VersionMismatch,
                              "server speaks protocol version " + std::to_string(kProtocolVersion), kProtocolVersion);
        }
        if (!is_known(request.msg_type) || request.msg_type >= static_cast<std::uint8_t>(MsgType::AgentHello))
        {
            return make_error(rid, ErrorCode::UnknownMessage,
                              "unknown message type " + std::to_string(request.msg_type), request.msg_type);
        }
        if (!session.seen_ids.insert(rid).second)
        {
            return make_error(rid, ErrorCode::DuplicateRequestId,
                              "request id " + std::to_string(rid) + " already used in this session",
                              static_cast<std::int64_t>(rid));
        }

        const auto type = static_cast<MsgType>(request.msg_type);
        if (type != MsgType::Hello && !session.greeted)
        {
            return make_error(rid, ErrorCode::ProtocolError, "hello required before any other request");
        }
        if (authority_only(type) && session.role != Role::Authority)
        {
            return make_error(rid, ErrorCode::Forbidden, "only the authority session may do this");
        }

        try
        {
            codec::ByteReader in(request.payload);
            codec::ByteWriter out;
            switch (type)
            {
            case MsgType::Hello: {
                const std::uint8_t raw = in.u8();
                in.expect_done();
                if (raw > 1)
                    throw Error(ErrorCode::ProtocolError, "unknown role " + std::to_string(raw));
                if (session.greeted)
                    throw Error(ErrorCode::ProtocolError, "hello sent twice");
                const auto wanted = static_cast<Role>(raw);
                bool downgraded = false;
                {
                    std::lock_guard lock(m_sessions_mutex);
                    if (wanted == Role::Authority)
                    {
                        if (m_authority_session == 0)
                        {
                            m_authority_session = session.id;
                            session.role = Role::Authority;
                        }
                        else
                        {
                            downgraded = true;
                        }
                    }
                }
                session.greeted = true;
                out.u8(static_cast<std::uint8_t>(session.role));
                out.boolean(downgraded);
                out.u8(kProtocolVersion);
                log("session " + std::to_string(session.id) + " role " +
                    (session.role == Role::Authority ? "authority" : "observer") + (downgraded ? " (downgraded)" : ""));
                break;
            }
            case MsgType::SpawnActor: {
                const ActorBlueprint bp = codec::get_blueprint(in);
                const Transform at = codec::get_transform(in);
                in.expect_done();
                std::lock_guard lock(m_world_mutex);
                out.u64(m_world.spawn_actor(bp, at));
                break;
            }
            case MsgType::ApplyControl: {
                const ActorId id = in.u64();
                const ControlAction c = codec::get_control(in);
                in.expect_done();
                std::lock_guard lock(m_world_mutex);
                m_world.apply_control(id, c);
                break;
            }
            case MsgType::SetWeather: {
                const WeatherParams w = codec::get_weather(in);
                in.expect_done();
                std::lock_guard lock(m_world_mutex);
                m_world.set_weather(w);
                break;
            }
            case MsgType::Tick: {
                in.expect_done();
                std::lock_guard lock(m_world_mutex);
                const WorldState &st = m_world.tick();
                out.i64(st.frame);
                out.u64(codec::digest(st));
                codec::put(out, st);
                break;
            }
            case MsgType::GetState: {
                in.expect_done();
                std::lock_guard lock(m_world_mutex);
                codec::put(out, m_world.state());
                break;
            }
            case MsgType::SampleSensors: {
                const ActorId ego = in.u64();
                const std::vector<SensorSpec> specs = codec::get_sensor_specs(in);
                in.expect_done();
                std::lock_guard lock(m_world_mutex);
                SensorRig &rig = session.rigs.get(ego, specs, m_world.seed());
                codec::put(out, rig.sample(m_world.state(), m_world.map(), ego));
                break;
            }
            case MsgType::GetMap: {
                in.expect_done();
                std::lock_guard lock(m_world_mutex);
                out.str(serialize_map(m_world.map()));
                break;
            }
            case MsgType::SetAutopilot: {
                const ActorId id = in.u64();
                DenseRoute route = codec::get_dense_route(in);
                const double speed = in.f64();
                in.expect_done();
                std::lock_guard lock(m_world_mutex);
                m_world.set_autopilot(id, std::move(route), speed);
                break;
            }
            case MsgType::GetSnapshot: {
                in.expect_done();
                std::lock_guard lock(m_world_mutex);
                out.str(world_snapshot_json(m_world).dump());
                break;
            }
            default:
                return make_error(rid, ErrorCode::UnknownMessage, "unsupported message", request.msg_type);
            }
            return Envelope{kProtocolVersion, rid, response_type(type), out.take()};
        }
        catch (const Error &e)
        {
            return make_error(rid, e.code(), e.what(), e.detail());
        }
        catch (const std::exception &e)
        {
            return make_error(rid, ErrorCode::Internal, e.what());
        }
    }

    std::unique_ptr<Server> serve(const std::string &bind_address, std::uint16_t port, const std::string &map_path,
                                  std::uint64_t seed, std::function<void(const std::string &)> log)
    {
        WorldMap map = load_map(map_path);
        ServerOptions options;
        options.bind_address = bind_address;
        options.port = port;
        options.log = std::move(log);
        auto server = std::make_unique<Server>(std::move(map), seed, std::move(options));
        server->start();
        return server;
    }
}

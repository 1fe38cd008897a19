#include "drive/wire/remote_agent.hpp"

#include "drive/codec.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace drive::wire
{
    int listen_on(const std::string &bind_address, std::uint16_t port, std::uint16_t &bound_port)
    {
        addrinfo hints{};
        hints.ai_family = AF_INET;
        hints.ai_socktype = SOCK_STREAM;
        hints.ai_flags = AI_PASSIVE;
        addrinfo *res = nullptr;
        const std::string service = std::to_string(port);
        if (::getaddrinfo(bind_address.c_str(), service.c_str(), &hints, &res) != 0 || res == nullptr)
        {
            throw Error(ErrorCode::BindFailure, "cannot resolve bind address " + bind_address, port);
        }
        const int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
        if (fd < 0)
        {
            ::freeaddrinfo(res);
            throw Error(ErrorCode::BindFailure, std::string("socket: ") + std::strerror(errno), port);
        }
        const int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        const int rc = ::bind(fd, res->ai_addr, res->ai_addrlen);
        ::freeaddrinfo(res);
        if (rc != 0 || ::listen(fd, 16) != 0)
        {
            const std::string why = std::strerror(errno);
            ::close(fd);
            throw Error(ErrorCode::BindFailure, "cannot bind " + bind_address + ":" + service + ": " + why, port);
        }
        sockaddr_in addr{};
        socklen_t len = sizeof(addr);
        ::getsockname(fd, reinterpret_cast<sockaddr *>(&addr), &len);
        bound_port = ntohs(addr.sin_port);
        return fd;
    }

    namespace
    {
        std::vector<std::uint8_t> agent_call(Socket &socket, std::uint64_t id, MsgType type,
                                             std::vector<std::uint8_t> payload)
        {
            socket.send(Envelope{kProtocolVersion, id, static_cast<std::uint8_t>(type), std::move(payload)});
            std::optional<Envelope> reply = socket.receive();
            if (!reply)
                throw Error(ErrorCode::Io, "agent process closed the connection");
            if (reply->request_id != id)
                throw Error(ErrorCode::ProtocolError, "agent replied to the wrong request");
            if (reply->msg_type == static_cast<std::uint8_t>(MsgType::Error))
                rethrow_error(*reply);
            if (reply->msg_type != response_type(type))
                throw Error(ErrorCode::ProtocolError, "unexpected agent response type " + std::to_string(reply->msg_type));
            return std::move(reply->payload);
        }

        void set_read_timeout(Socket &socket, std::chrono::seconds t)
        {
            timeval tv{};
            tv.tv_sec = static_cast<time_t>(t.count());
            ::setsockopt(socket.fd(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
        }
    }

    ResolvedAgent resolve_external(std::string_view endpoint)
    {
        const auto [host, port] = parse_endpoint(endpoint);
        Socket socket = Socket::connect(host, port);
        set_read_timeout(socket, RemoteAgent::kReadTimeout);
        const auto reply = agent_call(socket, 1, MsgType::AgentHello, {});
        codec::ByteReader r(reply);
        r.str(); // display name, unused on this side
        std::vector<SensorSpec> rig = codec::get_sensor_specs(r);
        r.expect_done();
        if (rig.empty())
            throw Error(ErrorCode::EmptyRig, "agent at " + std::string(endpoint) + " declares no sensors");

        ResolvedAgent resolved;
        resolved.descriptor = AgentDescriptor{"ext", "", std::nullopt};
        resolved.name = "ext:" + std::string(endpoint);
        resolved.parameters = {};
        resolved.rig = rig;
        resolved.factory = [host = host, port = port, rig]() { return std::make_unique<RemoteAgent>(host, port, rig); };
        return resolved;
    }

    RemoteAgent::RemoteAgent(std::string host, std::uint16_t port, std::vector<SensorSpec> rig)
        : m_host(std::move(host)), m_port(port), m_rig(std::move(rig))
    {
    }

    RemoteAgent::~RemoteAgent() { on_destroy(); }

    std::vector<std::uint8_t> RemoteAgent::call(MsgType type, std::vector<std::uint8_t> payload)
    {
        if (!m_socket.valid())
            throw Error(ErrorCode::NotInitialized, "remote agent is not connected");
        return agent_call(m_socket, m_next_id++, type, std::move(payload));
    }

    void RemoteAgent::on_setup(const AgentConfig &config)
    {
        m_socket = Socket::connect(m_host, m_port);
        set_read_timeout(m_socket, kReadTimeout);
        codec::ByteWriter w;
        w.str(config.descriptor.render());
        codec::put(w, config.geo_route);
        codec::put(w, config.dense_route);
        codec::put(w, config.parameters);
        w.f64(config.geo_origin.ref_latitude);
        w.f64(config.geo_origin.ref_longitude);
        w.f64(config.geo_origin.ref_altitude);
        call(MsgType::AgentSetup, w.take());
    }

    ControlAction RemoteAgent::on_run_step(const SensorFrame &frame)
    {
        const auto reply = call(MsgType::AgentStep, codec::encode(frame));
        codec::ByteReader r(reply);
        const ControlAction action = codec::get_control(r);
        r.expect_done();
        return action;
    }

    void RemoteAgent::on_destroy() noexcept
    {
        if (!m_socket.valid())
            return;
        try
        {
            call(MsgType::AgentDestroy, {});
        }
        catch (...)
        {
        }
        m_socket.close();
    }

    AgentHost::AgentHost(std::string name, Factory factory, std::string bind_address, std::uint16_t port)
        : m_name(std::move(name)), m_factory(std::move(factory)), m_bind(std::move(bind_address))
    {
        m_rig = m_factory()->sensors();
        m_listen_fd = listen_on(m_bind, port, m_port);
        m_running = true;
        m_thread = std::thread([this] { loop(); });
    }

    AgentHost::~AgentHost() { stop(); }

    std::string AgentHost::endpoint() const { return m_bind + ":" + std::to_string(m_port); }

    void AgentHost::stop() noexcept
    {
        if (!m_running.exchange(false))
            return;
        ::shutdown(m_listen_fd, SHUT_RDWR);
        const int active = m_active_fd.load();
        if (active >= 0)
            ::shutdown(active, SHUT_RDWR);
        if (m_thread.joinable())
            m_thread.join();
        ::close(m_listen_fd);
        m_listen_fd = -1;
    }

    void AgentHost::loop()
    {
        while (m_running)
        {
            const int fd = ::accept4(m_listen_fd, nullptr, nullptr, SOCK_CLOEXEC);
            if (fd < 0)
            {
                if (errno == EINTR || errno == ECONNABORTED)
                    continue;
                break;
            }
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            Socket socket(fd);
            m_active_fd = fd;
            if (!m_running)
                socket.shutdown();
            try
            {
                serve_session(socket);
            }
            catch (const std::exception &)
            {
                // a broken session never takes the host down
            }
            m_active_fd = -1;
            ++m_sessions;
        }
    }

    void AgentHost::serve_session(Socket &socket)
    {
        std::unique_ptr<Agent> agent;
        while (true)
        {
            std::optional<Envelope> request = socket.receive();
            if (!request)
                break;
            const std::uint64_t rid = request->request_id;
            Envelope reply;
            if (request->protocol_version != kProtocolVersion)
            {
                reply = make_error(rid, ErrorCode::VersionMismatch, "agent host speaks protocol version 1", kProtocolVersion);
            }
            else
            {
                try
                {
                    codec::ByteReader in(request->payload);
                    codec::ByteWriter out;
                    switch (static_cast<MsgType>(request->msg_type))
                    {
                    case MsgType::AgentHello:
                        in.expect_done();
                        out.str(m_name);
                        codec::put(out, m_rig);
                        break;
                    case MsgType::AgentSetup: {
                        AgentConfig config;
                        const std::string name = in.str();
                        try
                        {
                            config.descriptor = parse_agent_name(name);
                        }
                        catch (const Error &)
                        {
                            config.descriptor = AgentDescriptor{name, "", std::nullopt};
                        }
                        config.geo_route = codec::get_geo_route(in);
                        config.dense_route = codec::get_dense_route(in);
                        config.parameters = codec::get_agent_parameters(in);
                        config.geo_origin.ref_latitude = in.f64();
                        config.geo_origin.ref_longitude = in.f64();
                        config.geo_origin.ref_altitude = in.f64();
                        in.expect_done();
                        if (agent)
                            agent->destroy();
                        agent = m_factory();
                        agent->setup(config);
                        break;
                    }
                    case MsgType::AgentStep: {
                        const SensorFrame frame = codec::get_sensor_frame(in);
                        in.expect_done();
                        if (!agent)
                            throw Error(ErrorCode::NotInitialized, "step before setup");
                        codec::put(out, agent->run_step(frame));
                        break;
                    }
                    case MsgType::AgentDestroy:
                        in.expect_done();
                        if (agent)
                            agent->destroy();
                        agent.reset();
                        break;
                    default:
                        throw Error(ErrorCode::UnknownMessage,
                                    "agent host does not handle message type " + std::to_string(request->msg_type),
                                    request->msg_type);
                    }
                    reply = Envelope{kProtocolVersion, rid, static_cast<std::uint8_t>(request->msg_type | kResponseBit),
                                     out.take()};
                }
                catch (const Error &e)
                {
                    reply = make_error(rid, e.code(), e.what(), e.detail());
                }
                catch (const std::exception &e)
                {
                    reply = make_error(rid, ErrorCode::Internal, e.what());
                }
            }
            socket.send(reply);
        }
        if (agent)
            agent->destroy();
    }
}

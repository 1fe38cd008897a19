#include "drive/wire/client.hpp"

#include "drive/codec.hpp"
#include "drive/map.hpp"

namespace drive::wire
{
    Client Client::connect(const std::string &host, std::uint16_t port, Role requested, std::uint8_t version)
    {
        Client client(Socket::connect(host, port), version);
        codec::ByteWriter w;
        w.u8(static_cast<std::uint8_t>(requested));
        const std::vector<std::uint8_t> reply = client.call(MsgType::Hello, w.take());
        codec::ByteReader r(reply);
        client.m_hello.granted = static_cast<Role>(r.u8());
        client.m_hello.downgraded = r.boolean();
        client.m_hello.server_version = r.u8();
        r.expect_done();
        return client;
    }

    Envelope Client::exchange(const Envelope &request)
    {
        m_socket.send(request);
        std::optional<Envelope> reply = m_socket.receive();
        if (!reply)
        {
            throw Error(ErrorCode::Io, "server closed the connection");
        }
        return std::move(*reply);
    }

    std::vector<std::uint8_t> Client::call(MsgType type, std::vector<std::uint8_t> payload)
    {
        const std::uint64_t id = next_request_id();
        Envelope reply = exchange(Envelope{m_version, id, static_cast<std::uint8_t>(type), std::move(payload)});
        if (reply.request_id != id)
        {
            throw Error(ErrorCode::ProtocolError, "response for request " + std::to_string(reply.request_id) +
                                                      " while waiting for " + std::to_string(id));
        }
        if (reply.msg_type == static_cast<std::uint8_t>(MsgType::Error))
        {
            rethrow_error(reply);
        }
        if (reply.msg_type != response_type(type))
        {
            throw Error(ErrorCode::ProtocolError, "unexpected response type " + std::to_string(reply.msg_type));
        }
        return std::move(reply.payload);
    }

    ActorId RemoteWorldClient::spawn_actor(const ActorBlueprint &blueprint, const Transform &at)
    {
        codec::ByteWriter w;
        codec::put(w, blueprint);
        codec::put(w, at);
        const auto reply = m_client.call(MsgType::SpawnActor, w.take());
        codec::ByteReader r(reply);
        const ActorId id = r.u64();
        r.expect_done();
        return id;
    }

    void RemoteWorldClient::apply_control(ActorId id, const ControlAction &action)
    {
        codec::ByteWriter w;
        w.u64(id);
        codec::put(w, action);
        m_client.call(MsgType::ApplyControl, w.take());
    }

    void RemoteWorldClient::set_weather(const WeatherParams &params)
    {
        m_client.call(MsgType::SetWeather, codec::encode(params));
    }

    void RemoteWorldClient::set_autopilot(ActorId id, const DenseRoute &route, double speed)
    {
        codec::ByteWriter w;
        w.u64(id);
        codec::put(w, route);
        w.f64(speed);
        m_client.call(MsgType::SetAutopilot, w.take());
    }

    WorldState RemoteWorldClient::tick()
    {
        const auto reply = m_client.call(MsgType::Tick);
        codec::ByteReader r(reply);
        const std::int64_t frame = r.i64();
        m_last_digest = r.u64();
        WorldState st = codec::get_world_state(r);
        r.expect_done();
        if (st.frame != frame)
        {
            throw Error(ErrorCode::ProtocolError, "tick reply frame does not match its state");
        }
        return st;
    }

    WorldState RemoteWorldClient::get_state()
    {
        const auto reply = m_client.call(MsgType::GetState);
        codec::ByteReader r(reply);
        WorldState st = codec::get_world_state(r);
        r.expect_done();
        return st;
    }

    SensorFrame RemoteWorldClient::sample_sensors(ActorId ego, const std::vector<SensorSpec> &rig)
    {
        codec::ByteWriter w;
        w.u64(ego);
        codec::put(w, rig);
        const auto reply = m_client.call(MsgType::SampleSensors, w.take());
        codec::ByteReader r(reply);
        SensorFrame frame = codec::get_sensor_frame(r);
        r.expect_done();
        return frame;
    }

    const WorldMap &RemoteWorldClient::map()
    {
        if (!m_map)
        {
            const auto reply = m_client.call(MsgType::GetMap);
            codec::ByteReader r(reply);
            const std::string doc = r.str();
            r.expect_done();
            m_map = parse_map(doc);
        }
        return *m_map;
    }

    std::string RemoteWorldClient::snapshot_document()
    {
        const auto reply = m_client.call(MsgType::GetSnapshot);
        codec::ByteReader r(reply);
        std::string doc = r.str();
        r.expect_done();
        return doc;
    }
}

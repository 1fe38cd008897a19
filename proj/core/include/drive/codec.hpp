#pragma once

#include "drive/agent_types.hpp"
#include "drive/core_model.hpp"
#include "drive/route.hpp"
#include "drive/sensors.hpp"
#include "drive/world.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Canonical binary encoding: fixed field order, integers big-endian, decimals as
// 8-byte IEEE-754 (big-endian bit pattern), strings as u32 length + bytes.
namespace drive::codec
{
    class ByteWriter
    {
    public:
        void u8(std::uint8_t v) { m_buf.push_back(v); }
        void u16(std::uint16_t v);
        void u32(std::uint32_t v);
        void u64(std::uint64_t v);
        void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
        void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
        void f64(double v);
        void boolean(bool v) { u8(v ? 1 : 0); }
        void str(std::string_view s);

        const std::vector<std::uint8_t> &bytes() const noexcept { return m_buf; }
        std::vector<std::uint8_t> take() noexcept { return std::move(m_buf); }

    private:
        std::vector<std::uint8_t> m_buf;
    };

    /// Throws ProtocolError on underflow or malformed values.
    class ByteReader
    {
    public:
        explicit ByteReader(std::span<const std::uint8_t> data) : m_data(data) {}

        std::uint8_t u8();
        std::uint16_t u16();
        std::uint32_t u32();
        std::uint64_t u64();
        std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
        std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
        double f64();
        bool boolean();
        std::string str();

        bool done() const noexcept { return m_pos == m_data.size(); }
        void expect_done() const;

    private:
        std::span<const std::uint8_t> need(std::size_t n);

        std::span<const std::uint8_t> m_data;
        std::size_t m_pos = 0;
    };

    void put(ByteWriter &w, const ControlAction &v);
    void put(ByteWriter &w, const Transform &v);
    void put(ByteWriter &w, const VehicleState &v);
    void put(ByteWriter &w, const ActorBlueprint &v);
    void put(ByteWriter &w, const WeatherParams &v);
    // Autopilot progress (speed, arc) travels; the route itself does not.
    void put(ByteWriter &w, const Actor &v);
    void put(ByteWriter &w, const WorldState &v);
    void put(ByteWriter &w, const SensorSpec &v);
    void put(ByteWriter &w, const std::vector<SensorSpec> &v);
    void put(ByteWriter &w, const SensorFrame &v);
    void put(ByteWriter &w, const DenseRoute &v);
    void put(ByteWriter &w, const GeoRoute &v);
    void put(ByteWriter &w, const AgentParameters &v);

    ControlAction get_control(ByteReader &r);
    Transform get_transform(ByteReader &r);
    VehicleState get_vehicle_state(ByteReader &r);
    ActorBlueprint get_blueprint(ByteReader &r);
    WeatherParams get_weather(ByteReader &r);
    Actor get_actor(ByteReader &r);
    WorldState get_world_state(ByteReader &r);
    SensorSpec get_sensor_spec(ByteReader &r);
    std::vector<SensorSpec> get_sensor_specs(ByteReader &r);
    SensorFrame get_sensor_frame(ByteReader &r);
    DenseRoute get_dense_route(ByteReader &r);
    GeoRoute get_geo_route(ByteReader &r);
    AgentParameters get_agent_parameters(ByteReader &r);

    template <typename T>
    std::vector<std::uint8_t> encode(const T &v)
    {
        ByteWriter w;
        put(w, v);
        return w.take();
    }

    std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept;

    std::uint64_t digest(const SensorFrame &frame);
    std::uint64_t digest(const WorldState &state);

    std::string hex64(std::uint64_t v);
}

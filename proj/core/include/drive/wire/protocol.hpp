#pragma once

#include "drive/errors.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drive::wire
{
    inline constexpr std::uint8_t kProtocolVersion = 1;
    inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

    /*
     * Message table, frozen for protocol version 1. A successful response
     * carries the request type with bit 0x80 set; failures come back as Error.
     *
     *   0x01 Hello           u8 role                        -> u8 granted, u8 downgraded, u8 server_version
     *   0x02 SpawnActor      blueprint, transform           -> u64 id
     *   0x03 ApplyControl    u64 id, control                -> (empty)
     *   0x04 SetWeather      weather                        -> (empty)
     *   0x05 Tick            (empty)                        -> i64 frame, u64 state digest, world state
     *   0x06 GetState        (empty)                        -> world state
     *   0x07 SampleSensors   u64 ego, sensor specs          -> sensor frame
     *   0x08 GetMap          (empty)                        -> str map document
     *   0x09 SetAutopilot    u64 id, dense route, f64 speed -> (empty)
     *   0x0A GetSnapshot     (empty)                        -> str world snapshot JSON
     *
     *   0x40 AgentHello      (empty)                        -> str name, sensor specs
     *   0x41 AgentSetup      str name, geo route, dense route, parameters, f64 lat, f64 lon, f64 alt -> (empty)
     *   0x42 AgentStep       sensor frame                   -> control
     *   0x43 AgentDestroy    (empty)                        -> (empty)
     *
     *   0x7F Error           u16 code, i64 detail, str message
     */
    enum class MsgType : std::uint8_t
    {
        Hello = 0x01,
        SpawnActor = 0x02,
        ApplyControl = 0x03,
        SetWeather = 0x04,
        Tick = 0x05,
        GetState = 0x06,
        SampleSensors = 0x07,
        GetMap = 0x08,
        SetAutopilot = 0x09,
        GetSnapshot = 0x0A,

        AgentHello = 0x40,
        AgentSetup = 0x41,
        AgentStep = 0x42,
        AgentDestroy = 0x43,

        Error = 0x7F,
    };

    inline constexpr std::uint8_t kResponseBit = 0x80;

    bool is_known(std::uint8_t type) noexcept;
    constexpr std::uint8_t response_type(MsgType t) noexcept { return static_cast<std::uint8_t>(t) | kResponseBit; }

    enum class Role : std::uint8_t
    {
        Authority = 0,
        Observer = 1,
    };

    /// One framed message. On the wire: u32 length (big-endian, counts every byte
    /// after itself), u8 protocol_version, u64 request_id, u8 msg_type, payload.
    struct Envelope
    {
        std::uint8_t protocol_version = kProtocolVersion;
        std::uint64_t request_id = 0;
        std::uint8_t msg_type = 0;
        std::vector<std::uint8_t> payload;

        friend bool operator==(const Envelope &, const Envelope &) = default;
    };

    std::vector<std::uint8_t> encode_envelope(const Envelope &e);

    // Decodes one complete frame (length prefix included). Throws ProtocolError.
    Envelope decode_envelope(std::span<const std::uint8_t> frame);

    Envelope make_error(std::uint64_t request_id, ErrorCode code, std::string_view message, std::int64_t detail = 0);
    [[noreturn]] void rethrow_error(const Envelope &e);

    /// Connected TCP stream. Move-only; closes on destruction.
    class Socket
    {
    public:
        Socket() = default;
        explicit Socket(int fd) noexcept : m_fd(fd) {}
        Socket(Socket &&o) noexcept : m_fd(o.m_fd) { o.m_fd = -1; }
        Socket &operator=(Socket &&o) noexcept;
        Socket(const Socket &) = delete;
        Socket &operator=(const Socket &) = delete;
        ~Socket() { close(); }

        static Socket connect(const std::string &host, std::uint16_t port);

        bool valid() const noexcept { return m_fd >= 0; }
        int fd() const noexcept { return m_fd; }
        void close() noexcept;
        void shutdown() noexcept;

        void send(const Envelope &e);
        // nullopt on orderly EOF before a frame starts; throws on partial frames.
        std::optional<Envelope> receive();

    private:
        bool read_exact(std::uint8_t *dst, std::size_t n, bool eof_ok);

        int m_fd = -1;
    };

    // "host:port" -> pair. Throws ParseError on malformed input.
    std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint);
}

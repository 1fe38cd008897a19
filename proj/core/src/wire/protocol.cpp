#include "drive/wire/protocol.hpp"

#include "drive/codec.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <charconv>

namespace drive::wire
{
    bool is_known(std::uint8_t type) noexcept
    {
        return (type >= 0x01 && type <= 0x0A) || (type >= 0x40 && type <= 0x43);
    }

    std::vector<std::uint8_t> encode_envelope(const Envelope &e)
    {
        codec::ByteWriter w;
        w.u32(static_cast<std::uint32_t>(1 + 8 + 1 + e.payload.size()));
        w.u8(e.protocol_version);
        w.u64(e.request_id);
        w.u8(e.msg_type);
        std::vector<std::uint8_t> out = w.take();
        out.insert(out.end(), e.payload.begin(), e.payload.end());
        return out;
    }

    Envelope decode_envelope(std::span<const std::uint8_t> frame)
    {
        codec::ByteReader r(frame);
        const std::uint32_t length = r.u32();
        if (length != frame.size() - 4)
        {
            throw Error(ErrorCode::ProtocolError, "length prefix does not match frame size");
        }
        if (length < 10)
        {
            throw Error(ErrorCode::ProtocolError, "frame shorter than the envelope header");
        }
        Envelope e;
        e.protocol_version = r.u8();
        e.request_id = r.u64();
        e.msg_type = r.u8();
        e.payload.assign(frame.begin() + 14, frame.end());
        return e;
    }

    Envelope make_error(std::uint64_t request_id, ErrorCode code, std::string_view message, std::int64_t detail)
    {
        codec::ByteWriter w;
        w.u16(static_cast<std::uint16_t>(code));
        w.i64(detail);
        w.str(message);
        return Envelope{kProtocolVersion, request_id, static_cast<std::uint8_t>(MsgType::Error), w.take()};
    }

    void rethrow_error(const Envelope &e)
    {
        codec::ByteReader r(e.payload);
        const auto code = static_cast<ErrorCode>(r.u16());
        const std::int64_t detail = r.i64();
        const std::string message = r.str();
        throw_error(code, message, detail);
    }

    Socket &Socket::operator=(Socket &&o) noexcept
    {
        if (this != &o)
        {
            close();
            m_fd = o.m_fd;
            o.m_fd = -1;
        }
        return *this;
    }

    void Socket::close() noexcept
    {
        if (m_fd >= 0)
        {
            ::close(m_fd);
            m_fd = -1;
        }
    }

    void Socket::shutdown() noexcept
    {
        if (m_fd >= 0)
        {
            ::shutdown(m_fd, SHUT_RDWR);
        }
    }

    Socket Socket::connect(const std::string &host, std::uint16_t port)
    {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo *res = nullptr;
        const std::string service = std::to_string(port);
        if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0)
        {
            throw Error(ErrorCode::ConnectionRefused, "cannot resolve " + host);
        }
        Socket sock;
        for (addrinfo *ai = res; ai != nullptr; ai = ai->ai_next)
        {
            const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
            if (fd < 0)
                continue;
            if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0)
            {
                sock = Socket(fd);
                break;
            }
            ::close(fd);
        }
        ::freeaddrinfo(res);
        if (!sock.valid())
        {
            throw Error(ErrorCode::ConnectionRefused, "connection refused by " + host + ":" + service);
        }
        const int one = 1;
        ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        return sock;
    }

    void Socket::send(const Envelope &e)
    {
        const std::vector<std::uint8_t> bytes = encode_envelope(e);
        std::size_t sent = 0;
        while (sent < bytes.size())
        {
            const ssize_t n = ::send(m_fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
            if (n < 0)
            {
                if (errno == EINTR)
                    continue;
                throw Error(ErrorCode::Io, std::string("send failed: ") + std::strerror(errno));
            }
            sent += static_cast<std::size_t>(n);
        }
    }

    bool Socket::read_exact(std::uint8_t *dst, std::size_t n, bool eof_ok)
    {
        std::size_t got = 0;
        while (got < n)
        {
            const ssize_t r = ::recv(m_fd, dst + got, n - got, 0);
            if (r == 0)
            {
                if (eof_ok && got == 0)
                    return false;
                throw Error(ErrorCode::Io, "connection closed mid-frame");
            }
            if (r < 0)
            {
                if (errno == EINTR)
                    continue;
                throw Error(ErrorCode::Io, std::string("recv failed: ") + std::strerror(errno));
            }
            got += static_cast<std::size_t>(r);
        }
        return true;
    }

    std::optional<Envelope> Socket::receive()
    {
        std::vector<std::uint8_t> frame(4);
        if (!read_exact(frame.data(), 4, true))
        {
            return std::nullopt;
        }
        const std::uint32_t length = (std::uint32_t{frame[0]} << 24) | (std::uint32_t{frame[1]} << 16) |
                                     (std::uint32_t{frame[2]} << 8) | std::uint32_t{frame[3]};
        if (length < 10 || length > kMaxFrameBytes)
        {
            throw Error(ErrorCode::ProtocolError, "frame length " + std::to_string(length) + " out of bounds");
        }
        frame.resize(4 + length);
        read_exact(frame.data() + 4, length, false);
        return decode_envelope(frame);
    }

    std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint)
    {
        const std::size_t colon = endpoint.rfind(':');
        if (colon == std::string_view::npos || colon == 0 || colon + 1 == endpoint.size())
        {
            throw ParseError(0, "endpoint '" + std::string(endpoint) + "' must be host:port");
        }
        const std::string_view port_text = endpoint.substr(colon + 1);
        unsigned port = 0;
        const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
        if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port == 0 || port > 65535)
        {
            throw ParseError(0, "endpoint '" + std::string(endpoint) + "' has an invalid port");
        }
        return {std::string(endpoint.substr(0, colon)), static_cast<std::uint16_t>(port)};
    }
}

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace drive
{
    // Stable numeric codes. The values travel over the wire, so never renumber.
    enum class ErrorCode : std::uint16_t
    {
        Internal = 0,
        OutOfRange = 1,
        NonFinite = 2,
        ParseError = 3,
        EmptyRoute = 4,
        DuplicateConsecutivePoint = 5,
        InvalidSpacing = 6,
        OriginDegenerate = 7,
        NoRoads = 8,
        SpawnCollision = 9,
        NoSuchActor = 10,
        NotAVehicle = 11,
        DuplicateSensorId = 12,
        EmptyRig = 13,
        UnknownAgent = 14,
        MalformedName = 15,
        RouteEmpty = 16,
        MissingSensor = 17,
        NotInitialized = 18,
        OutOfLockstep = 19,
        LogCorrupt = 20,
        DeterminismViolation = 21,
        BindFailure = 22,
        ConnectionRefused = 23,
        VersionMismatch = 24,
        Forbidden = 25,
        DuplicateRequestId = 26,
        UnknownMessage = 27,
        ProtocolError = 28,
        Io = 29,
    };

    std::string_view to_string(ErrorCode code) noexcept;

    /// Base of every error the library raises. `detail()` carries the one integer
    /// payload some codes need (line number, actor id, frame, server version).
    class Error : public std::runtime_error
    {
    public:
        Error(ErrorCode code, const std::string &message, std::int64_t detail = 0)
            : std::runtime_error(message), m_code(code), m_detail(detail)
        {
        }

        ErrorCode code() const noexcept { return m_code; }
        std::int64_t detail() const noexcept { return m_detail; }

    private:
        ErrorCode m_code;
        std::int64_t m_detail;
    };

    class OutOfRangeError : public Error
    {
    public:
        OutOfRangeError(std::string field, double value);

        const std::string &field() const noexcept { return m_field; }
        double value() const noexcept { return m_value; }

    private:
        std::string m_field;
        double m_value;
    };

    class ParseError : public Error
    {
    public:
        ParseError(int line, const std::string &reason)
            : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + reason, line)
        {
        }

        int line() const noexcept { return static_cast<int>(detail()); }
    };

    // Used when an error crosses the wire and is rethrown on the client side.
    [[noreturn]] void throw_error(ErrorCode code, const std::string &message, std::int64_t detail);
}

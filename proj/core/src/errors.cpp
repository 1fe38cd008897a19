#include "drive/errors.hpp"

#include <sstream>

namespace drive
{
    std::string_view to_string(ErrorCode code) noexcept
    {
        switch (code)
        {
        case ErrorCode::Internal: return "Internal";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::EmptyRoute: return "EmptyRoute";
        case ErrorCode::DuplicateConsecutivePoint: return "DuplicateConsecutivePoint";
        case ErrorCode::InvalidSpacing: return "InvalidSpacing";
        case ErrorCode::OriginDegenerate: return "OriginDegenerate";
        case ErrorCode::NoRoads: return "NoRoads";
        case ErrorCode::SpawnCollision: return "SpawnCollision";
        case ErrorCode::NoSuchActor: return "NoSuchActor";
        case ErrorCode::NotAVehicle: return "NotAVehicle";
        case ErrorCode::DuplicateSensorId: return "DuplicateSensorId";
        case ErrorCode::EmptyRig: return "EmptyRig";
        case ErrorCode::UnknownAgent: return "UnknownAgent";
        case ErrorCode::MalformedName: return "MalformedName";
        case ErrorCode::RouteEmpty: return "RouteEmpty";
        case ErrorCode::MissingSensor: return "MissingSensor";
        case ErrorCode::NotInitialized: return "NotInitialized";
        case ErrorCode::OutOfLockstep: return "OutOfLockstep";
        case ErrorCode::LogCorrupt: return "LogCorrupt";
        case ErrorCode::DeterminismViolation: return "DeterminismViolation";
        case ErrorCode::BindFailure: return "BindFailure";
        case ErrorCode::ConnectionRefused: return "ConnectionRefused";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::Forbidden: return "Forbidden";
        case ErrorCode::DuplicateRequestId: return "DuplicateRequestId";
        case ErrorCode::UnknownMessage: return "UnknownMessage";
        case ErrorCode::ProtocolError: return "ProtocolError";
        case ErrorCode::Io: return "Io";
        }
        return "Unknown";
    }

    namespace
    {
        std::string out_of_range_message(const std::string &field, double value)
        {
            std::ostringstream os;
            os.precision(17);
            os << "OutOfRange(" << field << ", " << value << ")";
            return os.str();
        }
    }

    OutOfRangeError::OutOfRangeError(std::string field, double value)
        : Error(ErrorCode::OutOfRange, out_of_range_message(field, value)), m_field(std::move(field)), m_value(value)
    {
    }

    void throw_error(ErrorCode code, const std::string &message, std::int64_t detail)
    {
        throw Error(code, message, detail);
    }
}

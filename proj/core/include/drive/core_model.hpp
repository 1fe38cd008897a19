#pragma once

#include <cstdint>
#include <numbers>

namespace drive
{
    inline constexpr double kPi = std::numbers::pi;

    /// One frame's worth of vehicle command. `steer` is normalized, positive turns left;
    /// sim_core maps it onto the physical wheel angle of the vehicle.
    struct ControlAction
    {
        double throttle = 0.0;
        double steer = 0.0;
        double brake = 0.0;
        bool hand_brake = false;
        bool reverse = false;
        bool manual_gear_shift = false;
        std::int32_t gear = 0;

        friend bool operator==(const ControlAction &, const ControlAction &) = default;
    };

    inline constexpr std::int32_t kMinGear = -1;
    inline constexpr std::int32_t kMaxGear = 6;

    /// Map-frame pose: x east, y north (meters), yaw counterclockwise from +x in (-pi, pi].
    struct Transform
    {
        double x = 0.0;
        double y = 0.0;
        double yaw = 0.0;

        friend bool operator==(const Transform &, const Transform &) = default;
    };

    struct VehicleState
    {
        Transform transform;
        double speed = 0.0;     // m/s, negative when reversing
        double yaw_rate = 0.0;  // rad/s
        std::int64_t frame = 0;
        double sim_time = 0.0;

        friend bool operator==(const VehicleState &, const VehicleState &) = default;
    };

    struct GeoLocation
    {
        double latitude = 0.0;  // degrees
        double longitude = 0.0; // degrees
        double altitude = 0.0;  // meters

        friend bool operator==(const GeoLocation &, const GeoLocation &) = default;
    };

    // Throws OutOfRangeError naming the first violated bound, in field order.
    const ControlAction &validate_control(const ControlAction &action);

    constexpr ControlAction neutral_control() noexcept { return ControlAction{}; }

    // Substituted whenever an agent cannot produce an action in time.
    constexpr ControlAction safe_stop_control() noexcept
    {
        ControlAction a{};
        a.brake = 1.0;
        return a;
    }

    // Result lies in (-pi, pi]. Throws NonFinite for inf/nan.
    double normalize_yaw(double angle);

    void validate_geo_location(const GeoLocation &g);
}

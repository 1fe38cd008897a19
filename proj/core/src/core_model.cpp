#include "drive/core_model.hpp"

#include "drive/errors.hpp"

#include <cmath>

namespace drive
{
    namespace
    {
        void check_unit(const char *field, double v)
        {
            if (!(v >= 0.0 && v <= 1.0))
            {
                throw OutOfRangeError(field, v);
            }
        }
    }

    const ControlAction &validate_control(const ControlAction &action)
    {
        check_unit("throttle", action.throttle);
        if (!(action.steer >= -1.0 && action.steer <= 1.0))
        {
            throw OutOfRangeError("steer", action.steer);
        }
        check_unit("brake", action.brake);
        if (action.gear < kMinGear || action.gear > kMaxGear)
        {
            throw OutOfRangeError("gear", static_cast<double>(action.gear));
        }
        if (action.reverse && action.manual_gear_shift && action.gear > 0)
        {
            throw OutOfRangeError("gear", static_cast<double>(action.gear));
        }
        return action;
    }

    double normalize_yaw(double angle)
    {
        if (!std::isfinite(angle))
        {
            throw Error(ErrorCode::NonFinite, "normalize_yaw: non-finite angle");
        }
        // remainder() is exact and lands in [-pi, pi]; only the closed lower end needs fixing.
        double r = std::remainder(angle, 2.0 * kPi);
        if (r <= -kPi)
        {
            r += 2.0 * kPi;
        }
        return r;
    }

    void validate_geo_location(const GeoLocation &g)
    {
        if (!(std::abs(g.latitude) <= 90.0))
        {
            throw OutOfRangeError("latitude", g.latitude);
        }
        if (!(std::abs(g.longitude) <= 180.0))
        {
            throw OutOfRangeError("longitude", g.longitude);
        }
    }
}

#pragma once

#include "drive/core_model.hpp"
#include "drive/sensors.hpp"
#include "drive/world.hpp"

#include <nlohmann/json.hpp>

#include <vector>

// JSON forms of the domain types used by run logs and world snapshots.
namespace drive
{
    using ojson = nlohmann::ordered_json;

    // Exactly the seven control fields, in declaration order.
    ojson to_json(const ControlAction &c);
    ControlAction control_from_json(const nlohmann::json &j);

    ojson to_json(const VehicleState &s); // x, y, yaw, speed, yaw_rate
    ojson to_json(const ActorBlueprint &bp);
    ActorBlueprint blueprint_from_json(const nlohmann::json &j);
    ojson to_json(const WeatherParams &w);
    WeatherParams weather_from_json(const nlohmann::json &j);
    ojson to_json(const std::vector<SensorSpec> &rig);
    std::vector<SensorSpec> rig_from_json(const nlohmann::json &j);
    ojson to_json(const DenseRoute &route);
    DenseRoute dense_route_from_json(const nlohmann::json &j);

    // Everything needed to rebuild the world bit-exactly: map document, seed,
    // fixed_delta, frame, weather and the full actor table.
    ojson world_snapshot_json(const World &world);
    World world_from_snapshot(const nlohmann::json &snapshot);
}

#pragma once

#include "drive/route.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace drive
{
    /// Parsed agent name: `family`, `family_variant`, or either followed by `_sN`, N in [1, 99].
    struct AgentDescriptor
    {
        std::string family;
        std::string variant; // empty when the name has no variant
        std::optional<int> seed;

        std::string render() const;
        friend bool operator==(const AgentDescriptor &, const AgentDescriptor &) = default;
    };

    // Throws MalformedName for anything outside the grammar.
    AgentDescriptor parse_agent_name(std::string_view name);

    // Named numeric parameters, ordered so listings and encodings are stable.
    using AgentParameters = std::map<std::string, double>;

    struct AgentConfig
    {
        AgentDescriptor descriptor;
        GeoRoute geo_route;
        DenseRoute dense_route;
        AgentParameters parameters;
        GeoOrigin geo_origin; // lets GNSS-driven agents map fixes back to the map frame
    };
}

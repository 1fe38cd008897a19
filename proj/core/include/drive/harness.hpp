#pragma once

#include "drive/agent.hpp"
#include "drive/route.hpp"
#include "drive/world.hpp"
#include "drive/world_client.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drive
{
    inline constexpr double kDefaultStepBudgetMs = 100.0;

    enum class InfractionKind : std::uint8_t
    {
        Collision,
        OffRoad,
        RouteDeviation,
        AgentTimeout,
        AgentError,
    };

    std::string_view to_string(InfractionKind kind) noexcept;
    InfractionKind infraction_kind_from_string(std::string_view s);

    struct Infraction
    {
        std::int64_t frame = 0;
        InfractionKind kind = InfractionKind::Collision;
        std::string detail;

        friend bool operator==(const Infraction &, const Infraction &) = default;
    };

    struct HarnessOptions
    {
        double step_budget_ms = kDefaultStepBudgetMs;
        double spacing = kDefaultSpacing;
    };

    /// Binds one agent to one ego vehicle and a route. The caller drives the
    /// loop: get_action, apply it, tick, repeat. Exactly one get_action per tick.
    class Harness
    {
    public:
        // Resolves through the built-in registry when `registry` is null.
        Harness(std::string_view agent_name, ActorId ego, const std::string &route_path, WorldClient &client,
                HarnessOptions options = {}, const AgentRegistry *registry = nullptr);
        // Same, with the route already in memory.
        Harness(std::string_view agent_name, ActorId ego, const RouteFile &route, WorldClient &client,
                HarnessOptions options = {}, const AgentRegistry *registry = nullptr);
        Harness(const Harness &) = delete;
        Harness &operator=(const Harness &) = delete;
        ~Harness();

        // Samples the rig, runs the agent under the step budget and returns a
        // validated action. Overruns and agent failures yield safe_stop_control()
        // and an infraction. Throws OutOfLockstep.
        ControlAction get_action();

        const ResolvedAgent &agent() const noexcept { return m_agent; }
        const RouteFile &route_file() const noexcept { return m_route_file; }
        const DenseRoute &dense_route() const noexcept { return m_dense; }
        const GeoRoute &geo_route() const noexcept { return m_geo; }
        ActorId ego() const noexcept { return m_ego; }
        std::int64_t expected_frame() const noexcept { return m_expected_frame; }

        // Digest of the sensor frame used by the last get_action.
        std::uint64_t last_sensor_digest() const noexcept { return m_last_digest; }
        // Agent-side infractions (timeouts, errors) not yet collected.
        std::vector<Infraction> take_infractions();

    private:
        struct Worker;

        void init(std::string_view agent_name, const AgentRegistry *registry);

        WorldClient *m_client;
        ActorId m_ego;
        HarnessOptions m_options;
        RouteFile m_route_file;
        DenseRoute m_dense;
        GeoRoute m_geo;
        ResolvedAgent m_agent;
        std::int64_t m_expected_frame = 0;
        std::uint64_t m_last_digest = 0;
        std::vector<Infraction> m_infractions;
        std::unique_ptr<Worker> m_worker;
    };

    struct HarnessConfig
    {
        std::string agent_name;
        std::string route_path;
        ActorBlueprint ego_blueprint = ActorBlueprint::sedan();
        double step_budget_ms = kDefaultStepBudgetMs;
        std::int64_t max_frames = 2400;
        double completion_threshold = 0.99;
        double off_route_limit = 15.0;
        double spacing = kDefaultSpacing;
        std::string log_path; // empty: no log

        void validate() const;
    };

    enum class Termination : std::uint8_t
    {
        Completed,
        MaxFrames,
        FatalInfraction,
    };

    std::string_view to_string(Termination t) noexcept;

    struct RunResult
    {
        std::string agent_name;
        std::string route_id;
        std::uint64_t seed = 0;
        std::int64_t frames_executed = 0;
        double completion = 0.0;
        std::vector<Infraction> infractions;
        Termination terminated_by = Termination::MaxFrames;
        std::string log_path;

        // Hash of every field except log_path.
        std::uint64_t hash() const;
        std::string to_json() const;
    };

    /// World-side rules evaluated after each tick. Progress uses a forward-only
    /// route cursor, so completion never decreases within a run. Deviations and off-road
    /// excursions are recorded once per excursion.
    class ScenarioMonitor
    {
    public:
        ScenarioMonitor(const DenseRoute &route, double off_route_limit) : m_tracker(route), m_limit(off_route_limit) {}

        // Returns the infractions caused by this tick, stamped with `frame`.
        std::vector<Infraction> observe(const WorldState &state, const WorldMap &map, ActorId ego, std::int64_t frame);

        double completion() const noexcept { return m_completion; }
        bool collided() const noexcept { return m_collided; }

    private:
        RouteTracker m_tracker;
        double m_limit;
        double m_completion = 0.0;
        bool m_off_route = false;
        bool m_off_road = false;
        bool m_collided = false;
    };

    // Spawns the ego at the route's first keypoint, then loops until completion,
    // max_frames or a collision. Writes the run log when config.log_path is set.
    RunResult run_scenario(const HarnessConfig &config, WorldClient &client, const AgentRegistry *registry = nullptr);
    RunResult run_scenario(const HarnessConfig &config, World &world, const AgentRegistry *registry = nullptr);

    // Re-executes a log's control sequence on a world rebuilt from its header.
    // Throws LogCorrupt or DeterminismViolation (detail = first divergent frame).
    RunResult replay(const std::string &log_path);
}

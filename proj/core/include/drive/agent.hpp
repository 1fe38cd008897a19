#pragma once

#include "drive/agent_types.hpp"
#include "drive/core_model.hpp"
#include "drive/sensors.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drive
{
    /// Lifecycle every driving agent follows: setup -> run_step* -> destroy.
    ///
    /// The public methods enforce the contract (initialization, declared sensors
    /// present, output within bounds); subclasses implement only the behaviour.
    /// Agents see SensorFrames only, never the world.
    class Agent
    {
    public:
        Agent() = default;
        Agent(const Agent &) = delete;
        Agent &operator=(const Agent &) = delete;
        virtual ~Agent() = default;

        // Sensors this agent reads; run_step rejects frames missing any of them.
        virtual std::vector<SensorSpec> sensors() const = 0;

        void setup(const AgentConfig &config);
        ControlAction run_step(const SensorFrame &frame);
        void destroy() noexcept;

        bool initialized() const noexcept { return m_initialized; }

    protected:
        virtual void on_setup(const AgentConfig &config) = 0;
        virtual ControlAction on_run_step(const SensorFrame &frame) = 0;
        virtual void on_destroy() noexcept {}

    private:
        bool m_initialized = false;
    };

    using AgentFactory = std::function<std::unique_ptr<Agent>()>;

    struct ResolvedAgent
    {
        AgentDescriptor descriptor;
        std::string name;
        AgentParameters parameters;
        std::vector<SensorSpec> rig;
        AgentFactory factory;
    };

    /// A family of agents sharing one implementation. Variants pick base
    /// parameters and a rig; seeds s1..s{max_seed} perturb the parameters.
    struct AgentFamily
    {
        struct Variant
        {
            std::string name; // empty: the bare family name is the agent
            AgentParameters parameters;
            std::vector<SensorSpec> rig;
        };

        std::string family;
        std::vector<Variant> variants;
        int max_seed = 0;
        std::function<AgentParameters(const AgentParameters &, int seed)> perturb;
        std::function<std::unique_ptr<Agent>(const AgentParameters &, const std::vector<SensorSpec> &)> make;
    };

    class AgentRegistry
    {
    public:
        // The shipped families: noop, pp (fast, safe).
        static AgentRegistry with_builtins();

        void add_family(AgentFamily family);

        // Accepts registered names and `ext:host:port` for out-of-process agents.
        // Throws MalformedName or UnknownAgent.
        ResolvedAgent resolve(std::string_view name) const;

        // Every resolvable registered name, sorted.
        std::vector<std::string> names() const;

    private:
        std::vector<AgentFamily> m_families;
    };

    // Resolution against the built-in registry.
    ResolvedAgent resolve_agent(std::string_view name);
    std::vector<SensorSpec> required_rig_for(std::string_view name);

    namespace sensor_ids
    {
        inline constexpr const char *kGnss = "gnss";
        inline constexpr const char *kImu = "imu";
        inline constexpr const char *kSpeed = "speed";
        inline constexpr const char *kBev = "bev";
    }

    // Rig shared by the pure-pursuit family; `with_bev` adds the 40x40 @ 0.5 m grid.
    std::vector<SensorSpec> pure_pursuit_rig(bool with_bev);

    /// Geometric path tracker with a proportional speed loop.
    struct PurePursuitParams
    {
        double target_speed = 8.0;
        double lookahead = 6.0;
        double stop_distance = 0.0; // 0 disables the occupancy stop
        double wheelbase = 2.9;
        double max_wheel_angle = 0.61;
        double speed_gain = 0.5;

        static PurePursuitParams from(const AgentParameters &p);
        AgentParameters to_parameters() const;
    };

    // The control law alone, so other implementations can be checked against it.
    double pure_pursuit_steer(double alpha, const PurePursuitParams &params);
    ControlAction speed_control(double speed, const PurePursuitParams &params);

    class PurePursuitAgent final : public Agent
    {
    public:
        PurePursuitAgent(PurePursuitParams params, std::vector<SensorSpec> rig);

        std::vector<SensorSpec> sensors() const override { return m_rig; }
        const PurePursuitParams &params() const noexcept { return m_params; }
        double cursor_arc() const noexcept { return m_cursor ? m_cursor->arc() : 0.0; }

    protected:
        void on_setup(const AgentConfig &config) override;
        ControlAction on_run_step(const SensorFrame &frame) override;
        void on_destroy() noexcept override;

    private:
        bool obstacle_ahead(const OccupancyGrid &grid) const;
        Vec2 point_at_arc(double arc) const;

        PurePursuitParams m_params;
        std::vector<SensorSpec> m_rig;
        DenseRoute m_route;
        GeoOrigin m_origin;
        std::optional<RouteTracker> m_cursor;
    };

    class NoopAgent final : public Agent
    {
    public:
        std::vector<SensorSpec> sensors() const override;

    protected:
        void on_setup(const AgentConfig &) override {}
        ControlAction on_run_step(const SensorFrame &) override { return neutral_control(); }
    };
}

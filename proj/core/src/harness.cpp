#include "drive/harness.hpp"

#include "drive/codec.hpp"
#include "drive/errors.hpp"
#include "drive/snapshot.hpp"
#include "drive/text.hpp"

#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

namespace drive
{
    namespace
    {
        constexpr int kLogVersion = 1;

        constexpr InfractionKind kAllKinds[] = {InfractionKind::Collision, InfractionKind::OffRoad,
                                                InfractionKind::RouteDeviation, InfractionKind::AgentTimeout,
                                                InfractionKind::AgentError};

        bool agent_side(InfractionKind k)
        {
            return k == InfractionKind::AgentTimeout || k == InfractionKind::AgentError;
        }
    }

    std::string_view to_string(InfractionKind kind) noexcept
    {
        switch (kind)
        {
        case InfractionKind::Collision:
            return "collision";
        case InfractionKind::OffRoad:
            return "off_road";
        case InfractionKind::RouteDeviation:
            return "route_deviation";
        case InfractionKind::AgentTimeout:
            return "agent_timeout";
        case InfractionKind::AgentError:
            return "agent_error";
        }
        return "unknown";
    }

    InfractionKind infraction_kind_from_string(std::string_view s)
    {
        for (InfractionKind k : kAllKinds)
        {
            if (to_string(k) == s)
                return k;
        }
        throw Error(ErrorCode::ParseError, "unknown infraction kind '" + std::string(s) + "'");
    }

    std::string_view to_string(Termination t) noexcept
    {
        switch (t)
        {
        case Termination::Completed:
            return "completed";
        case Termination::MaxFrames:
            return "max_frames";
        case Termination::FatalInfraction:
            return "fatal_infraction";
        }
        return "unknown";
    }

    // ---------------------------------------------------------------- watchdog

    /// Owns the agent between setup and destroy. Steps run on a dedicated
    /// thread so the caller can stop waiting at the budget; a step that was
    /// abandoned before it started is skipped, one that finishes late is dropped.
    struct Harness::Worker
    {
        struct Outcome
        {
            std::optional<ControlAction> action;
            std::string error;
        };

        explicit Worker(std::unique_ptr<Agent> a) : agent(std::move(a))
        {
            thread = std::thread([this] { loop(); });
        }

        ~Worker()
        {
            {
                std::lock_guard lock(mu);
                stopping = true;
                jobs.clear();
            }
            cv.notify_all();
            if (thread.joinable())
                thread.join();
            agent->destroy();
        }

        void loop()
        {
            std::unique_lock lock(mu);
            while (true)
            {
                cv.wait(lock, [&] { return stopping || !jobs.empty(); });
                if (stopping)
                    return;
                auto [seq, frame] = std::move(jobs.front());
                jobs.pop_front();
                if (abandoned.erase(seq) > 0)
                    continue;

                lock.unlock();
                Outcome out;
                try
                {
                    out.action = agent->run_step(frame);
                }
                catch (const std::exception &e)
                {
                    out.error = e.what();
                }
                catch (...)
                {
                    out.error = "unknown exception";
                }
                lock.lock();

                if (abandoned.erase(seq) == 0)
                {
                    results.emplace(seq, std::move(out));
                    cv.notify_all();
                }
            }
        }

        // nullopt when the budget ran out.
        std::optional<Outcome> step(SensorFrame frame, std::chrono::steady_clock::duration budget)
        {
            const auto deadline = std::chrono::steady_clock::now() + budget;
            std::unique_lock lock(mu);
            const std::uint64_t seq = ++next_seq;
            jobs.emplace_back(seq, std::move(frame));
            cv.notify_all();
            const bool ready = cv.wait_until(lock, deadline, [&] { return results.count(seq) > 0; });
            if (!ready)
            {
                abandoned.insert(seq);
                return std::nullopt;
            }
            Outcome out = std::move(results.at(seq));
            results.erase(seq);
            return out;
        }

        std::unique_ptr<Agent> agent;
        std::thread thread;
        std::mutex mu;
        std::condition_variable cv;
        std::deque<std::pair<std::uint64_t, SensorFrame>> jobs;
        std::map<std::uint64_t, Outcome> results;
        std::set<std::uint64_t> abandoned;
        std::uint64_t next_seq = 0;
        bool stopping = false;
    };

    // ---------------------------------------------------------------- harness

    Harness::Harness(std::string_view agent_name, ActorId ego, const std::string &route_path, WorldClient &client,
                     HarnessOptions options, const AgentRegistry *registry)
        : m_client(&client), m_ego(ego), m_options(options)
    {
        m_agent = registry ? registry->resolve(agent_name) : resolve_agent(agent_name);
        m_route_file = load_route_file(route_path);
        init(agent_name, registry);
    }

    Harness::Harness(std::string_view agent_name, ActorId ego, const RouteFile &route, WorldClient &client,
                     HarnessOptions options, const AgentRegistry *registry)
        : m_client(&client), m_ego(ego), m_options(options), m_route_file(route)
    {
        m_agent = registry ? registry->resolve(agent_name) : resolve_agent(agent_name);
        init(agent_name, registry);
    }

    Harness::~Harness() = default;

    void Harness::init(std::string_view, const AgentRegistry *)
    {
        if (!(m_options.step_budget_ms > 0.0))
        {
            throw OutOfRangeError("step_budget_ms", m_options.step_budget_ms);
        }
        validate_route_file(m_route_file);
        m_dense = interpolate_route(m_route_file, m_options.spacing);
        const WorldMap &map = m_client->map();
        m_geo = to_geo(m_dense, map.geo_origin);

        const WorldState state = m_client->get_state();
        if (state.find(m_ego) == nullptr)
        {
            throw Error(ErrorCode::NoSuchActor, "ego actor " + std::to_string(m_ego) + " does not exist",
                        static_cast<std::int64_t>(m_ego));
        }
        m_expected_frame = state.frame;

        std::unique_ptr<Agent> agent = m_agent.factory();
        AgentConfig config;
        config.descriptor = m_agent.descriptor;
        config.geo_route = m_geo;
        config.dense_route = m_dense;
        config.parameters = m_agent.parameters;
        config.geo_origin = map.geo_origin;
        agent->setup(config);
        m_worker = std::make_unique<Worker>(std::move(agent));
    }

    ControlAction Harness::get_action()
    {
        SensorFrame frame = m_client->sample_sensors(m_ego, m_agent.rig);
        if (frame.frame != m_expected_frame)
        {
            throw Error(ErrorCode::OutOfLockstep,
                        "world is at frame " + std::to_string(frame.frame) + ", harness expected " +
                            std::to_string(m_expected_frame),
                        frame.frame);
        }
        m_last_digest = codec::digest(frame);
        const std::int64_t f = frame.frame;
        m_expected_frame = f + 1;

        const auto budget = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double, std::milli>(m_options.step_budget_ms));
        const auto outcome = m_worker->step(std::move(frame), budget);
        if (!outcome)
        {
            m_infractions.push_back({f, InfractionKind::AgentTimeout,
                                     "step exceeded " + format_double(m_options.step_budget_ms) + " ms"});
            return safe_stop_control();
        }
        if (!outcome->action)
        {
            m_infractions.push_back({f, InfractionKind::AgentError, outcome->error});
            return safe_stop_control();
        }
        return *outcome->action;
    }

    std::vector<Infraction> Harness::take_infractions()
    {
        std::vector<Infraction> out;
        out.swap(m_infractions);
        return out;
    }

    // ---------------------------------------------------------------- monitor

    std::vector<Infraction> ScenarioMonitor::observe(const WorldState &state, const WorldMap &map, ActorId ego,
                                                     std::int64_t frame)
    {
        std::vector<Infraction> out;
        const Actor *a = state.find(ego);
        if (a == nullptr)
        {
            throw Error(ErrorCode::NoSuchActor, "ego vanished from the world", static_cast<std::int64_t>(ego));
        }
        const RouteProgress p = m_tracker.update(a->state.transform);
        m_completion = p.completion;

        for (const auto &[lo, hi] : state.collisions_this_frame)
        {
            if (lo == ego || hi == ego)
            {
                const ActorId other = lo == ego ? hi : lo;
                out.push_back({frame, InfractionKind::Collision, "actor " + std::to_string(other)});
                m_collided = true;
            }
        }

        const double off = off_road_distance(map, position_of(a->state.transform));
        if (off > 0.0 && !m_off_road)
        {
            out.push_back({frame, InfractionKind::OffRoad, format_double(off) + " m off the road"});
        }
        m_off_road = off > 0.0;

        const bool deviating = p.cross_track > m_limit;
        if (deviating && !m_off_route)
        {
            out.push_back({frame, InfractionKind::RouteDeviation, format_double(p.cross_track) + " m from the route"});
        }
        m_off_route = deviating;
        return out;
    }

    // ---------------------------------------------------------------- results

    void HarnessConfig::validate() const
    {
        if (!(step_budget_ms > 0.0))
            throw OutOfRangeError("step_budget_ms", step_budget_ms);
        if (max_frames <= 0)
            throw OutOfRangeError("max_frames", static_cast<double>(max_frames));
        if (!(completion_threshold > 0.0 && completion_threshold <= 1.0))
            throw OutOfRangeError("completion_threshold", completion_threshold);
        if (!(off_route_limit > 0.0))
            throw OutOfRangeError("off_route_limit", off_route_limit);
        if (!(spacing > 0.0))
            throw OutOfRangeError("spacing", spacing);
        validate_blueprint(ego_blueprint);
    }

    namespace
    {
        ojson infraction_json(const Infraction &i)
        {
            ojson j;
            j["frame"] = i.frame;
            j["kind"] = std::string(to_string(i.kind));
            j["detail"] = i.detail;
            return j;
        }

        Infraction infraction_from_json(const nlohmann::json &j)
        {
            return {j.at("frame").get<std::int64_t>(), infraction_kind_from_string(j.at("kind").get<std::string>()),
                    j.at("detail").get<std::string>()};
        }

        ojson result_body(const RunResult &r)
        {
            ojson j;
            j["agent_name"] = r.agent_name;
            j["route_id"] = r.route_id;
            j["seed"] = r.seed;
            j["frames_executed"] = r.frames_executed;
            j["completion"] = r.completion;
            ojson inf = ojson::array();
            for (const Infraction &i : r.infractions)
                inf.push_back(infraction_json(i));
            j["infractions"] = std::move(inf);
            j["terminated_by"] = std::string(to_string(r.terminated_by));
            return j;
        }

        ojson config_json(const HarnessConfig &c)
        {
            ojson j;
            j["agent_name"] = c.agent_name;
            j["route_path"] = c.route_path;
            j["ego_blueprint"] = to_json(c.ego_blueprint);
            j["step_budget_ms"] = c.step_budget_ms;
            j["max_frames"] = c.max_frames;
            j["completion_threshold"] = c.completion_threshold;
            j["off_route_limit"] = c.off_route_limit;
            j["spacing"] = c.spacing;
            return j;
        }

        Termination decide(bool collided, double completion, double threshold)
        {
            if (collided)
                return Termination::FatalInfraction;
            if (completion >= threshold)
                return Termination::Completed;
            return Termination::MaxFrames;
        }
    }

    std::uint64_t RunResult::hash() const
    {
        const std::string doc = result_body(*this).dump();
        return codec::fnv1a64(std::span(reinterpret_cast<const std::uint8_t *>(doc.data()), doc.size()));
    }

    std::string RunResult::to_json() const
    {
        ojson j = result_body(*this);
        j["log_path"] = log_path;
        j["result_hash"] = codec::hex64(hash());
        return j.dump();
    }

    // ---------------------------------------------------------------- run loop

    RunResult run_scenario(const HarnessConfig &config, WorldClient &client, const AgentRegistry *registry)
    {
        config.validate();
        const RouteFile route = load_route_file(config.route_path);
        validate_route_file(route);
        const DenseRoute dense = interpolate_route(route, config.spacing);
        const ActorId ego = client.spawn_actor(config.ego_blueprint, dense.waypoints.front().pose);

        HarnessOptions options;
        options.step_budget_ms = config.step_budget_ms;
        options.spacing = config.spacing;
        Harness harness(config.agent_name, ego, route, client, options, registry);

        const WorldState initial = client.get_state();
        const WorldMap &map = client.map();

        std::ofstream log;
        if (!config.log_path.empty())
        {
            log.open(config.log_path, std::ios::binary | std::ios::trunc);
            if (!log)
                throw Error(ErrorCode::Io, "cannot write log " + config.log_path);
            ojson header;
            header["type"] = "header";
            header["version"] = kLogVersion;
            header["agent"] = harness.agent().name;
            header["route_id"] = route.route_id;
            header["seed"] = initial.seed;
            header["fixed_delta"] = initial.fixed_delta;
            header["ego_id"] = ego;
            header["config"] = config_json(config);
            header["route"] = serialize_route(route);
            header["rig"] = to_json(harness.agent().rig);
            header["world"] = ojson::parse(client.snapshot_document());
            log << header.dump() << '\n';
        }

        ScenarioMonitor monitor(harness.dense_route(), config.off_route_limit);
        RunResult result;
        result.agent_name = harness.agent().name;
        result.route_id = route.route_id;
        result.seed = initial.seed;
        result.log_path = config.log_path;

        while (result.frames_executed < config.max_frames)
        {
            const std::int64_t f = harness.expected_frame();
            const ControlAction action = harness.get_action();
            client.apply_control(ego, action);
            const WorldState st = client.tick();
            ++result.frames_executed;

            std::vector<Infraction> found = harness.take_infractions();
            for (Infraction &i : monitor.observe(st, map, ego, f))
                found.push_back(std::move(i));

            if (log.is_open())
            {
                ojson rec;
                rec["type"] = "frame";
                rec["frame"] = f;
                rec["sim_time"] = st.sim_time();
                rec["control"] = to_json(action);
                rec["sensor_digest"] = codec::hex64(harness.last_sensor_digest());
                rec["ego"] = to_json(st.find(ego)->state);
                ojson inf = ojson::array();
                for (const Infraction &i : found)
                    inf.push_back(infraction_json(i));
                rec["infractions"] = std::move(inf);
                log << rec.dump() << '\n';
            }
            result.infractions.insert(result.infractions.end(), found.begin(), found.end());

            if (monitor.collided() || monitor.completion() >= config.completion_threshold)
                break;
        }
        result.completion = monitor.completion();
        result.terminated_by = decide(monitor.collided(), result.completion, config.completion_threshold);

        if (log.is_open())
        {
            ojson footer;
            footer["type"] = "result";
            footer["result"] = result_body(result);
            footer["result_hash"] = codec::hex64(result.hash());
            log << footer.dump() << '\n';
            log.flush();
            if (!log)
                throw Error(ErrorCode::Io, "failed writing log " + config.log_path);
        }
        return result;
    }

    RunResult run_scenario(const HarnessConfig &config, World &world, const AgentRegistry *registry)
    {
        LocalWorldClient client(world);
        return run_scenario(config, client, registry);
    }

    // ---------------------------------------------------------------- replay

    namespace
    {
        [[noreturn]] void corrupt(std::size_t line, const std::string &why)
        {
            throw Error(ErrorCode::LogCorrupt, "log line " + std::to_string(line) + ": " + why,
                        static_cast<std::int64_t>(line));
        }

        [[noreturn]] void diverged(std::int64_t frame, const std::string &what)
        {
            throw Error(ErrorCode::DeterminismViolation, "replay diverged at frame " + std::to_string(frame) + ": " + what,
                        frame);
        }

        bool same_state(const VehicleState &s, const nlohmann::json &j)
        {
            return s.transform.x == j.at("x").get<double>() && s.transform.y == j.at("y").get<double>() &&
                   s.transform.yaw == j.at("yaw").get<double>() && s.speed == j.at("speed").get<double>() &&
                   s.yaw_rate == j.at("yaw_rate").get<double>();
        }
    }

    RunResult replay(const std::string &log_path)
    {
        std::ifstream in(log_path, std::ios::binary);
        if (!in)
            throw Error(ErrorCode::Io, "cannot read log " + log_path);

        std::vector<nlohmann::json> records;
        std::string line;
        bool last_line_terminated = true;
        while (std::getline(in, line))
        {
            last_line_terminated = !in.eof();
            if (line.empty())
                corrupt(records.size() + 1, "empty line");
            try
            {
                records.push_back(nlohmann::json::parse(line));
            }
            catch (const nlohmann::json::exception &e)
            {
                corrupt(records.size() + 1, std::string("not a JSON record: ") + e.what());
            }
        }
        if (records.empty())
            corrupt(0, "log is empty");
        if (records.front().value("type", "") != "header")
            corrupt(1, "first record is not a header");
        if (records.back().value("type", "") != "result" || !last_line_terminated)
            corrupt(records.size(), "log is truncated, no result record");

        const nlohmann::json &header = records.front();
        const nlohmann::json &footer = records.back();

        try
        {
            if (header.at("version").get<int>() != kLogVersion)
                corrupt(1, "unsupported log version");

            World world = world_from_snapshot(header.at("world"));
            const ActorId ego = header.at("ego_id").get<ActorId>();
            const nlohmann::json &cfg = header.at("config");
            const double threshold = cfg.at("completion_threshold").get<double>();
            const RouteFile route = parse_route(header.at("route").get<std::string>());
            const DenseRoute dense = interpolate_route(route, cfg.at("spacing").get<double>());
            SensorRig rig = build_rig(rig_from_json(header.at("rig")), world.seed());
            ScenarioMonitor monitor(dense, cfg.at("off_route_limit").get<double>());

            RunResult result;
            result.agent_name = header.at("agent").get<std::string>();
            result.route_id = header.at("route_id").get<std::string>();
            result.seed = header.at("seed").get<std::uint64_t>();
            result.log_path = log_path;

            for (std::size_t k = 1; k + 1 < records.size(); ++k)
            {
                const nlohmann::json &rec = records[k];
                if (rec.value("type", "") != "frame")
                    corrupt(k + 1, "expected a frame record");
                const std::int64_t f = rec.at("frame").get<std::int64_t>();
                if (f != world.state().frame)
                    corrupt(k + 1, "frame " + std::to_string(f) + " out of sequence");
                if (monitor.collided())
                    diverged(f, "run continued past a fatal collision");

                const SensorFrame sample = rig.sample(world.state(), world.map(), ego);
                if (codec::hex64(codec::digest(sample)) != rec.at("sensor_digest").get<std::string>())
                    diverged(f, "sensor digest differs");

                ControlAction action;
                try
                {
                    action = control_from_json(rec.at("control"));
                    world.apply_control(ego, action);
                }
                catch (const Error &e)
                {
                    diverged(f, std::string("logged control rejected: ") + e.what());
                }
                const WorldState &st = world.tick();
                ++result.frames_executed;
                if (!same_state(st.find(ego)->state, rec.at("ego")))
                    diverged(f, "ego state differs");

                std::vector<Infraction> logged;
                for (const nlohmann::json &j : rec.at("infractions"))
                    logged.push_back(infraction_from_json(j));
                std::vector<Infraction> expected;
                for (const Infraction &i : logged)
                {
                    if (agent_side(i.kind))
                        expected.push_back(i);
                }
                for (Infraction &i : monitor.observe(st, world.map(), ego, f))
                    expected.push_back(std::move(i));
                if (expected != logged)
                    diverged(f, "infractions differ");
                result.infractions.insert(result.infractions.end(), logged.begin(), logged.end());
            }

            result.completion = monitor.completion();
            result.terminated_by = decide(monitor.collided(), result.completion, threshold);
            if (codec::hex64(result.hash()) != footer.at("result_hash").get<std::string>())
                diverged(world.state().frame, "result differs from the logged result");
            return result;
        }
        catch (const nlohmann::json::exception &e)
        {
            corrupt(0, std::string("malformed record: ") + e.what());
        }
    }
}

#include "cli.hpp"

#include "drive/agent.hpp"
#include "drive/codec.hpp"
#include "drive/harness.hpp"
#include "drive/map.hpp"
#include "drive/route.hpp"
#include "drive/text.hpp"
#include "drive/wire/client.hpp"
#include "drive/wire/server.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <csignal>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace drive::cli
{
    namespace
    {
        // Tags an error with the flag or file it came from.
        struct InputFailure
        {
            std::string message;
            int code;
        };

        bool is_input_error(ErrorCode c)
        {
            switch (c)
            {
            case ErrorCode::Io:
            case ErrorCode::ParseError:
            case ErrorCode::EmptyRoute:
            case ErrorCode::DuplicateConsecutivePoint:
            case ErrorCode::NoRoads:
            case ErrorCode::OriginDegenerate:
            case ErrorCode::NonFinite:
            case ErrorCode::LogCorrupt:
                return true;
            default:
                return false;
            }
        }

        template <typename F>
        auto load(const std::string &flag, const std::string &path, F &&f) -> decltype(f())
        {
            try
            {
                return f();
            }
            catch (const Error &e)
            {
                throw InputFailure{flag + " " + path + ": " + e.what(), kInputError};
            }
        }

        std::uint64_t parse_seed(const std::string &text, const std::string &source)
        {
            std::uint64_t v = 0;
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
            {
                throw InputFailure{source + ": '" + text + "' is not an unsigned integer", kUsage};
            }
            return v;
        }

        void print_pretty(std::ostream &out, const RunResult &r)
        {
            out << "agent          " << r.agent_name << '\n'
                << "route          " << r.route_id << '\n'
                << "seed           " << r.seed << '\n'
                << "frames         " << r.frames_executed << '\n'
                << "completion     " << std::fixed << std::setprecision(4) << r.completion << '\n'
                << std::defaultfloat << "terminated_by  " << to_string(r.terminated_by) << '\n'
                << "infractions    " << r.infractions.size() << '\n';
            for (const Infraction &i : r.infractions)
            {
                out << "  frame " << std::setw(6) << i.frame << "  " << std::left << std::setw(16) << to_string(i.kind)
                    << std::right << i.detail << '\n';
            }
            if (!r.log_path.empty())
                out << "log            " << r.log_path << '\n';
        }

        struct RunFlags
        {
            std::string agent, route, map, out, connect, seed;
            std::int64_t max_frames = 2400;
            double step_budget_ms = kDefaultStepBudgetMs;
            double spacing = kDefaultSpacing;
            bool pretty = false;
        };

        int cmd_run(const RunFlags &f, std::ostream &out, std::ostream &err)
        {
            std::uint64_t seed = 0;
            if (!f.seed.empty())
            {
                seed = parse_seed(f.seed, "--seed");
            }
            else if (const char *env = std::getenv("HARNESS_SEED"); env != nullptr && *env != '\0')
            {
                seed = parse_seed(env, "HARNESS_SEED");
            }

            HarnessConfig config;
            config.agent_name = f.agent;
            config.route_path = f.route;
            config.max_frames = f.max_frames;
            config.step_budget_ms = f.step_budget_ms;
            config.spacing = f.spacing;
            config.log_path = f.out;
            try
            {
                config.validate();
            }
            catch (const Error &e)
            {
                throw InputFailure{e.what(), kUsage};
            }
            if (!f.agent.starts_with("ext:"))
            {
                try
                {
                    resolve_agent(f.agent);
                }
                catch (const Error &e)
                {
                    throw InputFailure{"--agent " + f.agent + ": " + e.what(), kUsage};
                }
            }
            // Surface route problems as input errors before any world exists.
            load("--route", f.route, [&] {
                validate_route_file(load_route_file(f.route));
                return 0;
            });

            RunResult result;
            if (f.connect.empty())
            {
                if (f.map.empty())
                    throw InputFailure{"--map is required unless --connect is given", kUsage};
                World world(load("--map", f.map, [&] { return load_map(f.map); }), seed);
                result = run_scenario(config, world);
            }
            else
            {
                const auto [host, port] = load("--connect", f.connect, [&] { return wire::parse_endpoint(f.connect); });
                wire::Client client = wire::Client::connect(host, port, wire::Role::Authority);
                if (client.role() != wire::Role::Authority)
                {
                    err << "--connect " << f.connect << ": another client already holds the authority role\n";
                    return kRuntime;
                }
                wire::RemoteWorldClient remote(std::move(client));
                result = run_scenario(config, remote);
            }

            if (f.pretty)
                print_pretty(out, result);
            else
                out << result.to_json() << '\n';
            const bool clean = result.terminated_by == Termination::Completed && result.infractions.empty();
            return clean ? kOk : kRunFailed;
        }

        int cmd_validate_route(const std::string &route_path, const std::string &map_path, double spacing,
                               std::ostream &out, std::ostream &err)
        {
            if (!(spacing > 0.0))
                throw InputFailure{"--spacing must be positive", kUsage};
            const RouteFile route = load("--route", route_path, [&] {
                RouteFile r = load_route_file(route_path);
                validate_route_file(r);
                return r;
            });
            GeoOrigin origin;
            if (!map_path.empty())
                origin = load("--map", map_path, [&] { return load_map(map_path); }).geo_origin;

            const DenseRoute dense = interpolate_route(route, spacing);
            const GeoRoute geo = to_geo(dense, origin);
            double max_gap = 0.0;
            for (std::size_t i = 1; i < dense.waypoints.size(); ++i)
            {
                max_gap = std::max(max_gap, norm(position_of(dense.waypoints[i].pose) -
                                                 position_of(dense.waypoints[i - 1].pose)));
            }
            double lat_min = std::numeric_limits<double>::infinity(), lat_max = -lat_min;
            double lon_min = lat_min, lon_max = -lat_min;
            for (const GeoWaypoint &g : geo.geopoints)
            {
                lat_min = std::min(lat_min, g.location.latitude);
                lat_max = std::max(lat_max, g.location.latitude);
                lon_min = std::min(lon_min, g.location.longitude);
                lon_max = std::max(lon_max, g.location.longitude);
            }

            out << "route_id   " << route.route_id << '\n'
                << "town       " << route.town << '\n'
                << "keypoints  " << route.keypoints.size() << '\n'
                << "waypoints  " << dense.waypoints.size() << '\n'
                << "length     " << format_double(dense.total_length()) << '\n'
                << "max_gap    " << format_double(max_gap) << '\n'
                << "lat        [" << format_double(lat_min) << ", " << format_double(lat_max) << "]\n"
                << "lon        [" << format_double(lon_min) << ", " << format_double(lon_max) << "]\n";

            if (max_gap > spacing + 1e-9)
            {
                err << "gap " << format_double(max_gap) << " exceeds spacing " << format_double(spacing) << '\n';
                return kInputError;
            }
            return kOk;
        }

        int cmd_list_agents(std::ostream &out)
        {
            const AgentRegistry registry = AgentRegistry::with_builtins();
            for (const std::string &name : registry.names())
            {
                const ResolvedAgent a = registry.resolve(name);
                out << name << "  family=" << a.descriptor.family;
                out << "  params={";
                bool first = true;
                for (const auto &[k, v] : a.parameters)
                {
                    out << (first ? "" : ", ") << k << '=' << format_double(v);
                    first = false;
                }
                out << "}  rig=[";
                first = true;
                for (const SensorSpec &s : a.rig)
                {
                    out << (first ? "" : ", ") << s.sensor_id << ':' << to_string(s.kind);
                    first = false;
                }
                out << "]\n";
            }
            return kOk;
        }

        int cmd_serve(const std::string &map_path, const std::string &bind, std::uint16_t port,
                      const std::string &seed_text, std::ostream &out, std::ostream &err)
        {
            std::uint64_t seed = 0;
            if (!seed_text.empty())
                seed = parse_seed(seed_text, "--seed");
            else if (const char *env = std::getenv("HARNESS_SEED"); env != nullptr && *env != '\0')
                seed = parse_seed(env, "HARNESS_SEED");

            // Block the stop signals before any server thread exists, then wait for one.
            sigset_t stop_signals;
            sigemptyset(&stop_signals);
            sigaddset(&stop_signals, SIGINT);
            sigaddset(&stop_signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

            WorldMap map = load("--map", map_path, [&] { return load_map(map_path); });
            wire::ServerOptions options;
            options.bind_address = bind;
            options.port = port;
            options.log = [&err](const std::string &line) { err << line << '\n'; };
            wire::Server server(std::move(map), seed, options);
            server.start();
            out << "listening on " << bind << ':' << server.port() << std::endl;

            int sig = 0;
            sigwait(&stop_signals, &sig);
            server.stop();
            return kOk;
        }

        int cmd_replay(const std::string &log_path, std::ostream &out, std::ostream &err)
        {
            try
            {
                const RunResult r = replay(log_path);
                out << r.to_json() << '\n';
                return kOk;
            }
            catch (const Error &e)
            {
                if (e.code() == ErrorCode::DeterminismViolation)
                {
                    err << "--log " << log_path << ": divergence at frame " << e.detail() << ": " << e.what() << '\n';
                    return kRuntime;
                }
                throw InputFailure{"--log " + log_path + ": " + e.what(),
                                   is_input_error(e.code()) ? kInputError : kRuntime};
            }
        }
    }

    int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"Deterministic driving-agent scenario harness", "drive"};
        app.require_subcommand(1);

        RunFlags rf;
        CLI::App *run_cmd = app.add_subcommand("run", "Run one scenario and print its result");
        run_cmd->add_option("--agent", rf.agent, "Agent name, or ext:host:port")->required();
        run_cmd->add_option("--route", rf.route, "Route XML file")->required();
        run_cmd->add_option("--map", rf.map, "Map JSON file (in-process runs)");
        run_cmd->add_option("--out", rf.out, "Run log to write");
        run_cmd->add_option("--seed", rf.seed, "World seed (default: HARNESS_SEED, else 0)");
        run_cmd->add_option("--max-frames", rf.max_frames, "Frame limit")->capture_default_str();
        run_cmd->add_option("--step-budget-ms", rf.step_budget_ms, "Per-step agent budget")->capture_default_str();
        run_cmd->add_option("--spacing", rf.spacing, "Dense route spacing in meters")->capture_default_str();
        run_cmd->add_option("--connect", rf.connect, "Run against a world server at host:port");
        run_cmd->add_flag("--pretty", rf.pretty, "Human-readable summary instead of JSON");

        std::string v_route, v_map;
        double v_spacing = kDefaultSpacing;
        CLI::App *validate_cmd = app.add_subcommand("validate-route", "Check a route file and report its dense form");
        validate_cmd->add_option("--route", v_route, "Route XML file")->required();
        validate_cmd->add_option("--map", v_map, "Map JSON file supplying the geographic origin");
        validate_cmd->add_option("--spacing", v_spacing, "Dense route spacing in meters")->capture_default_str();

        CLI::App *list_cmd = app.add_subcommand("list-agents", "List every resolvable agent name");

        std::string s_map, s_bind = "127.0.0.1", s_seed;
        std::uint16_t s_port = 2000;
        CLI::App *serve_cmd = app.add_subcommand("serve", "Serve a world over the wire protocol");
        serve_cmd->add_option("--map", s_map, "Map JSON file")->required();
        serve_cmd->add_option("--bind", s_bind, "Bind address")->capture_default_str();
        serve_cmd->add_option("--port", s_port, "TCP port, 0 for ephemeral")->capture_default_str();
        serve_cmd->add_option("--seed", s_seed, "World seed (default: HARNESS_SEED, else 0)");

        std::string r_log;
        CLI::App *replay_cmd = app.add_subcommand("replay", "Re-execute a run log and check it bit for bit");
        replay_cmd->add_option("--log", r_log, "Run log")->required();

        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try
        {
            app.parse(reversed);
        }
        catch (const CLI::ParseError &e)
        {
            const int code = app.exit(e, out, err);
            return code == 0 ? kOk : kUsage;
        }

        try
        {
            if (*run_cmd)
                return cmd_run(rf, out, err);
            if (*validate_cmd)
                return cmd_validate_route(v_route, v_map, v_spacing, out, err);
            if (*list_cmd)
                return cmd_list_agents(out);
            if (*serve_cmd)
                return cmd_serve(s_map, s_bind, s_port, s_seed, out, err);
            if (*replay_cmd)
                return cmd_replay(r_log, out, err);
        }
        catch (const InputFailure &f)
        {
            err << f.message << '\n';
            return f.code;
        }
        catch (const Error &e)
        {
            err << "error: " << e.what() << '\n';
            return kRuntime;
        }
        catch (const std::exception &e)
        {
            err << "error: " << e.what() << '\n';
            return kRuntime;
        }
        return kUsage;
    }
}

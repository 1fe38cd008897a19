#include "cli.hpp"

#include "drive/wire/client.hpp"
#include "drive/wire/server.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <sstream>

using namespace drive;
using namespace drive::testing;

namespace
{
    struct Outcome
    {
        int code;
        std::string out;
        std::string err;
    };

    Outcome drive_cli(std::vector<std::string> args)
    {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return {code, out.str(), err.str()};
    }

    std::vector<std::string> run_args(const std::string &agent, const std::string &route = straight_route_path())
    {
        return {"run", "--agent", agent, "--route", route, "--map", straight_map_path()};
    }

    std::vector<std::string> plus(std::vector<std::string> a, std::initializer_list<std::string> more)
    {
        a.insert(a.end(), more);
        return a;
    }
}

TEST(Cli, CleanRunExitsZeroWithJsonSummary)
{
    const Outcome o = drive_cli(run_args("pp_fast"));
    ASSERT_EQ(o.code, 0) << o.err;
    const auto j = nlohmann::json::parse(o.out);
    EXPECT_EQ(j.at("terminated_by"), "completed");
    EXPECT_EQ(j.at("agent_name"), "pp_fast");
    EXPECT_TRUE(j.at("infractions").empty());
    EXPECT_EQ(j.at("result_hash").get<std::string>().size(), 16u);
}

TEST(Cli, PrettySummary)
{
    const Outcome o = drive_cli(plus(run_args("pp_fast"), {"--pretty"}));
    EXPECT_EQ(o.code, 0);
    EXPECT_NE(o.out.find("completed"), std::string::npos);
}

TEST(Cli, IncompleteRunExitsOne)
{
    const Outcome o = drive_cli(plus(run_args("noop"), {"--max-frames", "100"}));
    EXPECT_EQ(o.code, 1);
    EXPECT_EQ(nlohmann::json::parse(o.out).at("terminated_by"), "max_frames");
}

TEST(Cli, UsageErrorsExitTwo)
{
    EXPECT_EQ(drive_cli({}).code, 2);
    EXPECT_EQ(drive_cli({"fly"}).code, 2);
    EXPECT_EQ(drive_cli(plus(run_args("pp_fast"), {"--frobnicate"})).code, 2);
    EXPECT_EQ(drive_cli({"run", "--route", straight_route_path()}).code, 2);
    EXPECT_EQ(drive_cli(run_args("nosuch")).code, 2);
    EXPECT_EQ(drive_cli(run_args("Neat Neat")).code, 2);
    EXPECT_EQ(drive_cli(plus(run_args("pp_fast"), {"--max-frames", "0"})).code, 2);
    EXPECT_EQ(drive_cli(plus(run_args("pp_fast"), {"--seed", "abc"})).code, 2);
    EXPECT_EQ(drive_cli({"run", "--agent", "pp_fast", "--route", straight_route_path()}).code, 2); // no map
    EXPECT_EQ(drive_cli({"--help"}).code, 0);
}

TEST(Cli, InputErrorsExitThreeAndNameTheFile)
{
    TempDir dir;
    const Outcome missing = drive_cli(run_args("pp_fast", dir.file("none.xml")));
    EXPECT_EQ(missing.code, 3);
    EXPECT_NE(missing.err.find("--route"), std::string::npos);
    EXPECT_NE(missing.err.find("none.xml"), std::string::npos);

    write_file(dir.file("bad.json"), "{}");
    const Outcome bad_map = drive_cli({"run", "--agent", "pp_fast", "--route", straight_route_path(), "--map",
                                       dir.file("bad.json")});
    EXPECT_EQ(bad_map.code, 3);
    EXPECT_NE(bad_map.err.find("--map"), std::string::npos);
}

TEST(Cli, ValidateRouteReportsGeometry)
{
    TempDir dir;
    write_file(dir.file("r.xml"), route_document({{0, 0, 0}, {10, 0, 0}}, "ten"));
    const Outcome o = drive_cli({"validate-route", "--route", dir.file("r.xml")});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_NE(o.out.find("route_id   ten"), std::string::npos);
    EXPECT_NE(o.out.find("waypoints  11"), std::string::npos);
    EXPECT_NE(o.out.find("length     10\n"), std::string::npos);
    EXPECT_NE(o.out.find("max_gap    1\n"), std::string::npos);

    const Outcome geo = drive_cli({"validate-route", "--route", straight_route_path(), "--map", straight_map_path()});
    EXPECT_EQ(geo.code, 0);
    EXPECT_NE(geo.out.find("lat        [49, 49]"), std::string::npos);
}

TEST(Cli, ValidateRouteRejectsDuplicatePointByIndex)
{
    TempDir dir;
    write_file(dir.file("dup.xml"), route_document({{0, 0, 0}, {5, 0, 0}, {5, 0, 0}}));
    const Outcome o = drive_cli({"validate-route", "--route", dir.file("dup.xml")});
    EXPECT_EQ(o.code, 3);
    EXPECT_NE(o.err.find("waypoint 2"), std::string::npos);
    EXPECT_NE(o.err.find("dup.xml"), std::string::npos);
    EXPECT_EQ(drive_cli({"validate-route", "--route", dir.file("dup.xml"), "--spacing", "0"}).code, 2);
}

TEST(Cli, ListAgentsIsSortedAndStable)
{
    const Outcome a = drive_cli({"list-agents"});
    const Outcome b = drive_cli({"list-agents"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    std::istringstream in(a.out);
    std::vector<std::string> names;
    for (std::string line; std::getline(in, line);)
        names.push_back(line.substr(0, line.find(' ')));
    EXPECT_EQ(names.size(), 13u);
    EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
    EXPECT_NE(a.out.find("pp_safe  family=pp  params={lookahead=4, max_wheel_angle=0.61, speed_gain=0.5, "
                         "stop_distance=8, target_speed=5, wheelbase=2.9}  rig=[gnss:gnss, speed:speedometer, "
                         "imu:imu, bev:bev_occupancy]"),
              std::string::npos);
}

TEST(Cli, RunLogReplaysAndTamperingIsCaught)
{
    TempDir dir;
    const std::string log = dir.file("run.ndjson");
    ASSERT_EQ(drive_cli(plus(run_args("pp_fast"), {"--out", log, "--seed", "9"})).code, 0);
    const Outcome ok = drive_cli({"replay", "--log", log});
    EXPECT_EQ(ok.code, 0) << ok.err;

    auto lines = read_lines(log);
    auto rec = nlohmann::json::parse(lines.at(11));
    rec["control"]["steer"] = 0.5;
    lines[11] = rec.dump();
    std::string tampered;
    for (const auto &l : lines)
        tampered += l + "\n";
    write_file(log, tampered);
    const Outcome div = drive_cli({"replay", "--log", log});
    EXPECT_EQ(div.code, 4);
    EXPECT_NE(div.err.find("frame 10"), std::string::npos);

    lines.pop_back();
    std::string truncated;
    for (const auto &l : lines)
        truncated += l + "\n";
    write_file(log, truncated);
    EXPECT_EQ(drive_cli({"replay", "--log", log}).code, 3);
    EXPECT_EQ(drive_cli({"replay", "--log", dir.file("missing")}).code, 3);
}

TEST(Cli, SeedFallsBackToEnvironment)
{
    TempDir dir;
    ::setenv("HARNESS_SEED", "77", 1);
    const Outcome env = drive_cli(plus(run_args("pp_fast"), {"--out", dir.file("a")}));
    ::unsetenv("HARNESS_SEED");
    ASSERT_EQ(env.code, 0);
    EXPECT_EQ(nlohmann::json::parse(env.out).at("seed"), 77);
    const Outcome flag = drive_cli(plus(run_args("pp_fast"), {"--seed", "77", "--out", dir.file("b")}));
    EXPECT_EQ(read_lines(dir.file("a")), read_lines(dir.file("b")));
    EXPECT_EQ(nlohmann::json::parse(drive_cli(run_args("pp_fast")).out).at("seed"), 0);

    ::setenv("HARNESS_SEED", "x", 1);
    EXPECT_EQ(drive_cli(run_args("pp_fast")).code, 2);
    ::unsetenv("HARNESS_SEED");
}

TEST(Cli, ConnectRunsAgainstAServer)
{
    auto server = wire::serve("127.0.0.1", 0, straight_map_path(), 0);
    const std::string endpoint = "127.0.0.1:" + std::to_string(server->port());
    const Outcome o = drive_cli({"run", "--agent", "pp_fast", "--route", straight_route_path(), "--connect", endpoint});
    EXPECT_EQ(o.code, 0) << o.err;

    // A second authority is refused while the first session holds the role.
    auto holder = wire::Client::connect("127.0.0.1", server->port(), wire::Role::Authority);
    const Outcome busy = drive_cli({"run", "--agent", "pp_fast", "--route", straight_route_path(), "--connect", endpoint});
    EXPECT_EQ(busy.code, 4);
    EXPECT_EQ(drive_cli({"run", "--agent", "pp_fast", "--route", straight_route_path(), "--connect", "nohost"}).code, 3);
}

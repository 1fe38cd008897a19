#include "drive/errors.hpp"
#include "drive/route.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace drive;
using namespace drive::testing;

namespace
{
    RouteFile two_point(double x1, double y1)
    {
        RouteFile r;
        r.route_id = "t";
        r.town = "T";
        r.keypoints = {{0, 0, 0}, {x1, y1, 0}};
        return r;
    }

    ErrorCode code_of(const std::function<void()> &f)
    {
        try
        {
            f();
        }
        catch (const Error &e)
        {
            return e.code();
        }
        return ErrorCode::Internal;
    }
}

TEST(ParseRoute, MinimalTwoWaypoints)
{
    const RouteFile r = parse_route(route_document({{0, 0, 0}, {10, 0, 0}}, "r1", "Town01"));
    EXPECT_EQ(r.route_id, "r1");
    EXPECT_EQ(r.town, "Town01");
    ASSERT_EQ(r.keypoints.size(), 2u);
    EXPECT_EQ(r.keypoints[1].x, 10.0);
}

TEST(ParseRoute, YawIsDegreesInFileRadiansInMemory)
{
    const RouteFile r = parse_route(route_document({{0, 0, 90}, {10, 0, -180}}));
    EXPECT_NEAR(r.keypoints[0].yaw, kPi / 2, 1e-15);
    EXPECT_NEAR(r.keypoints[1].yaw, kPi, 1e-15); // normalized into (-pi, pi]
}

TEST(ParseRoute, ZeroWaypointsIsEmptyRoute)
{
    EXPECT_EQ(code_of([] { parse_route("<route id=\"a\" town=\"b\">\n</route>\n"); }), ErrorCode::EmptyRoute);
    EXPECT_EQ(code_of([] { parse_route("<route id=\"a\" town=\"b\"/>"); }), ErrorCode::EmptyRoute);
}

TEST(ParseRoute, SingleWaypointIsEmptyRoute)
{
    EXPECT_EQ(code_of([] { parse_route(route_document({{1, 1, 0}})); }), ErrorCode::EmptyRoute);
}

TEST(ParseRoute, DuplicateConsecutivePointCarriesIndex)
{
    try
    {
        parse_route(route_document({{0, 0, 0}, {5, 5, 0}, {5, 5, 30}, {9, 9, 0}}));
        FAIL();
    }
    catch (const Error &e)
    {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateConsecutivePoint);
        EXPECT_EQ(e.detail(), 2);
    }
}

TEST(ParseRoute, ErrorsCarryLineNumbers)
{
    const std::string doc = "<route id=\"a\" town=\"b\">\n"
                            "  <waypoint x=\"0\" y=\"0\" yaw=\"0\"/>\n"
                            "  <waypoint x=\"abc\" y=\"0\" yaw=\"0\"/>\n"
                            "</route>\n";
    try
    {
        parse_route(doc);
        FAIL();
    }
    catch (const ParseError &e)
    {
        EXPECT_EQ(e.line(), 3);
    }
}

TEST(ParseRoute, RejectsMalformedDocuments)
{
    const char *bad[] = {
        "",
        "<route id=\"a\" town=\"b\">",                                               // unclosed
        "<routes id=\"a\" town=\"b\"></routes>",                                      // wrong root
        "<route id=\"a\"><waypoint x=\"0\" y=\"0\" yaw=\"0\"/></route>",             // missing town
        "<route id=\"a\" town=\"b\"><waypoint x=\"0\" y=\"0\"/></route>",            // missing yaw
        "<route id=\"a\" town=\"b\"><waypoint x=\"0\" y=\"0\" yaw=\"0\" z=\"1\"/></route>", // unknown attr
        "<route id=\"a\" town=\"b\"><point/></route>",                               // unknown element
        "<route id=\"a\" town=\"b\"><waypoint x=\"inf\" y=\"0\" yaw=\"0\"/></route>",
    };
    for (const char *doc : bad)
    {
        EXPECT_THROW(parse_route(doc), Error) << doc;
    }
}

TEST(ParseRoute, AcceptsPrologAndComments)
{
    const std::string doc = "<?xml version=\"1.0\"?>\n<!-- sample -->\n<route id=\"x&amp;y\" town=\"t\">\n"
                            "<!-- a --><waypoint x=\"1\" y=\"2\" yaw=\"0\"/>\n<waypoint x=\"+3.5\" y=\"-2e1\" yaw=\"0\"></waypoint>\n"
                            "</route>";
    const RouteFile r = parse_route(doc);
    EXPECT_EQ(r.route_id, "x&y");
    EXPECT_EQ(r.keypoints[1].x, 3.5);
    EXPECT_EQ(r.keypoints[1].y, -20.0);
}

TEST(ParseRoute, SerializeRoundTrip)
{
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i)
    {
        RouteFile r = random_route(rng);
        std::uniform_real_distribution<double> yaw(-3.0, 3.0);
        for (Transform &t : r.keypoints)
            t.yaw = yaw(rng);
        r.route_id = "id<&>\"" + std::to_string(i);
        const RouteFile back = parse_route(serialize_route(r));
        EXPECT_EQ(back.route_id, r.route_id);
        ASSERT_EQ(back.keypoints.size(), r.keypoints.size());
        for (std::size_t k = 0; k < r.keypoints.size(); ++k)
        {
            EXPECT_EQ(back.keypoints[k].x, r.keypoints[k].x);
            EXPECT_EQ(back.keypoints[k].y, r.keypoints[k].y);
            EXPECT_NEAR(back.keypoints[k].yaw, r.keypoints[k].yaw, 1e-12);
        }
    }
}

TEST(LoadRoute, MissingFileIsIoError)
{
    EXPECT_EQ(code_of([] { load_route_file("/nonexistent/route.xml"); }), ErrorCode::Io);
}

TEST(Interpolate, TenMetersAtOneMeterSpacing)
{
    const DenseRoute d = interpolate_route(two_point(10, 0), 1.0);
    ASSERT_EQ(d.waypoints.size(), 11u);
    for (std::size_t i = 0; i < d.waypoints.size(); ++i)
    {
        EXPECT_DOUBLE_EQ(d.waypoints[i].pose.x, static_cast<double>(i));
        EXPECT_EQ(d.waypoints[i].pose.yaw, 0.0);
        EXPECT_DOUBLE_EQ(d.waypoints[i].arc_length, static_cast<double>(i));
    }
    EXPECT_TRUE(d.waypoints.front().keypoint);
    EXPECT_TRUE(d.waypoints.back().keypoint);
    EXPECT_FALSE(d.waypoints[5].keypoint);
}

TEST(Interpolate, ShortSegmentNeedsNoSubdivision)
{
    EXPECT_EQ(interpolate_route(two_point(0.5, 0), 1.0).waypoints.size(), 2u);
}

TEST(Interpolate, ThreeFourFiveTriangle)
{
    const DenseRoute d = interpolate_route(two_point(3, 4), 1.0);
    ASSERT_EQ(d.waypoints.size(), 6u);
    EXPECT_DOUBLE_EQ(d.total_length(), 5.0);
    for (const RoutePoint &p : d.waypoints)
        EXPECT_DOUBLE_EQ(p.pose.yaw, std::atan2(4.0, 3.0));
}

TEST(Interpolate, FinalWaypointInheritsLastHeading)
{
    RouteFile r = two_point(10, 0);
    r.keypoints.push_back({10, 10, 0});
    const DenseRoute d = interpolate_route(r, 1.0);
    EXPECT_DOUBLE_EQ(d.waypoints.back().pose.yaw, kPi / 2);
    EXPECT_DOUBLE_EQ(d.waypoints[9].pose.yaw, 0.0);
}

TEST(Interpolate, InvalidSpacing)
{
    for (double s : {0.0, -1.0, std::numeric_limits<double>::infinity(), std::nan("")})
    {
        EXPECT_EQ(code_of([&] { interpolate_route(two_point(10, 0), s); }), ErrorCode::InvalidSpacing) << s;
    }
}

TEST(Interpolate, ClosedFormCountsMatchCeilRule)
{
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i)
    {
        const RouteFile r = random_route(rng, 8, 100.0);
        std::uniform_real_distribution<double> sp(0.2, 5.0);
        const double spacing = sp(rng);
        std::size_t expected = 1;
        for (std::size_t k = 1; k < r.keypoints.size(); ++k)
        {
            const double d = std::hypot(r.keypoints[k].x - r.keypoints[k - 1].x, r.keypoints[k].y - r.keypoints[k - 1].y);
            expected += static_cast<std::size_t>(std::ceil(d / spacing));
        }
        const DenseRoute dense = interpolate_route(r, spacing);
        EXPECT_EQ(dense.waypoints.size(), expected);
        EXPECT_EQ(dense.waypoints.front().pose.x, r.keypoints.front().x);
        EXPECT_EQ(dense.waypoints.back().pose.x, r.keypoints.back().x);
        EXPECT_EQ(dense.waypoints.back().pose.y, r.keypoints.back().y);
        double max_gap = 0.0;
        for (std::size_t k = 1; k < dense.waypoints.size(); ++k)
        {
            ASSERT_GT(dense.waypoints[k].arc_length, dense.waypoints[k - 1].arc_length);
            max_gap = std::max(max_gap, norm(position_of(dense.waypoints[k].pose) - position_of(dense.waypoints[k - 1].pose)));
        }
        EXPECT_LE(max_gap, spacing + 1e-9);
        EXPECT_NEAR(dense.total_length(), polyline_length(r), 1e-9 * polyline_length(r));
    }
}

TEST(Geo, OriginMapsToOrigin)
{
    const GeoLocation g = to_geo(Vec2{0, 0}, GeoOrigin{});
    EXPECT_EQ(g.latitude, 0.0);
    EXPECT_EQ(g.longitude, 0.0);
    EXPECT_EQ(g.altitude, 0.0);
}

TEST(Geo, OneDegreeNorth)
{
    const double y = kEarthRadius * kPi / 180.0;
    const GeoLocation g = to_geo(Vec2{0, y}, GeoOrigin{});
    EXPECT_NEAR(g.latitude, 1.0, 1e-12);
    EXPECT_EQ(g.longitude, 0.0);
}

TEST(Geo, LongitudeScalesWithLatitude)
{
    const double x = kEarthRadius * kPi / 180.0;
    const GeoLocation g = to_geo(Vec2{x, 0}, GeoOrigin{60.0, 0.0, 0.0});
    EXPECT_NEAR(g.longitude, 2.0, 1e-9);
    EXPECT_EQ(g.latitude, 60.0);
}

TEST(Geo, AltitudeIsReference)
{
    EXPECT_EQ(to_geo(Vec2{5, 5}, GeoOrigin{10, 10, 123.5}).altitude, 123.5);
}

TEST(Geo, InverseExamples)
{
    const Transform o = from_geo({0.0, 0.0, 0.0}, GeoOrigin{});
    EXPECT_EQ(o.x, 0.0);
    EXPECT_EQ(o.y, 0.0);
    const Transform n = from_geo({1.0, 0.0, 0.0}, GeoOrigin{});
    EXPECT_NEAR(n.y, 111194.93, 1e-2);
    EXPECT_NEAR(n.y, kEarthRadius * kPi / 180.0, 1e-3);
    EXPECT_EQ(n.yaw, 0.0);
}

TEST(Geo, DegenerateOrigins)
{
    EXPECT_EQ(code_of([] { to_geo(Vec2{}, GeoOrigin{89.5, 0, 0}); }), ErrorCode::OriginDegenerate);
    EXPECT_EQ(code_of([] { from_geo({}, GeoOrigin{-90, 0, 0}); }), ErrorCode::OriginDegenerate);
    EXPECT_EQ(code_of([] { validate_origin({0, 181, 0}); }), ErrorCode::OriginDegenerate);
    EXPECT_NO_THROW(validate_origin({88.9, -180, 0}));
}

TEST(Geo, RoundTripWithinMicrometre)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lat(-85.0, 85.0), lon(-180.0, 180.0), d(-10000.0, 10000.0);
    for (int i = 0; i < 2000; ++i)
    {
        const GeoOrigin o{lat(rng), lon(rng), 0.0};
        const Vec2 p{d(rng), d(rng)};
        const Transform back = from_geo(to_geo(p, o), o);
        ASSERT_NEAR(back.x, p.x, 1e-6);
        ASSERT_NEAR(back.y, p.y, 1e-6);
    }
}

TEST(Geo, AntimeridianWraps)
{
    const GeoOrigin o{0.0, 179.99, 0.0};
    const GeoLocation g = to_geo(Vec2{5000, 0}, o);
    EXPECT_LE(g.longitude, 180.0);
    EXPECT_GT(g.longitude, -180.0);
    EXPECT_NEAR(from_geo(g, o).x, 5000.0, 1e-6);
}

TEST(Geo, RouteKeepsLengthAndLabelsTurns)
{
    RouteFile r = two_point(10, 0);
    r.keypoints.push_back({10, 10, 0});  // left turn
    r.keypoints.push_back({20, 10, 0});  // right turn
    r.keypoints.push_back({30, 10.5, 0}); // almost straight
    const DenseRoute d = interpolate_route(r, 1.0);
    const GeoRoute g = to_geo(d, GeoOrigin{});
    ASSERT_EQ(g.geopoints.size(), d.waypoints.size());
    std::vector<RoadOption> at_keypoints;
    for (std::size_t i = 0; i < d.waypoints.size(); ++i)
    {
        if (d.waypoints[i].keypoint && i != 0 && i + 1 != d.waypoints.size())
            at_keypoints.push_back(g.geopoints[i].road_option);
        else if (!d.waypoints[i].keypoint)
            EXPECT_EQ(g.geopoints[i].road_option, RoadOption::LaneFollow);
    }
    ASSERT_EQ(at_keypoints.size(), 3u);
    EXPECT_EQ(at_keypoints[0], RoadOption::Left);
    EXPECT_EQ(at_keypoints[1], RoadOption::Right);
    EXPECT_EQ(at_keypoints[2], RoadOption::Straight);
}

TEST(Progress, EndpointsAndOrthogonalProjection)
{
    const DenseRoute d = interpolate_route(two_point(10, 0), 1.0);
    auto p = route_progress(d, {0, 0, 0});
    EXPECT_EQ(p.completion, 0.0);
    EXPECT_EQ(p.cross_track, 0.0);
    p = route_progress(d, {10, 0, 0});
    EXPECT_DOUBLE_EQ(p.completion, 1.0);
    EXPECT_EQ(p.cross_track, 0.0);
    p = route_progress(d, {5, 2, 0});
    EXPECT_DOUBLE_EQ(p.completion, 0.5);
    EXPECT_DOUBLE_EQ(p.cross_track, 2.0);
}

TEST(Progress, TrackerNeverDecreasesAlongRoute)
{
    std::mt19937_64 rng(41);
    for (int i = 0; i < 30; ++i)
    {
        const DenseRoute d = interpolate_route(random_route(rng, 10, 200.0), 1.0);
        RouteTracker t(d);
        double last = 0.0;
        for (const RoutePoint &p : d.waypoints)
        {
            const double c = t.update(p.pose).completion;
            ASSERT_GE(c, last);
            last = c;
        }
        EXPECT_DOUBLE_EQ(last, 1.0);
    }
}

TEST(Progress, TrackerIgnoresBacktrackingAndFarAheadBranches)
{
    // Out and back: the far end of the return leg passes right next to the start.
    RouteFile r = two_point(100, 0);
    r.keypoints.push_back({100, 1});
    r.keypoints.push_back({0, 1});
    const DenseRoute d = interpolate_route(r, 1.0);
    RouteTracker t(d);
    t.update({10, 0, 0});
    const double c = t.completion();
    EXPECT_NEAR(c, 10.0 / d.total_length(), 1e-12);
    t.update({5, 0, 0}); // moving backwards
    EXPECT_EQ(t.completion(), c);
    t.reset();
    EXPECT_EQ(t.completion(), 0.0);
}

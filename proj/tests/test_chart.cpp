#include <doctest.h>

#include <algorithm>
#include <random>

#include "coastnav/chart.hpp"
#include "testutil.hpp"

using namespace coastnav;

namespace {

const char* kSmallChart = R"({
  "type": "FeatureCollection",
  "features": [
    {"type": "Feature",
     "properties": {"kind": "shoreline"},
     "geometry": {"type": "Polygon", "coordinates":
       [[[10.0, 55.0], [10.01, 55.0], [10.01, 55.01], [10.0, 55.01], [10.0, 55.0]]]}},
    {"type": "Feature",
     "properties": {"kind": "landmark", "id": "buoy-1"},
     "geometry": {"type": "Point", "coordinates": [10.02, 55.0]}},
    {"type": "Feature",
     "properties": {"kind": "landmark", "id": "buoy-2"},
     "geometry": {"type": "Point", "coordinates": [10.03, 55.01]}}
  ]
})";

double brute_force_min(const NedPoint& p, const ShorelineSamples& samples) {
    double best2 = std::numeric_limits<double>::infinity();
    for (const auto& q : samples.points()) {
        const double dn = p.north - q.north;
        const double de = p.east - q.east;
        const double d2 = dn * dn + de * de;
        if (d2 < best2) best2 = d2;
    }
    return std::sqrt(best2);
}

}  // namespace

TEST_CASE("chart parsing") {
    SUBCASE("island polygon and two landmarks") {
        const Chart chart = parse_chart(kSmallChart);
        REQUIRE(chart.shorelines.size() == 1);
        CHECK(chart.shorelines[0].size() == 5);
        REQUIRE(chart.landmarks.size() == 2);
        CHECK(chart.landmarks[0].id == "buoy-1");
    }
    SUBCASE("zero features is an error") {
        CHECK_THROWS_AS(parse_chart(R"({"type":"FeatureCollection","features":[]})"), ChartError);
    }
    SUBCASE("malformed coordinate names the feature") {
        const char* bad = R"({
          "type": "FeatureCollection",
          "features": [
            {"type": "Feature", "properties": {"kind": "landmark", "id": "x"},
             "geometry": {"type": "Point", "coordinates": [10.0, 200.0]}}
          ]})";
        CHECK_THROWS_WITH_AS(parse_chart(bad),
                             doctest::Contains("feature #0"), ChartError);
    }
    SUBCASE("duplicate landmark ids rejected") {
        const char* dup = R"({
          "type": "FeatureCollection",
          "features": [
            {"type": "Feature", "properties": {"kind": "landmark", "id": "x"},
             "geometry": {"type": "Point", "coordinates": [10.0, 55.0]}},
            {"type": "Feature", "properties": {"kind": "landmark", "id": "x"},
             "geometry": {"type": "Point", "coordinates": [10.1, 55.0]}}
          ]})";
        CHECK_THROWS_AS(parse_chart(dup), ChartError);
    }
    SUBCASE("load from disk") {
        testutil::TempDir tmp("chart");
        testutil::write_file(tmp.path() / "c.geojson", kSmallChart);
        const Chart chart = load_chart(tmp.path() / "c.geojson");
        CHECK(chart.landmarks.size() == 2);
        CHECK_THROWS_AS(load_chart(tmp.path() / "missing.geojson"), ChartError);
    }
}

TEST_CASE("shoreline extraction") {
    const GeodeticPoint origin = testutil::kOrigin;

    SUBCASE("island fully inside the radius is fully covered") {
        const Chart chart = testutil::circle_island_chart(origin, {1000.0, 0.0}, 300.0, 64);
        const auto samples = extract_shoreline(chart, origin, 3000.0, 10.0);
        const double perimeter = 2.0 * kPi * 300.0;
        CHECK(samples.size() > 0.9 * perimeter / 10.0);
        CHECK(samples.size() < 1.3 * perimeter / 10.0);
        // every sample stays near the ring
        for (const auto& p : samples.points()) {
            const double r = (p - NedPoint{1000.0, 0.0}).norm();
            CHECK(std::abs(r - 300.0) < 5.0);
        }
    }
    SUBCASE("island outside the radius yields nothing") {
        const Chart chart = testutil::circle_island_chart(origin, {9000.0, 0.0}, 300.0);
        const auto samples = extract_shoreline(chart, origin, 2000.0, 10.0);
        CHECK(samples.empty());
    }
    SUBCASE("straight 1 km segment at 10 m spacing gives 101 +- 1 samples") {
        Chart chart;
        chart.shorelines.push_back({to_geo({500.0, -500.0}, origin), to_geo({500.0, 500.0}, origin)});
        const auto samples = extract_shoreline(chart, origin, 5000.0, 10.0);
        CHECK(samples.size() >= 100);
        CHECK(samples.size() <= 102);
    }
    SUBCASE("consecutive samples within spacing") {
        Chart chart;
        chart.shorelines.push_back({to_geo({0.0, 0.0}, origin), to_geo({333.0, 117.0}, origin),
                                    to_geo({412.0, -250.0}, origin)});
        const auto samples = extract_shoreline(chart, origin, 5000.0, 7.0);
        for (std::size_t i = 1; i < samples.size(); ++i)
            CHECK((samples.points()[i] - samples.points()[i - 1]).norm() < 7.0 + 1e-9);
    }
    SUBCASE("invalid arguments") {
        const Chart chart = testutil::circle_island_chart(origin, {0.0, 0.0}, 100.0);
        CHECK_THROWS_AS(extract_shoreline(chart, origin, -1.0, 5.0), std::invalid_argument);
        CHECK_THROWS_AS(extract_shoreline(chart, origin, 100.0, 0.0), std::invalid_argument);
    }
}

TEST_CASE("min distance queries") {
    const GeodeticPoint origin = testutil::kOrigin;

    SUBCASE("sample point itself is at distance zero") {
        const Chart chart = testutil::circle_island_chart(origin, {500.0, 0.0}, 200.0);
        const auto samples = extract_shoreline(chart, origin, 2000.0, 5.0);
        REQUIRE(!samples.empty());
        CHECK(samples.min_distance(samples.points()[3]) == 0.0);
    }
    SUBCASE("perpendicular distance to a straight sampled segment") {
        Chart chart;
        chart.shorelines.push_back(
            {to_geo({200.0, -1000.0}, origin), to_geo({200.0, 1000.0}, origin)});
        const auto samples = extract_shoreline(chart, origin, 5000.0, 4.0);
        CHECK(samples.min_distance({150.0, 12.0}) == doctest::Approx(50.0).epsilon(0.02));
    }
    SUBCASE("grid index equals brute force exactly on an L-shaped shoreline") {
        Chart chart;
        chart.shorelines.push_back({to_geo({-500.0, -500.0}, origin), to_geo({500.0, -500.0}, origin),
                                    to_geo({500.0, 500.0}, origin)});
        const auto samples = extract_shoreline(chart, origin, 5000.0, 3.0);
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> u(-2000.0, 2000.0);
        for (int i = 0; i < 1000; ++i) {
            const NedPoint p{u(rng), u(rng)};
            CHECK(samples.min_distance(p) == brute_force_min(p, samples));
        }
    }
    SUBCASE("1-Lipschitz") {
        const Chart chart = testutil::archipelago_chart(origin);
        const auto samples = extract_shoreline(chart, origin, 6000.0, 5.0);
        std::mt19937_64 rng(29);
        std::uniform_real_distribution<double> u(-4000.0, 4000.0);
        for (int i = 0; i < 500; ++i) {
            const NedPoint p{u(rng), u(rng)}, q{u(rng), u(rng)};
            CHECK(std::abs(samples.min_distance(p) - samples.min_distance(q)) <=
                  (p - q).norm() + 1e-9);
        }
    }
    SUBCASE("polyline order does not change the sample set") {
        Chart a = testutil::archipelago_chart(origin);
        Chart b = a;
        std::reverse(b.shorelines.begin(), b.shorelines.end());
        auto sa = extract_shoreline(a, origin, 6000.0, 5.0);
        auto sb = extract_shoreline(b, origin, 6000.0, 5.0);
        auto key = [](const NedPoint& p) { return std::make_pair(p.north, p.east); };
        std::vector<std::pair<double, double>> va, vb;
        for (const auto& p : sa.points()) va.push_back(key(p));
        for (const auto& p : sb.points()) vb.push_back(key(p));
        std::sort(va.begin(), va.end());
        std::sort(vb.begin(), vb.end());
        CHECK(va == vb);
    }
    SUBCASE("empty samples error") {
        ShorelineSamples empty;
        CHECK_THROWS_AS(empty.min_distance({0.0, 0.0}), std::invalid_argument);
    }
}

#include <catch2/catch_amalgamated.hpp>

#include "urbc/geo.hpp"
#include "urbc/rng.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

urbc::GeoPoint random_point(urbc::Rng& rng) {
    return {rng.uniform(37.0, 38.0), rng.uniform(126.5, 127.5)};
}

}  // namespace

TEST_CASE("geodesic distance of a point to itself is zero") {
    const urbc::GeoPoint p{37.5, 127.0};
    REQUIRE(urbc::geodesic_distance(p, p) == 0.0);
}

TEST_CASE("geodesic distance matches closed-form meridian arc") {
    // Pure latitude separation: the great circle is the meridian, so the
    // distance is exactly R * dphi.
    const urbc::GeoPoint a{37.00, 127.00};
    const urbc::GeoPoint b{37.01, 127.00};
    const double expected = urbc::kEarthRadiusKm * urbc::deg2rad(0.01);
    REQUIRE_THAT(expected, WithinAbs(1.11195, 1e-4));
    REQUIRE_THAT(urbc::geodesic_distance(a, b), WithinAbs(expected, 1e-9));
    REQUIRE_THAT(urbc::geodesic_distance(a, b), WithinAbs(1.11195, 1e-4));
}

TEST_CASE("geodesic distance matches small-angle parallel arc") {
    // Pure longitude separation: R * dlambda * cos(phi) up to second order.
    const urbc::GeoPoint a{37.00, 127.00};
    const urbc::GeoPoint b{37.00, 127.01};
    REQUIRE_THAT(urbc::geodesic_distance(a, b), WithinAbs(0.88812, 1e-4));
}

TEST_CASE("geodesic distance is symmetric bit for bit") {
    urbc::Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_point(rng);
        const auto b = random_point(rng);
        REQUIRE(urbc::geodesic_distance(a, b) == urbc::geodesic_distance(b, a));
        REQUIRE(urbc::geodesic_distance(a, b) >= 0.0);
    }
}

TEST_CASE("triangle inequality holds for random triples") {
    urbc::Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_point(rng);
        const auto b = random_point(rng);
        const auto c = random_point(rng);
        REQUIRE(urbc::geodesic_distance(a, c) <=
                urbc::geodesic_distance(a, b) + urbc::geodesic_distance(b, c) + 1e-9);
    }
}

TEST_CASE("distance scales linearly with latitude separation") {
    urbc::Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        const auto a = random_point(rng);
        const double sep = rng.uniform(0.01, 1.0);
        const double one = urbc::geodesic_distance(a, {a.lat + sep, a.lon});
        const double half = urbc::geodesic_distance(a, {a.lat + sep / 2.0, a.lon});
        REQUIRE_THAT(one, WithinRel(2.0 * half, 1e-4));
    }
}

TEST_CASE("cell centroid sits half a cell north-east of the origin") {
    const urbc::GridCell cell{{0.0, 0.0}, 100.0};
    const auto centroid = urbc::cell_centroid(cell);
    const auto expected = urbc::offset_m(cell.origin, 50.0, 50.0);
    REQUIRE_THAT(centroid.lat, WithinAbs(expected.lat, 1e-12));
    REQUIRE_THAT(centroid.lon, WithinAbs(expected.lon, 1e-12));
    REQUIRE_THAT(urbc::geodesic_distance(cell.origin, centroid),
                 WithinAbs(std::sqrt(2.0) * 0.05, 1e-4));
}

TEST_CASE("cell centroid of a 50 m cell at the equator offsets 25 m per axis") {
    const urbc::GridCell cell{{0.0, 0.0}, 50.0};
    const auto centroid = urbc::cell_centroid(cell);
    const double north_m = urbc::deg2rad(centroid.lat) * urbc::kEarthRadiusKm * 1000.0;
    REQUIRE_THAT(north_m, WithinAbs(25.0, 1e-6));
    const double east_m = urbc::deg2rad(centroid.lon) * urbc::kEarthRadiusKm * 1000.0;
    REQUIRE_THAT(east_m, WithinAbs(25.0, 1e-6));
}

TEST_CASE("cell centroid diagonal at mid latitude") {
    const urbc::GridCell cell{{37.5, 127.0}, 50.0};
    const auto centroid = urbc::cell_centroid(cell);
    REQUIRE_THAT(urbc::geodesic_distance(cell.origin, centroid), WithinAbs(0.0354, 1e-3));
}

TEST_CASE("snap_cell round trips points into containing cells") {
    urbc::Rng rng(14);
    for (int i = 0; i < 100; ++i) {
        const auto p = random_point(rng);
        const auto cell = urbc::snap_cell(p, 50.0, 37.5);
        const double d = urbc::geodesic_distance(p, urbc::cell_centroid(cell));
        REQUIRE(d * 1000.0 <= 50.0);  // within the half-diagonal plus slack
    }
}

TEST_CASE("point validity bounds") {
    REQUIRE(urbc::GeoPoint{0.0, 0.0}.valid());
    REQUIRE(urbc::GeoPoint{-90.0, 180.0}.valid());
    REQUIRE_FALSE(urbc::GeoPoint{90.5, 0.0}.valid());
    REQUIRE_FALSE(urbc::GeoPoint{0.0, -180.5}.valid());
    REQUIRE_FALSE(urbc::GeoPoint{std::nan(""), 0.0}.valid());
}
